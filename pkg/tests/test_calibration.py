import pytest

from fogplace import catalog as cat
from fogplace.calibration import ChainSpace, TrendTargets, calibrate, fit_chain, format_fit
from fogplace.energy import EnergyOptions
from fogplace.topology import DEFAULT_CHAIN, LAYERED_CHAIN


@pytest.fixture(scope="module")
def fits():
    return calibrate()


def test_space_shape():
    chains = ChainSpace().chains()
    assert len(chains) == 3 * 5 * 7
    assert len(set(chains)) == len(chains)
    assert all(c[-1] == cat.CLOUD_SWITCH for c in chains)
    assert LAYERED_CHAIN in chains and DEFAULT_CHAIN in chains


def test_default_chain_is_best_fit(fits):
    assert fits[0].chain == DEFAULT_CHAIN
    assert fits[0].admissible


def test_ranking(fits):
    keys = [f.rank_key() for f in fits]
    assert keys == sorted(keys)


@pytest.mark.parametrize("chain", [LAYERED_CHAIN, (cat.CLOUD_SWITCH,),
                                   (cat.AGG_SWITCH, cat.CORE_ROUTER, cat.CLOUD_SWITCH)])
def test_shared_placements_match_fresh_solves(fits, chain):
    cached = next(f for f in fits if f.chain == chain)
    fresh = fit_chain(chain)
    flat = [s for row in fresh.savings for s in row]
    assert flat == pytest.approx([s for row in cached.savings for s in row], rel=1e-12)
    assert fresh.mfa_vs_sfa == pytest.approx(cached.mfa_vs_sfa, rel=1e-12, abs=1e-12)


def test_dedicated_cloud_servers_are_far_off():
    fit = calibrate(chains=[DEFAULT_CHAIN], options=EnergyOptions(cloud_idle_share=1.0))[0]
    assert fit.first_residual > 25


def test_targets_and_format():
    fit = fit_chain(DEFAULT_CHAIN, targets=TrendTargets(first_saving_pct=0.0))
    assert fit.first_residual > 50
    assert "residuals" in format_fit(fit)
