import pytest
from hypothesis import given, strategies as st

from fogplace.scenario import (InfeasibleDeadline, ScenarioParams, derive_rates, derive_timing,
                               make_scenario, scenario_table)

SHARE = 234_375.0


def test_default_unit_time():
    # 0.0963 s of processing plus 10% for analysis
    assert ScenarioParams(pat_max=1).unit_pa_time == pytest.approx(0.10593, rel=1e-15)


def test_s1_with_four_digit_unit_time():
    p = ScenarioParams(pat_max=50, unit_pa_override=0.1059)
    t = derive_timing(p)
    assert t.t_pa == pytest.approx(5.295, rel=1e-12)
    assert t.t_t == pytest.approx(234.705, rel=1e-12)
    rates, t2 = derive_rates(p, t, SHARE)
    assert rates.r_ps == pytest.approx(8180.481881510832, rel=1e-12)
    assert rates.r_cloud == pytest.approx(4687.5, rel=1e-12)
    assert t2.t_cloud == pytest.approx(27.0336, rel=1e-12)


@pytest.mark.parametrize("pm, t_pa, t_t, r_ps, r_cloud, t_cloud", [
    (50, 5.2965, 234.7035, 8180.534163316695, 4687.5, 27.0336),
    (100, 10.593, 229.407, 8369.40459532621, 2343.75, 54.0672),
    (150, 15.8895, 224.1105, 8567.20233991714, 1562.5, 81.1008),
    (200, 21.186, 218.814, 8774.575667004854, 1171.875, 108.1344),
])
def test_default_scenarios(pm, t_pa, t_t, r_ps, r_cloud, t_cloud):
    sc = make_scenario(ScenarioParams(pat_max=pm), SHARE)
    assert sc.timing.t_pa == pytest.approx(t_pa, rel=1e-12)
    assert sc.timing.t_t == pytest.approx(t_t, rel=1e-12)
    assert sc.rates.r_ps == pytest.approx(r_ps, rel=1e-12)
    assert sc.rates.r_cloud == pytest.approx(r_cloud, rel=1e-12)
    assert sc.timing.t_cloud == pytest.approx(t_cloud, rel=1e-12)


def test_deadline_exhausted():
    with pytest.raises(InfeasibleDeadline):
        make_scenario(ScenarioParams(pat_max=2300), SHARE)


def test_invalid_params():
    with pytest.raises(ValueError):
        ScenarioParams(pat_max=0).validate()
    with pytest.raises(ValueError):
        derive_rates(ScenarioParams(pat_max=5), derive_timing(ScenarioParams(pat_max=5)), 0.0)


def test_table_labels_and_rounding():
    rows = scenario_table([50, 100, 150, 200])
    assert [r.label for r in rows] == ["S1", "S2", "S3", "S4"]
    assert rows[3].rounded()["r_ps_kbps"] == 8.775
    assert scenario_table([]) == []


@given(st.integers(1, 2000), st.floats(1e3, 1e8))
def test_rate_laws(pm, share):
    p = ScenarioParams(pat_max=pm)
    sc = make_scenario(p, share)
    assert sc.rates.r_ps * sc.timing.t_t == pytest.approx(p.ecg_bits, rel=1e-12)
    assert sc.rates.r_cloud * pm == pytest.approx(share, rel=1e-12)
    assert sc.rates.r_cloud * sc.timing.t_cloud == pytest.approx(p.processed_bits, rel=1e-12)
    assert sc.timing.t_pa + sc.timing.t_t == pytest.approx(p.t_total, rel=1e-12)


@given(st.integers(1, 1000), st.integers(1, 1000))
def test_monotone_in_pat_max(a, b):
    lo, hi = sorted((a, b))
    s_lo = make_scenario(ScenarioParams(pat_max=lo), SHARE)
    s_hi = make_scenario(ScenarioParams(pat_max=hi), SHARE)
    assert s_hi.rates.r_ps >= s_lo.rates.r_ps
    assert s_hi.rates.r_cloud <= s_lo.rates.r_cloud
    assert s_hi.timing.t_cloud >= s_lo.timing.t_cloud
