import pytest
from hypothesis import given, strategies as st

from fogplace import catalog as cat
from fogplace.catalog import (DeviceCatalog, DomainError, Sharing, attributable_power,
                              default_catalog, validate_catalog)

# (p_max W, capacity bps or None, idle fraction)
TABLE = {
    cat.ACCESS_POINT: (21.0, 0.3e9, 0.9),
    cat.ONT: (8.0, 3.75e9, 0.9),
    cat.OLT: (20.0, 128e9, 0.9),
    cat.AGG_SWITCH: (1766.0, 256e9, 0.9),
    cat.PROCESSING_SERVER: (3.96, None, 0.54),
    cat.CLOUD_SWITCH: (2020.0, 320e9, 0.9),
    cat.CLOUD_STORAGE: (4900.0, None, 0.9),
    cat.CORE_ROUTER: (12300.0, 4480e9, 0.9),
    cat.CONTENT_SERVER: (380.8, 1.8e9, 0.9),
    cat.AGG_ROUTER: (4550.0, 560e9, 0.9),
}

unit = st.floats(min_value=0.0, max_value=1.0)


@pytest.mark.parametrize("name", sorted(TABLE))
def test_default_entries(name):
    spec = default_catalog()[name]
    p_max, cap, idle = TABLE[name]
    assert spec.p_max == p_max
    assert spec.capacity == cap
    assert spec.idle_fraction == idle


def test_storage_volume_and_sharing():
    c = default_catalog()
    assert c[cat.CLOUD_STORAGE].storage_bits == 75.6e12 * 8
    assert c[cat.PROCESSING_SERVER].sharing is Sharing.DEDICATED_SERVER
    assert c.hc_share == 0.003


def test_default_catalog_is_valid():
    assert not validate_catalog(default_catalog())


@pytest.mark.parametrize("name", sorted(TABLE))
def test_full_share_at_full_load_is_p_max(name):
    spec = default_catalog()[name]
    assert attributable_power(spec, 1.0, 1.0) == spec.p_max


def test_shared_network_idle_share():
    spec = default_catalog()[cat.OLT]
    assert attributable_power(spec, 0.0, 0.003) == pytest.approx(0.003 * 0.9 * 20.0, rel=1e-15)


def test_dedicated_server_idle_is_54_percent():
    spec = default_catalog()[cat.PROCESSING_SERVER]
    assert attributable_power(spec, 0.0, 1.0) == pytest.approx(0.54 * 3.96, rel=1e-15)


@given(unit, unit, st.sampled_from(sorted(TABLE)))
def test_affine_in_utilization(u, share, name):
    spec = default_catalog()[name]
    p0 = attributable_power(spec, 0.0, share)
    p1 = attributable_power(spec, 1.0, share)
    assert attributable_power(spec, u, share) == pytest.approx(p0 + u * (p1 - p0), rel=1e-12,
                                                               abs=1e-12)


@given(unit, unit, st.sampled_from(sorted(TABLE)))
def test_bounded_by_p_max(u, share, name):
    spec = default_catalog()[name]
    assert 0.0 <= attributable_power(spec, u, share) <= spec.p_max * (1 + 1e-12)


@pytest.mark.parametrize("u, share", [(-0.01, 1.0), (1.01, 1.0), (0.5, -0.1), (0.5, 1.5)])
def test_out_of_domain(u, share):
    with pytest.raises(DomainError):
        attributable_power(default_catalog()[cat.OLT], u, share)


def test_validation_flags_bad_entries():
    c = default_catalog().with_overrides({cat.ONT: {"p_max": -1.0}, cat.OLT: {"idle_fraction": 1.5}})
    assert validate_catalog(c).names() >= {cat.ONT, cat.OLT}


def test_validation_flags_missing_class():
    entries = dict(default_catalog().entries)
    del entries[cat.CORE_ROUTER]
    assert cat.CORE_ROUTER in validate_catalog(DeviceCatalog(entries)).names()


def test_overrides_and_unknown_class():
    c = default_catalog().with_overrides({cat.OLT: {"p_max": 40.0}}, hc_share=0.01)
    assert c[cat.OLT].p_max == 40.0 and c[cat.OLT].capacity == 128e9
    assert c.hc_share == 0.01
    assert default_catalog()[cat.OLT].p_max == 20.0
    with pytest.raises(KeyError):
        default_catalog().with_overrides({"toaster": {"p_max": 1.0}})


@given(st.floats(min_value=0.01, max_value=100.0))
def test_scaled(k):
    base, scaled = default_catalog(), default_catalog().scaled(k)
    for name in TABLE:
        assert scaled[name].p_max == base[name].p_max * k
