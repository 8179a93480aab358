import pytest
from hypothesis import given, strategies as st

from fogplace import catalog as cat
from fogplace.catalog import default_catalog
from fogplace.topology import (DEFAULT_CHAIN, GponParams, TopologyError, build_gpon,
                               dump_topology_csv, link_hc_capacity, route, uplink_hc_share)


@pytest.fixture(scope="module")
def topo():
    return build_gpon(GponParams(), default_catalog())


def test_default_shape(topo):
    assert len(topo.aps) == 32
    assert len(topo.onts) == 32
    assert len(topo.candidate_sites) == 33
    assert topo.candidate_sites[-1] == topo.olt
    assert topo.chain and len(topo.chain) == len(DEFAULT_CHAIN)
    counts = sorted(topo.patients_per_ap.values())
    assert counts.count(7) == 8 and counts.count(6) == 24


def test_routes(topo):
    assert route(topo, "AP_0", "ONT_0").nodes == ("AP_0", "ONT_0")
    assert route(topo, "AP_0", topo.olt).nodes == ("AP_0", "ONT_0", topo.olt)
    assert route(topo, "AP_3", "ONT_5").nodes == ("AP_3", "ONT_3", topo.olt, "ONT_5")
    up = route(topo, "ONT_2", topo.storage)
    assert up.nodes[:2] == ("ONT_2", topo.olt)
    assert up.nodes[2:-1] == topo.chain
    assert up.nodes[-1] == topo.storage


def test_healthcare_capacities(topo):
    c = default_catalog()
    assert link_hc_capacity(topo.link("ONT_0", topo.olt), c) == pytest.approx(234_375.0)
    assert link_hc_capacity(topo.link(topo.olt, "ONT_0"), c) == 468_750.0
    assert link_hc_capacity(topo.link("AP_0", "ONT_0"), c) == pytest.approx(900_000.0)
    assert uplink_hc_share(topo, c) == pytest.approx(234_375.0, rel=1e-12)


def test_upstream_override_sets_share():
    c = default_catalog()
    t = build_gpon(GponParams(upstream_hc_override=100_000.0), c)
    assert uplink_hc_share(t, c) == 100_000.0


def test_dump_columns(topo):
    lines = dump_topology_csv(topo, default_catalog()).splitlines()
    assert lines[0] == "from,to,capacity_bps,hc_capacity_bps"
    assert len(lines) - 1 == len(topo.links)


@pytest.mark.parametrize("params", [
    GponParams(n_aps=0),
    GponParams(n_patients=-1),
    GponParams(metro_core_hops=()),
    GponParams(gpon_trunk_capacity=0.0),
    GponParams(metro_core_hops=(cat.PROCESSING_SERVER, cat.CLOUD_SWITCH)),
    GponParams(downstream_hc_override=1e12),
])
def test_rejects_bad_params(params):
    with pytest.raises(TopologyError):
        build_gpon(params, default_catalog())


@given(st.integers(1, 40), st.integers(0, 300))
def test_patients_spread_evenly(n_aps, n):
    t = build_gpon(GponParams(n_aps=n_aps, n_patients=n), default_catalog())
    counts = [t.patients_per_ap[a] for a in t.aps]
    assert sum(counts) == n
    assert max(counts) - min(counts) <= 1
    # the extra patients go to the lowest-numbered APs
    assert counts == sorted(counts, reverse=True)


@given(st.integers(1, 8), st.data())
def test_routes_are_contiguous_and_symmetric(n_aps, data):
    t = build_gpon(GponParams(n_aps=n_aps, n_patients=10), default_catalog())
    nodes = sorted(t.nodes)
    a = data.draw(st.sampled_from(nodes))
    b = data.draw(st.sampled_from(nodes))
    p = route(t, a, b)
    assert p.nodes[0] == a and p.nodes[-1] == b
    assert len(p.links) == len(p.nodes) - 1
    for link, u, v in zip(p.links, p.nodes, p.nodes[1:]):
        assert (link.src, link.dst) == (u, v)
    assert route(t, b, a).nodes == tuple(reversed(p.nodes))
    assert len(set(p.nodes)) == len(p.nodes)
