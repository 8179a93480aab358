import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from fogplace import Mode, Optimality, PlacementSolution, evaluate, make_instance
from fogplace.catalog import default_catalog
from fogplace.placement import check_feasibility, export_lp, formulate, solve
from fogplace.placement.flow import FlowNetwork
from fogplace.topology import GponParams

from conftest import default_instance, default_solution


def small(n_aps, n, pm, **gpon):
    return make_instance(pm, gpon=GponParams(n_aps=n_aps, n_patients=n, **gpon))


def run(inst, mode):
    return solve(formulate(inst.topology, inst.scenario, mode, inst.catalog, inst.options))


def test_model_structure():
    inst = default_instance(100)
    m = formulate(inst.topology, inst.scenario, Mode.SFA, inst.catalog, inst.options)
    ys = [v for v in m.variables if v.startswith("y_")]
    xs = [v for v in m.variables if v.startswith("x_")]
    assert len(ys) == 33
    assert len(xs) == 32 * 33
    assert all(v.cost >= 0 for v in m.variables.values())
    for row in m.constraints:
        assert set(row.coefs) <= set(m.variables)
    assert m.variables["y_OLT"].ub == 1
    mfa = formulate(inst.topology, inst.scenario, Mode.MFA, inst.catalog, inst.options)
    assert mfa.variables["y_OLT"].ub >= 2
    assert mfa.variables["y_ONT_0"].ub == 1


def test_ca_model_is_empty():
    inst = default_instance(50)
    m = formulate(inst.topology, inst.scenario, Mode.CA, inst.catalog, inst.options)
    assert not m.variables
    sol = solve(m)
    assert sol.cloud_servers == 4 and sol.servers_total == 0


def test_lp_export_sections():
    inst = small(2, 5, 3)
    text = export_lp(formulate(inst.topology, inst.scenario, Mode.SFA, inst.catalog, inst.options))
    order = [text.index(s) for s in ("Minimize", "Subject To", "Bounds", "Generals", "End")]
    assert order == sorted(order)
    assert all(len(line) <= 255 for line in text.splitlines())


@pytest.mark.parametrize("pm, mode, expected", [
    (50, Mode.SFA, (("OLT", 1), ("ONT_0", 1), ("ONT_1", 1), ("ONT_2", 1))),
    (50, Mode.MFA, (("OLT", 4),)),
    (100, Mode.SFA, (("OLT", 1), ("ONT_0", 1), ("ONT_1", 1))),
    (100, Mode.MFA, (("OLT", 2),)),
    (150, Mode.SFA, (("OLT", 1), ("ONT_0", 1))),
    (150, Mode.MFA, (("OLT", 2),)),
    (200, Mode.SFA, (("OLT", 1),)),
    (200, Mode.MFA, (("OLT", 1),)),
])
def test_default_placements(pm, mode, expected):
    sol = default_solution(pm, mode)
    assert sol.optimality is Optimality.PROVED_OPTIMAL
    assert sol.placement_key() == expected


@pytest.mark.parametrize("pm", [50, 100, 150, 200])
@pytest.mark.parametrize("mode", [Mode.SFA, Mode.MFA])
def test_solution_consistency(pm, mode):
    inst = default_instance(pm)
    sol = default_solution(pm, mode)
    m = formulate(inst.topology, inst.scenario, mode, inst.catalog, inst.options)
    assert check_feasibility(inst.topology, inst.scenario, sol, inst.catalog) == []
    assert m.violated_rows(sol) == []
    assert m.objective_of(sol) == pytest.approx(sol.objective_j, rel=1e-9)
    assert evaluate(inst.topology, inst.scenario, sol, inst.catalog).total_j == pytest.approx(
        sol.objective_j, rel=1e-12)


def test_not_enough_sites_is_infeasible():
    sol = run(small(2, 4, 1), Mode.SFA)
    assert sol.optimality is Optimality.INFEASIBLE
    assert sol.infeasible_reason
    assert run(small(2, 4, 1), Mode.MFA).optimality is Optimality.PROVED_OPTIMAL


def test_saturated_access_link_is_infeasible():
    # 120 raw streams exceed the 900 kbps healthcare share of one AP link
    sol = run(small(1, 120, 120), Mode.MFA)
    assert sol.optimality is Optimality.INFEASIBLE
    assert sol.infeasible_reason


def test_feasibility_checker_reports_violations():
    inst = small(2, 6, 2)
    t = inst.topology
    over = PlacementSolution(Mode.SFA, 2, {t.olt: 1},
                             {(a, t.olt): p for a, p in t.patients_per_ap.items()})
    names = {v.constraint for v in check_feasibility(t, inst.scenario, over, inst.catalog)}
    assert names
    two_at_olt = PlacementSolution(Mode.SFA, 3, {t.olt: 2},
                                   {(a, t.olt): p for a, p in t.patients_per_ap.items()})
    assert check_feasibility(t, inst.scenario, two_at_olt, inst.catalog)


def test_min_cost_flow_small():
    net = FlowNetwork()
    a = net.add_arc("s", "a", 2, 1.0)
    b = net.add_arc("s", "b", 2, 3.0)
    net.add_arc("a", "t", 1, 1.0)
    net.add_arc("a", "b", 1, 0.5)
    net.add_arc("b", "t", 3, 1.0)
    flow, cost = net.min_cost_flow("s", "t", 3)
    assert flow == 3
    # s-a-t (2), s-a-b-t (2.5), s-b-t (4)
    assert cost == pytest.approx(8.5)
    assert net.flow_on(a) == 2 and net.flow_on(b) == 1


def brute_force(inst, mode):
    """Best objective over every integral assignment of a tiny instance."""
    t = inst.topology
    sites = t.candidate_sites
    pm = inst.scenario.pat_max
    best = math.inf
    per_ap = [[c for c in itertools.product(range(int(t.patients_per_ap[a]) + 1), repeat=len(sites))
               if sum(c) == t.patients_per_ap[a]] for a in t.aps]
    for combo in itertools.product(*per_ap):
        assignment = {(a, s): n for a, row in zip(t.aps, combo) for s, n in zip(sites, row) if n}
        loads = {s: sum(row[i] for row in combo) for i, s in enumerate(sites)}
        servers = {s: math.ceil(n / pm) for s, n in loads.items() if n}
        sol = PlacementSolution(mode, pm, servers, assignment)
        if check_feasibility(t, inst.scenario, sol, inst.catalog):
            continue
        best = min(best, evaluate(t, inst.scenario, sol, inst.catalog).total_j)
    return best


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.integers(1, 5), st.integers(1, 4), st.sampled_from([Mode.SFA, Mode.MFA]),
       st.sampled_from([None, 0.0, 9_000.0, 20_000.0]))
def test_matches_assignment_enumeration(n_aps, n, pm, mode, down):
    inst = small(n_aps, n, pm, downstream_hc_override=down)
    sol = run(inst, mode)
    ref = brute_force(inst, mode)
    if math.isinf(ref):
        assert sol.optimality is Optimality.INFEASIBLE
    else:
        assert sol.objective_j == pytest.approx(ref, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 40), st.integers(1, 30),
       st.sampled_from([None, 0.0, 30_000.0, 90_000.0]))
def test_structural_invariants(n_aps, n, pm, down):
    inst = small(n_aps, n, pm, downstream_hc_override=down)
    sfa, mfa = run(inst, Mode.SFA), run(inst, Mode.MFA)
    for sol in (sfa, mfa):
        if sol.optimality is Optimality.INFEASIBLE:
            continue
        assert check_feasibility(inst.topology, inst.scenario, sol, inst.catalog) == []
        assert sol.servers_total >= math.ceil(n / pm)
    if sfa.optimality is not Optimality.INFEASIBLE:
        assert mfa.optimality is not Optimality.INFEASIBLE
        assert mfa.objective_j <= sfa.objective_j * (1 + 1e-12)


def test_fractional_patients():
    inst = small(3, 10, 4, fractional_patients=True)
    sol = run(inst, Mode.MFA)
    assert sol.optimality is Optimality.PROVED_OPTIMAL
    assert check_feasibility(inst.topology, inst.scenario, sol, inst.catalog) == []


def test_solution_json():
    d = default_solution(100, Mode.MFA).to_json_dict()
    assert set(d) == {"mode", "pat_max", "servers_per_site", "assignment", "objective_j",
                      "optimality", "cloud_servers"}
    assert d["servers_per_site"] == {"OLT": 2}


def test_single_ont_cannot_take_s2_remote_load():
    inst = default_instance(100)
    t = inst.topology
    assign = {("AP_0", "ONT_0"): 7}
    left = 93
    for ap in t.aps[1:]:
        p = t.patients_per_ap[ap]
        take = min(p, left)
        if take:
            assign[(ap, "ONT_0")] = take
            left -= take
        if p - take:
            assign[(ap, t.olt)] = p - take
    sol = PlacementSolution(Mode.SFA, 100, {"ONT_0": 1, t.olt: 1}, assign)
    v = check_feasibility(t, inst.scenario, sol, inst.catalog)
    down = [x for x in v if "OLT" in str(x.entity) and "ONT_0" in str(x.entity)]
    assert down and all(x.slack < 0 for x in down)


def test_incomplete_assignment_names_ap():
    inst = default_instance(200)
    t = inst.topology
    assign = {(a, t.olt): p for a, p in t.patients_per_ap.items()}
    assign[("AP_5", t.olt)] -= 1
    sol = PlacementSolution(Mode.SFA, 200, {t.olt: 1}, assign)
    v = check_feasibility(t, inst.scenario, sol, inst.catalog)
    assert any(x.entity == "AP_5" for x in v)


def test_lp_declares_every_variable():
    inst = default_instance(50)
    m = formulate(inst.topology, inst.scenario, Mode.SFA, inst.catalog, inst.options)
    text = export_lp(m)
    assert text.count("Minimize") == 1
    tokens = set(text.split())
    assert all(v in tokens for v in m.variables)
    generals = text.split("Generals", 1)[1].split("Binaries", 1)[0].split()
    assert sum(1 for g in generals if g.startswith("y_")) == 33


def test_model_objective_of_all_at_olt():
    inst = default_instance(200)
    t = inst.topology
    sol = PlacementSolution(Mode.MFA, 200, {t.olt: 1},
                            {(a, t.olt): p for a, p in t.patients_per_ap.items()})
    m = formulate(t, inst.scenario, Mode.MFA, inst.catalog, inst.options)
    assert m.objective_of(sol) == pytest.approx(
        evaluate(t, inst.scenario, sol, inst.catalog).total_j, rel=1e-12)
