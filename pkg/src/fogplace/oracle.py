"""Brute-force reference optimiser used to verify the placement solver.

Enumerates symmetry-reduced configurations (servers and per-server loads,
ONTs interchangeable within classes), expands each greedily to a concrete
assignment, and scores it with :func:`fogplace.energy.evaluate`. Shares no
code with the solver beyond the energy model and the feasibility checker.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from . import catalog as cat
from .catalog import DeviceCatalog
from .energy import (EnergyOptions, Phase, PhaseFlow, ca_placement, evaluate, idle_scope,
                     phase_duration, phase_energy, processing_energy, server_idle_window)
from .instance import Instance, make_instance
from .placement.feasibility import check_feasibility, link_loads
from .scenario import Scenario
from .solution import Mode, Optimality, PlacementSolution
from .topology import GponParams, Topology, link_hc_capacity, route

DEFAULT_BUDGET = (40, 250)  # candidate sites, patients
TIE_RTOL = 1e-12


class OracleRefusal(RuntimeError):
    pass


@dataclass(frozen=True)
class SymmetricConfig:
    k_olt: int
    olt_load: int
    # (class index, load) for each ONT server, loads non-increasing within a class
    ont_loads: tuple[tuple[int, int], ...]


def _ont_classes(topo: Topology, catalog: DeviceCatalog) -> list[list[str]]:
    ap_of = {o: a for a, o in topo.home_ont.items()}
    groups: dict[tuple, list[str]] = {}
    for ont in topo.onts:
        ap = ap_of[ont]
        sig = (
            topo.patients_per_ap[ap],
            topo.device_class(ap),
            topo.device_class(ont),
            link_hc_capacity(topo.link(ap, ont), catalog),
            link_hc_capacity(topo.link(ont, topo.olt), catalog),
            link_hc_capacity(topo.link(topo.olt, ont), catalog),
        )
        groups.setdefault(sig, []).append(ont)
    return list(groups.values())


def _nonincreasing(m: int, hi: int, lo: int = 1) -> Iterator[tuple[int, ...]]:
    if m == 0:
        yield ()
        return
    for first in range(hi, lo - 1, -1):
        for rest in _nonincreasing(m - 1, first, lo):
            yield (first,) + rest


def _class_splits(sizes: Sequence[int], total: int) -> Iterator[tuple[int, ...]]:
    if not sizes:
        if total == 0:
            yield ()
        return
    for m in range(0, min(sizes[0], total) + 1):
        for rest in _class_splits(sizes[1:], total - m):
            yield (m,) + rest


def _expand(topo: Topology, cfg: SymmetricConfig, classes: list[list[str]],
            mode: Mode, pat_max: int) -> PlacementSolution:
    servers = {s: 0 for s in topo.candidate_sites}
    servers[topo.olt] = cfg.k_olt
    used = [0] * len(classes)
    need: dict[str, int] = {}
    for ci, load in cfg.ont_loads:
        ont = classes[ci][used[ci]]
        used[ci] += 1
        servers[ont] = 1
        need[ont] = load
    remaining = {a: int(p) for a, p in topo.patients_per_ap.items()}
    ap_of = {o: a for a, o in topo.home_ont.items()}
    assignment: dict[tuple[str, str], int] = {}

    def give(ap: str, site: str, n: int) -> None:
        if n > 0:
            assignment[(ap, site)] = assignment.get((ap, site), 0) + n
            remaining[ap] -= n

    # home patients first
    for ont in sorted(need, key=topo.candidate_sites.index):
        h = min(need[ont], remaining[ap_of[ont]])
        give(ap_of[ont], ont, h)
        need[ont] -= h
    # then nearest: the OLT is two hops from every AP, a foreign ONT three
    dests = [(topo.olt, cfg.olt_load)] + [(o, need[o]) for o in
                                         sorted(need, key=topo.candidate_sites.index)]
    for site, want in dests:
        for ap in topo.aps:
            if want <= 0:
                break
            take = min(remaining[ap], want)
            give(ap, site, take)
            want -= take
    return PlacementSolution(mode, pat_max, servers, dict(sorted(assignment.items())))


def _network_floor(topo: Topology, sc: Scenario, catalog: DeviceCatalog,
                   options: EnergyOptions) -> float:
    """Network joules every fog placement pays: home access hops and the cloud chain."""
    raw = [PhaseFlow(route(topo, a, topo.home_ont[a]), sc.rates.r_ps, p, sc.timing.t_t,
                     Phase.RAW_UPLOAD) for a, p in topo.patients_per_ap.items() if p > 0]
    an = [PhaseFlow(route(topo, topo.olt, topo.storage), sc.rates.r_cloud, topo.n_patients,
                    sc.timing.t_cloud, Phase.ANALYSED_UPLOAD)]
    total = 0.0
    for phase, flows in ((Phase.RAW_UPLOAD, raw), (Phase.ANALYSED_UPLOAD, an)):
        if options.activation:
            total += sum(phase_energy(flows, topo, catalog).values())
        else:
            total += sum(phase_energy(flows, topo, catalog, idle_scope(topo, phase),
                                      phase_duration(sc, phase)).values())
    return total


def _tie_key(topo: Topology, sol: PlacementSolution) -> tuple:
    idx = {s: i for i, s in enumerate(topo.candidate_sites)}
    onts = tuple(sorted(idx[s] for s, k in sol.servers_per_site.items() if k and s != topo.olt))
    return (sol.servers_total, -sol.servers_per_site.get(topo.olt, 0), onts)


def enumerate_optimal(topology: Topology, scenario: Scenario, mode: Mode,
                      catalog: DeviceCatalog, options: EnergyOptions = EnergyOptions(),
                      budget: tuple[int, int] = DEFAULT_BUDGET) -> PlacementSolution:
    topo, sc = topology, scenario
    pm = sc.pat_max
    if any(not float(p).is_integer() for p in topo.patients_per_ap.values()):
        raise OracleRefusal("fractional patient groups are outside the oracle's scope")
    n = int(topo.n_patients)
    if len(topo.candidate_sites) > budget[0] or n > budget[1]:
        raise OracleRefusal(
            f"instance of {len(topo.candidate_sites)} sites x {n} patients exceeds budget {budget}")
    if mode is Mode.CA:
        sol = ca_placement(topo, pm)
        sol.objective_j = evaluate(topo, sc, sol, catalog, options).total_j
        return sol
    if n == 0:
        return PlacementSolution(mode, pm, {}, {}, 0.0, Optimality.PROVED_OPTIMAL)

    classes = _ont_classes(topo, catalog)
    sizes = [len(c) for c in classes]
    olt_cap = 1 if mode is Mode.SFA else n
    server = catalog[cat.PROCESSING_SERVER]
    window = server_idle_window(sc, options)
    per_server = processing_energy(server, 0, sc.params.unit_pa_time, window)
    busy = processing_energy(server, n, sc.params.unit_pa_time, n * sc.params.unit_pa_time,
                             idle_share=0.0)
    floor = _network_floor(topo, sc, catalog, options) + busy

    found: list[tuple[float, tuple, PlacementSolution]] = []
    best = math.inf
    for k in range(math.ceil(n / pm), n + 1):
        if floor + k * per_server > best * (1 + 1e-9) + 1e-12:
            break
        for k_olt in range(min(k, olt_cap), -1, -1):
            n_ont = k - k_olt
            if n_ont > sum(sizes):
                continue
            for split in _class_splits(sizes, n_ont):
                for cfg in _configs_for(split, k_olt, n, pm):
                    sol = _expand(topo, cfg, classes, mode, pm)
                    if check_feasibility(topo, sc, sol, catalog):
                        continue
                    e = evaluate(topo, sc, sol, catalog, options).total_j
                    found.append((e, _tie_key(topo, sol), sol))
                    best = min(best, e)
    if not found:
        return PlacementSolution(mode, pm, {}, {}, math.nan, Optimality.INFEASIBLE,
                                 infeasible_reason="no feasible configuration")
    top = min(f[0] for f in found)
    e, _, sol = min((f for f in found if f[0] <= top + TIE_RTOL * abs(top)), key=lambda f: f[1])
    sol.objective_j = e
    sol.optimality = Optimality.PROVED_OPTIMAL
    sol.link_loads = link_loads(topo, sc, sol)
    return sol


def _configs_for(split: tuple[int, ...], k_olt: int, n: int, pm: int) -> Iterator[SymmetricConfig]:
    """All load patterns for the given servers-per-class split."""

    def rec(ci: int, acc: tuple[tuple[int, int], ...], used: int):
        if ci == len(split):
            olt_load = n - used
            lo = pm * (k_olt - 1) + 1 if k_olt else 0
            if lo <= olt_load <= pm * k_olt:
                yield SymmetricConfig(k_olt, olt_load, acc)
            return
        m = split[ci]
        hi = min(pm, n - used)
        for loads in _nonincreasing(m, hi):
            s = sum(loads)
            if used + s > n:
                continue
            yield from rec(ci + 1, acc + tuple((ci, l) for l in loads), used + s)

    yield from rec(0, (), 0)


# -- equivalence harness ---------------------------------------------------

@dataclass(frozen=True)
class OracleCase:
    instance: Instance
    mode: Mode
    label: str = ""


@dataclass
class CaseResult:
    label: str
    passed: bool
    solver_objective: float
    oracle_objective: float
    solver_placement: tuple
    oracle_placement: tuple
    note: str = ""


@dataclass
class EquivalenceReport:
    results: list[CaseResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def first_failure(self) -> int | None:
        for i, r in enumerate(self.results):
            if not r.passed:
                return i
        return None

    def __len__(self) -> int:
        return len(self.results)


def _same(a: float, b: float, rtol: float) -> bool:
    if math.isnan(a) and math.isnan(b):
        return True
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def equivalence_check(cases: Iterable[OracleCase],
                      solver: Callable[[Instance, Mode], PlacementSolution] | None = None,
                      rtol: float = 1e-9) -> EquivalenceReport:
    if solver is None:
        from .placement import formulate, solve

        def solver(inst: Instance, mode: Mode) -> PlacementSolution:
            return solve(formulate(inst.topology, inst.scenario, mode, inst.catalog, inst.options))

    report = EquivalenceReport()
    for i, case in enumerate(cases):
        inst = case.instance
        got = solver(inst, case.mode)
        ref = enumerate_optimal(inst.topology, inst.scenario, case.mode, inst.catalog, inst.options)
        ok_status = got.optimality == ref.optimality
        ok_obj = _same(got.objective_j, ref.objective_j, rtol)
        ok_place = got.placement_key() == ref.placement_key()
        note = "" if ok_status else f"status {got.optimality.value} vs {ref.optimality.value}"
        report.results.append(CaseResult(
            case.label or f"case{i}", ok_status and ok_obj and ok_place,
            got.objective_j, ref.objective_j, got.placement_key(), ref.placement_key(), note))
    return report


def random_cases(seed: int, count: int, max_aps: int = 4, max_patients: int = 20) -> list[OracleCase]:
    """Small randomized instances; ONT links get random healthcare capacities."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n_aps = rng.randint(1, max_aps)
        n = rng.randint(1, max_patients)
        # mostly small capacities so several servers are needed
        pm = rng.randint(1, max(1, (n + 1) // 2)) if rng.random() < 0.7 else rng.randint(1, n + 2)
        mode = rng.choice([Mode.SFA, Mode.MFA])
        down = rng.choice([None, rng.uniform(0, 12) * 8_300.0])
        up = rng.choice([None, None, rng.uniform(0.5, 12) * 8_300.0])
        gpon = GponParams(n_aps=n_aps, n_patients=n, downstream_hc_override=down,
                          upstream_hc_override=up)
        inst = make_instance(pm, gpon=gpon)
        out.append(OracleCase(inst, mode, f"seed{seed}-{i}:aps={n_aps},n={n},pm={pm},{mode.value}"))
    return out


__all__ = [
    "DEFAULT_BUDGET",
    "EquivalenceReport",
    "OracleCase",
    "OracleRefusal",
    "SymmetricConfig",
    "enumerate_optimal",
    "equivalence_check",
    "random_cases",
]
