"""Exact solver for the placement MILP.

Server counts are enumerated in canonical form (ONT sites with identical
signatures are interchangeable, so only the lowest-id members of each class
ever host servers), in order of increasing total count with a lower-bound
cut. For a fixed server vector the remaining assignment problem is a
network flow on the access tree: its LP relaxation is integral, so the
min-cost flow is the exact assignment optimum. Activation costs that depend
on the assignment are handled by case split (OLT raw-upload activation) or
charged as fixed costs of opened ONT sites (a server without patients is
always dominated by the same vector without it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..energy import Phase, ca_placement, evaluate
from ..solution import Mode, Optimality, PlacementSolution
from ..topology import link_hc_capacity, route
from .feasibility import link_loads
from .flow import INF, FlowNetwork
from .model import MilpModel, site_cap

TIE_RTOL = 1e-12
PRUNE_RTOL = 1e-9


class SolverInvariantError(RuntimeError):
    pass


def units(cap: float, rate: float, integral: bool) -> float:
    """Largest patient count whose aggregate rate fits in ``cap``."""
    if rate <= 0:
        return INF
    if integral:
        return float(math.floor(cap * (1 + 1e-12) / rate))
    return cap / rate


@dataclass
class _Candidate:
    flow_cost: float
    key: tuple
    servers: dict[str, int]
    assignment: dict[tuple[str, str], float]
    objective: float = float("nan")


class _Instance:
    """Pre-computed arc data for one model."""

    def __init__(self, model: MilpModel):
        self.model = model
        topo, sc, catalog = model.topology, model.scenario, model.catalog
        self.topo = topo
        self.costs = model.costs
        self.pm = sc.pat_max
        r = sc.rates
        self.n = topo.n_patients
        self.integral = all(float(p).is_integer() for p in topo.patients_per_ap.values())
        self.sites = topo.candidate_sites
        self.onts = topo.onts
        self.olt = topo.olt
        self.ap_of = {topo.home_ont[a]: a for a in topo.aps}
        hc = lambda u, v: link_hc_capacity(topo.link(u, v), catalog)  # noqa: E731

        self.reasons: list[str] = []
        for a in topo.aps:
            ont = topo.home_ont[a]
            if topo.patients_per_ap[a] > units(hc(a, ont), r.r_ps, self.integral):
                self.reasons.append(f"link {a}->{ont} RawUpload")
        chain_route = route(topo, self.olt, topo.storage)
        for ln in chain_route.links:
            if self.n > units(hc(ln.src, ln.dst), r.r_cloud, self.integral):
                self.reasons.append(f"link {ln.src}->{ln.dst} AnalysedUpload")

        self.up_raw = {a: units(hc(topo.home_ont[a], self.olt), r.r_ps, self.integral)
                       for a in topo.aps}
        self.down_raw = {s: units(hc(self.olt, s), r.r_ps, self.integral) for s in self.onts}
        self.up_an = {s: units(hc(s, self.olt), r.r_cloud, self.integral) for s in self.onts}
        self.up_an[self.olt] = INF

        c = self.costs
        self.base = {a: c.raw_prop[a] + c.raw_prop[topo.home_ont[a]] for a in topo.aps}
        self.site_cost = {
            s: sum(c.analysed_prop[x] for x in route(topo, s, topo.storage).nodes) + c.busy_j
            for s in self.sites
        }
        self.cap = {s: site_cap(model.mode, topo, s) for s in self.sites}
        self.olt_max = min(self.cap[self.olt], max(1, math.ceil(self.n / self.pm - 1e-12)))

        act = model.options.activation
        z = c.idle_j
        if act:
            const = 0.0
            for a in topo.aps:
                if topo.patients_per_ap[a] > 0:
                    const += z[(a, Phase.RAW_UPLOAD)] + z[(topo.home_ont[a], Phase.RAW_UPLOAD)]
            if self.n > 0:
                for x in chain_route.nodes:
                    const += z[(x, Phase.ANALYSED_UPLOAD)]
            self.const = const
            self.open_cost = {}
            for s in self.onts:
                oc = z[(s, Phase.ANALYSED_UPLOAD)]
                if topo.patients_per_ap[self.ap_of[s]] <= 0:
                    oc += z[(s, Phase.RAW_UPLOAD)]
                self.open_cost[s] = oc
            self.olt_raw = z[(self.olt, Phase.RAW_UPLOAD)]
        else:
            self.const = model.constant_j
            self.open_cost = {s: 0.0 for s in self.onts}
            self.olt_raw = 0.0

        self.flow_lb = (sum(self.base[a] * p for a, p in topo.patients_per_ap.items())
                        + self.n * min(self.site_cost.values()))

    # -- classes -------------------------------------------------------
    def ont_classes(self) -> list[list[str]]:
        c = self.costs
        groups: dict[tuple, list[str]] = {}
        for s in self.onts:
            a = self.ap_of[s]
            sig = (self.topo.patients_per_ap[a], self.up_raw[a], self.down_raw[s],
                   self.up_an[s], self.base[a], c.raw_prop[s], self.site_cost[s],
                   self.open_cost[s])
            groups.setdefault(sig, []).append(s)
        order = {s: i for i, s in enumerate(self.sites)}
        return sorted(groups.values(), key=lambda g: order[g[0]])

    # -- leaf ----------------------------------------------------------
    def leaf(self, servers: dict[str, int], allow_remote: bool):
        topo = self.topo
        net = FlowNetwork()
        src_arcs = {}
        for a in topo.aps:
            p = topo.patients_per_ap[a]
            if p <= 0:
                continue
            net.add_arc("SRC", a, p, self.base[a])
            home = topo.home_ont[a]
            if servers.get(home, 0):
                src_arcs[(a, home)] = net.add_arc(a, f"site:{home}", INF, 0.0)
            if allow_remote:
                src_arcs[(a, "OUT")] = net.add_arc(a, f"out:{a}", self.up_raw[a], 0.0)
                net.add_arc(f"out:{a}", "HUB", INF, self.costs.raw_prop[self.olt])
        dest = {}
        if allow_remote:
            if servers.get(self.olt, 0):
                dest[self.olt] = net.add_arc("HUB", f"site:{self.olt}", INF, 0.0)
            for s in self.onts:
                if servers.get(s, 0):
                    dest[s] = net.add_arc("HUB", f"site:{s}", self.down_raw[s],
                                          self.costs.raw_prop[s])
        for s, k in servers.items():
            if k:
                net.add_arc(f"site:{s}", "SINK", min(self.pm * k, self.up_an[s]),
                            self.site_cost[s])
        if "SRC" not in net.index:
            return 0.0, {}
        flow, cost = net.min_cost_flow("SRC", "SINK", self.n)
        if flow < self.n - 1e-9:
            return None
        assignment: dict[tuple[str, str], float] = {}
        for (a, tag), h in src_arcs.items():
            if tag != "OUT":
                f = net.flow_on(h)
                if f > 1e-12:
                    assignment[(a, tag)] = f
        # split the pooled remote flow: APs in order fill destinations in site order
        supply = [[a, net.flow_on(h)] for (a, tag), h in src_arcs.items() if tag == "OUT"]
        order = [self.olt] + [s for s in self.onts if s in dest]
        demand = [[s, net.flow_on(dest[s])] for s in order if s in dest]
        i = j = 0
        while i < len(supply) and j < len(demand):
            take = min(supply[i][1], demand[j][1])
            if take > 1e-12:
                key = (supply[i][0], demand[j][0])
                assignment[key] = assignment.get(key, 0.0) + take
            supply[i][1] -= take
            demand[j][1] -= take
            if supply[i][1] <= 1e-12:
                i += 1
            if demand[j][1] <= 1e-12:
                j += 1
        if self.integral:
            assignment = {k: int(round(v)) for k, v in assignment.items()}
        return cost, assignment

    def config_cost(self, servers: dict[str, int]):
        k = sum(servers.values())
        fixed = (self.const + k * self.costs.server_idle_j
                 + sum(self.open_cost[s] for s, v in servers.items() if v and s != self.olt))
        best = None
        for allow_remote, extra in ((False, 0.0), (True, self.olt_raw)):
            res = self.leaf(servers, allow_remote)
            if res is None:
                continue
            cost, assignment = res
            total = fixed + extra + cost
            if best is None or total < best[0] - TIE_RTOL * abs(total):
                best = (total, assignment)
        return best

    def key(self, servers: dict[str, int]) -> tuple:
        order = {s: i for i, s in enumerate(self.sites)}
        onts = tuple(sorted(order[s] for s, v in servers.items() if v and s != self.olt))
        return (sum(servers.values()), -servers.get(self.olt, 0), onts)


def _configs(classes: list[list[str]], olt_max: int, k: int):
    """Canonical server vectors with exactly ``k`` servers."""
    sizes = [len(c) for c in classes]
    for k_olt in range(min(olt_max, k), -1, -1):
        rest = k - k_olt
        if rest > sum(sizes):
            continue
        for counts in _compositions(rest, sizes):
            yield k_olt, counts


def _compositions(total: int, sizes: list[int]):
    if not sizes:
        if total == 0:
            yield ()
        return
    head, tail = sizes[0], sizes[1:]
    room = sum(tail)
    for m in range(min(head, total), max(0, total - room) - 1, -1):
        for rest in _compositions(total - m, tail):
            yield (m,) + rest


def solve(model: MilpModel) -> PlacementSolution:
    topo, sc, catalog = model.topology, model.scenario, model.catalog
    pm = sc.pat_max
    if model.mode is Mode.CA:
        sol = ca_placement(topo, pm)
        sol.objective_j = evaluate(topo, sc, sol, catalog, model.options).total_j
        sol.link_loads = link_loads(topo, sc, sol)
        return sol

    inst = _Instance(model)
    if inst.reasons:
        return _infeasible(model, "; ".join(inst.reasons))
    if inst.n <= 0:
        sol = PlacementSolution(model.mode, pm, {}, {}, 0.0, Optimality.PROVED_OPTIMAL)
        return sol

    classes = inst.ont_classes()
    everything = {inst.olt: inst.olt_max, **{s: 1 for s in inst.onts}}
    if inst.config_cost(everything) is None:
        return _infeasible(model, "server capacity / link capacity families")

    k_min = max(1, math.ceil(inst.n / pm - 1e-12))
    k_max = inst.olt_max + len(inst.onts)
    cands: list[_Candidate] = []
    best = INF
    for k in range(k_min, k_max + 1):
        lb_k = inst.const + k * inst.costs.server_idle_j + inst.flow_lb
        if lb_k > best * (1 + PRUNE_RTOL) + 1e-12:
            break
        for k_olt, counts in _configs(classes, inst.olt_max, k):
            servers = {inst.olt: k_olt} if k_olt else {}
            for cls, m in zip(classes, counts):
                for s in cls[:m]:
                    servers[s] = 1
            lb = lb_k + sum(inst.open_cost[s] for s in servers if s != inst.olt)
            if lb > best * (1 + PRUNE_RTOL) + 1e-12:
                continue
            res = inst.config_cost(servers)
            if res is None:
                continue
            total, assignment = res
            cands.append(_Candidate(total, inst.key(servers), servers, assignment))
            best = min(best, total)

    if not cands:
        return _infeasible(model, "no server vector admits a feasible assignment")

    close = [c for c in cands if c.flow_cost <= best * (1 + PRUNE_RTOL) + 1e-12]
    for c in close:
        c.objective = evaluate(topo, sc, _solution(model, c), catalog, model.options).total_j
    top = min(c.objective for c in close)
    winner = min((c for c in close if c.objective <= top + TIE_RTOL * abs(top)),
                 key=lambda c: c.key)
    if abs(winner.objective - winner.flow_cost) > 1e-9 * max(1.0, abs(winner.objective)):
        raise SolverInvariantError(
            f"flow cost {winner.flow_cost!r} disagrees with evaluate() {winner.objective!r}")
    sol = _solution(model, winner)
    sol.objective_j = winner.objective
    sol.optimality = Optimality.PROVED_OPTIMAL
    sol.link_loads = link_loads(topo, sc, sol)
    return sol


def _solution(model: MilpModel, c: _Candidate) -> PlacementSolution:
    servers = {s: c.servers.get(s, 0) for s in model.topology.candidate_sites}
    return PlacementSolution(model.mode, model.pat_max, servers, dict(sorted(c.assignment.items())))


def _infeasible(model: MilpModel, reason: str) -> PlacementSolution:
    return PlacementSolution(model.mode, model.pat_max, {}, {}, float("nan"),
                             Optimality.INFEASIBLE, infeasible_reason=reason)


__all__ = ["solve", "SolverInvariantError", "units"]
