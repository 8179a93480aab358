"""MILP formulation of fog server placement and its LP-format export."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .. import catalog as cat
from ..catalog import DeviceCatalog, attributable_power
from ..energy import EnergyOptions, Phase, idle_scope, server_idle_window
from ..scenario import Scenario
from ..solution import Mode, PlacementSolution
from ..topology import Topology, link_hc_capacity, route

PHASE_TAG = {Phase.RAW_UPLOAD: "raw", Phase.ANALYSED_UPLOAD: "analysed"}


class ModelError(ValueError):
    pass


@dataclass
class Variable:
    name: str
    kind: str  # "integer" | "binary"
    lb: float
    ub: float
    cost: float


@dataclass
class Constraint:
    name: str
    coefs: dict[str, float]
    sense: str  # "<=" | "="
    rhs: float


@dataclass
class CostTables:
    """Per-patient and per-device energy coefficients shared by model and solver."""

    raw_prop: dict[str, float]       # node -> J per patient routed through it in RawUpload
    analysed_prop: dict[str, float]  # node -> J per patient routed through it in AnalysedUpload
    busy_j: float                    # processing J per patient
    server_idle_j: float             # J per deployed server
    idle_j: dict[tuple[str, Phase], float]  # activation cost of (node, phase)


@dataclass
class MilpModel:
    topology: Topology
    scenario: Scenario
    catalog: DeviceCatalog
    mode: Mode
    options: EnergyOptions
    costs: CostTables
    variables: dict[str, Variable] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    constant_j: float = 0.0
    y: dict[str, str] = field(default_factory=dict)
    x: dict[tuple[str, str], str] = field(default_factory=dict)
    z: dict[tuple[str, Phase], str] = field(default_factory=dict)
    z_cover: dict[str, list[str]] = field(default_factory=dict)

    @property
    def pat_max(self) -> int:
        return self.scenario.pat_max

    def add_var(self, name: str, kind: str, lb: float, ub: float, cost: float) -> str:
        if name in self.variables:
            raise ModelError(f"duplicate variable {name}")
        if cost < 0:
            raise ModelError(f"negative objective coefficient on {name}")
        self.variables[name] = Variable(name, kind, lb, ub, cost)
        return name

    def add_row(self, name: str, coefs: dict[str, float], sense: str, rhs: float) -> None:
        unknown = [v for v in coefs if v not in self.variables]
        if unknown:
            raise ModelError(f"row {name} references undeclared {unknown[:3]}")
        self.constraints.append(Constraint(name, coefs, sense, rhs))

    def values_of(self, sol: PlacementSolution) -> dict[str, float]:
        vals = {v: 0.0 for v in self.variables}
        for s, name in self.y.items():
            vals[name] = sol.servers_per_site.get(s, 0)
        for key, name in self.x.items():
            vals[name] = sol.assignment.get(key, 0)
        for name, cover in self.z_cover.items():
            vals[name] = 1.0 if any(vals[c] > 0 for c in cover) else 0.0
        return vals

    def objective_of(self, sol: PlacementSolution) -> float:
        vals = self.values_of(sol)
        return self.constant_j + sum(self.variables[v].cost * val for v, val in vals.items())

    def violated_rows(self, sol: PlacementSolution, tol: float = 1e-9) -> list[str]:
        vals = self.values_of(sol)
        bad = []
        for row in self.constraints:
            terms = [c * vals[v] for v, c in row.coefs.items()]
            lhs = math.fsum(terms)
            slack = tol * max(1.0, abs(row.rhs), max((abs(x) for x in terms), default=0.0))
            if row.sense == "=" and abs(lhs - row.rhs) > slack:
                bad.append(row.name)
            elif row.sense == "<=" and lhs > row.rhs + slack:
                bad.append(row.name)
        return bad


def _prop_per_patient(node_class: str, rate: float, duration: float,
                      catalog: DeviceCatalog) -> float:
    spec = catalog[node_class]
    if spec.capacity is not None:
        util = rate / spec.capacity
    elif spec.storage_bits is not None:
        util = rate * duration / spec.storage_bits
    else:
        raise ModelError(f"device class {node_class!r} has no capacity")
    return attributable_power(spec, util, 0.0) * duration


def cost_tables(topology: Topology, scenario: Scenario, catalog: DeviceCatalog,
                options: EnergyOptions) -> CostTables:
    t, r = scenario.timing, scenario.rates
    raw_nodes = [*topology.aps, *topology.onts, topology.olt]
    an_nodes = [*topology.onts, topology.olt, *topology.chain, topology.storage]
    raw_prop = {n: _prop_per_patient(topology.device_class(n), r.r_ps, t.t_t, catalog)
                for n in raw_nodes}
    an_prop = {n: _prop_per_patient(topology.device_class(n), r.r_cloud, t.t_cloud, catalog)
               for n in an_nodes}
    server = catalog[cat.PROCESSING_SERVER]
    busy = attributable_power(server, 1.0, 0.0) * scenario.params.unit_pa_time
    idle_server = attributable_power(server, 0.0, 1.0) * server_idle_window(scenario, options)
    idle = {}
    for phase, nodes, dur in ((Phase.RAW_UPLOAD, raw_nodes, t.t_t),
                              (Phase.ANALYSED_UPLOAD, an_nodes, t.t_cloud)):
        for n in nodes:
            spec = catalog[topology.device_class(n)]
            idle[(n, phase)] = attributable_power(spec, 0.0, catalog.hc_share) * dur
    return CostTables(raw_prop, an_prop, busy, idle_server, idle)


def x_cost(costs: CostTables, topology: Topology, ap: str, site: str) -> float:
    raw = sum(costs.raw_prop[n] for n in route(topology, ap, site).nodes)
    an = sum(costs.analysed_prop[n] for n in route(topology, site, topology.storage).nodes)
    return raw + an + costs.busy_j


def site_cap(mode: Mode, topology: Topology, site: str) -> int:
    n = math.ceil(topology.n_patients - 1e-9)
    if mode is Mode.SFA:
        return 1
    if mode is Mode.MFA:
        return max(n, 1) if site == topology.olt else 1
    return 0


def formulate(topology: Topology, scenario: Scenario, mode: Mode, catalog: DeviceCatalog,
              options: EnergyOptions = EnergyOptions()) -> MilpModel:
    if scenario.timing.t_cloud is None:
        raise ModelError("scenario timing incomplete")
    costs = cost_tables(topology, scenario, catalog, options)
    m = MilpModel(topology, scenario, catalog, mode, options, costs)
    if mode is Mode.CA:
        # no decisions: the CA placement is evaluated directly
        return m

    sites = topology.candidate_sites
    pm = scenario.pat_max
    r = scenario.rates
    integral = all(float(p).is_integer() for p in topology.patients_per_ap.values())
    xkind = "integer" if integral else "continuous"

    for s in sites:
        m.y[s] = m.add_var(f"y_{s}", "integer", 0, site_cap(mode, topology, s), costs.server_idle_j)
    for a in topology.aps:
        for s in sites:
            m.x[(a, s)] = m.add_var(f"x_{a}_{s}", xkind, 0, topology.patients_per_ap[a],
                                    x_cost(costs, topology, a, s))

    raw_routes = {(a, s): route(topology, a, s) for a in topology.aps for s in sites}
    an_routes = {s: route(topology, s, topology.storage) for s in sites}

    # flows through each node, per phase
    through: dict[tuple[str, Phase], list[str]] = {}
    for (a, s), p in raw_routes.items():
        for n in p.nodes:
            through.setdefault((n, Phase.RAW_UPLOAD), []).append(m.x[(a, s)])
    for s, p in an_routes.items():
        for n in p.nodes:
            through.setdefault((n, Phase.ANALYSED_UPLOAD), []).extend(
                m.x[(a, s)] for a in topology.aps)

    if options.activation:
        for (n, phase), xs in sorted(through.items(), key=lambda kv: (kv[0][1].value, kv[0][0])):
            name = m.add_var(f"z_{n}_{PHASE_TAG[phase]}", "binary", 0, 1, costs.idle_j[(n, phase)])
            m.z[(n, phase)] = name
            m.z_cover[name] = xs
    else:
        for phase in (Phase.RAW_UPLOAD, Phase.ANALYSED_UPLOAD):
            m.constant_j += sum(costs.idle_j[(n, phase)] for n in idle_scope(topology, phase))

    for a in topology.aps:
        m.add_row(f"assign_{a}", {m.x[(a, s)]: 1.0 for s in sites}, "=",
                  topology.patients_per_ap[a])
    for s in sites:
        coefs = {m.x[(a, s)]: 1.0 for a in topology.aps}
        coefs[m.y[s]] = -float(pm)
        m.add_row(f"cap_{s}", coefs, "<=", 0.0)

    for phase, routes, rate in (
        (Phase.RAW_UPLOAD, {k: p for k, p in raw_routes.items()}, r.r_ps),
        (Phase.ANALYSED_UPLOAD, {(a, s): an_routes[s] for a in topology.aps for s in sites},
         r.r_cloud),
    ):
        rows: dict[tuple[str, str], dict[str, float]] = {}
        for key, p in routes.items():
            for ln in p.links:
                rows.setdefault((ln.src, ln.dst), {})[m.x[key]] = rate
        for (u, v), coefs in sorted(rows.items()):
            cap_ = link_hc_capacity(topology.link(u, v), catalog)
            m.add_row(f"link_{u}_{v}_{PHASE_TAG[phase]}", coefs, "<=", cap_)

    big_m = {Phase.RAW_UPLOAD: topology.n_patients * r.r_ps,
             Phase.ANALYSED_UPLOAD: topology.n_patients * r.r_cloud}
    for (n, phase), zname in m.z.items():
        rate = r.r_ps if phase is Phase.RAW_UPLOAD else r.r_cloud
        coefs = {xv: rate for xv in m.z_cover[zname]}
        coefs[zname] = -big_m[phase]
        m.add_row(f"act_{n}_{PHASE_TAG[phase]}", coefs, "<=", 0.0)
    return m


def _fmt(v: float) -> str:
    return repr(float(v))


def _wrap_terms(terms: Iterable[str], indent: str = "   ", width: int = 200) -> list[str]:
    lines, cur = [], ""
    for t in terms:
        if cur and len(cur) + len(t) + 1 > width:
            lines.append(cur)
            cur = indent + t
        else:
            cur = (cur + " " + t) if cur else t
    if cur:
        lines.append(cur)
    return lines


def _expr(coefs: dict[str, float]) -> list[str]:
    terms = []
    for i, (v, c) in enumerate(coefs.items()):
        sign = "-" if c < 0 else "+"
        body = f"{_fmt(abs(c))} {v}"
        terms.append(body if i == 0 and sign == "+" else f"{sign} {body}")
    return terms or ["0"]


def export_lp(model: MilpModel) -> str:
    """CPLEX LP text of the model; the constant energy term is left out."""
    out = [f"\\ fog placement {model.mode.value} pat_max={model.pat_max}",
           f"\\ constant_j={_fmt(model.constant_j)} (not included below)", "Minimize"]
    obj = {v.name: v.cost for v in model.variables.values() if v.cost != 0}
    out += _wrap_terms(["obj:"] + _expr(obj), indent="  ")
    out.append("Subject To")
    for row in model.constraints:
        sense = "=" if row.sense == "=" else "<="
        out += _wrap_terms([f" {row.name}:"] + _expr(row.coefs) + [sense, _fmt(row.rhs)])
    out.append("Bounds")
    for v in model.variables.values():
        if v.kind != "binary":
            out.append(f" {_fmt(v.lb)} <= {v.name} <= {_fmt(v.ub)}")
    gens = [v.name for v in model.variables.values() if v.kind == "integer"]
    bins = [v.name for v in model.variables.values() if v.kind == "binary"]
    if gens:
        out.append("Generals")
        out += _wrap_terms(gens, indent=" ")
    if bins:
        out.append("Binaries")
        out += _wrap_terms(bins, indent=" ")
    out.append("End")
    return "\n".join(out) + "\n"
