"""Constraint checks for a concrete placement."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from ..catalog import DeviceCatalog
from ..energy import phase_flows
from ..scenario import Scenario
from ..solution import Mode, PlacementSolution
from ..topology import Topology, link_hc_capacity

RTOL = 1e-12


@dataclass(frozen=True)
class FeasibilityViolation:
    constraint: str
    entity: str
    slack: float  # negative: amount by which the constraint is exceeded

    def __str__(self) -> str:
        return f"{self.constraint} on {self.entity}: slack {self.slack:.6g}"


def link_loads(topology: Topology, scenario: Scenario,
               placement: PlacementSolution) -> dict[str, dict[tuple[str, str], float]]:
    loads: dict[str, dict[tuple[str, str], float]] = {}
    for phase, flows in phase_flows(topology, scenario, placement).items():
        per = defaultdict(float)
        for f in flows:
            for ln in f.path.links:
                per[(ln.src, ln.dst)] += f.aggregate_rate
        loads[phase.value] = dict(sorted(per.items()))
    return loads


def check_feasibility(topology: Topology, scenario: Scenario, placement: PlacementSolution,
                      catalog: DeviceCatalog) -> list[FeasibilityViolation]:
    out: list[FeasibilityViolation] = []
    add = out.append
    pm = scenario.pat_max

    got: dict[str, float] = defaultdict(float)
    for (ap, _), n in placement.assignment.items():
        got[ap] += n
        if n < 0:
            add(FeasibilityViolation("non-negative assignment", ap, n))
    for ap in topology.aps:
        want = topology.patients_per_ap[ap]
        if abs(got.get(ap, 0.0) - want) > 1e-9:
            add(FeasibilityViolation("assignment completeness", ap, got.get(ap, 0.0) - want))

    if placement.mode is Mode.CA:
        if placement.servers_total:
            add(FeasibilityViolation("mode cap", "fog", -placement.servers_total))
        need = topology.n_patients - pm * placement.cloud_servers
        if need > 1e-9:
            add(FeasibilityViolation("server capacity", topology.content_server, -need))
    else:
        sites = set(topology.candidate_sites)
        loads = placement.site_loads()
        for site, n in sorted(loads.items()):
            if site not in sites:
                add(FeasibilityViolation("candidate site", site, -n))
                continue
            slack = pm * placement.servers_per_site.get(site, 0) - n
            if slack < -1e-9:
                add(FeasibilityViolation("server capacity", site, slack))
        for site, k in sorted(placement.servers_per_site.items()):
            cap = 1 if (placement.mode is Mode.SFA or site != topology.olt) else None
            if cap is not None and k > cap:
                add(FeasibilityViolation(f"{placement.mode.value} site cap", site, cap - k))
            if k < 0:
                add(FeasibilityViolation("non-negative servers", site, k))

    for phase, per in link_loads(topology, scenario, placement).items():
        for (u, v), load in per.items():
            cap = link_hc_capacity(topology.link(u, v), catalog)
            if load > cap * (1 + RTOL):
                add(FeasibilityViolation(f"link capacity {phase}", f"{u}->{v}", cap - load))

    storage = catalog[topology.device_class(topology.storage)]
    if storage.storage_bits is not None:
        stored = topology.n_patients * scenario.params.processed_bits
        if stored > storage.storage_bits:
            add(FeasibilityViolation("storage volume", topology.storage,
                                     storage.storage_bits - stored))
    return out
