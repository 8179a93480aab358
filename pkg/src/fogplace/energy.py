"""Attributable energy of a placement: network transport phases plus processing."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import catalog as cat
from .catalog import DeviceCatalog, DeviceSpec, attributable_power
from .scenario import Scenario
from .solution import InvalidPlacement, Mode, PlacementSolution
from .topology import Path, Topology, route

ASSIGN_TOL = 1e-9


class Phase(enum.Enum):
    RAW_UPLOAD = "RawUpload"
    ANALYSED_UPLOAD = "AnalysedUpload"
    CLOUD_RAW_UPLOAD = "CloudRawUpload"
    STORAGE_WRITE = "StorageWrite"


class ConfigurationError(ValueError):
    pass


class InfeasibleSchedule(ValueError):
    pass


@dataclass(frozen=True)
class PhaseFlow:
    path: Path
    per_patient_rate: float
    n_patients: float
    duration: float
    phase: Phase

    @property
    def aggregate_rate(self) -> float:
        return self.per_patient_rate * self.n_patients


@dataclass(frozen=True)
class EnergyOptions:
    """Knobs of the attribution model.

    server_idle_window: "t_total", "t_total+t_cloud", or a number of seconds.
    activation: charge a device's idle share only in phases where it carries
        traffic; when False every device in the phase's scope is charged.
    cloud_idle_share: idle attribution of each cloud processing instance (CA).
        None means the catalog's healthcare share, i.e. the content server is
        treated like the other shared cloud devices; 1.0 charges it as
        dedicated hardware.
    charge_storage_write: include the in-cloud storage write in CA.
    """

    server_idle_window: str | float = "t_total"
    activation: bool = True
    cloud_idle_share: float | None = None
    charge_storage_write: bool = True


@dataclass
class EnergyBreakdown:
    per_device_class: dict[str, float]
    network_j: float
    processing_j: float
    total_j: float

    def to_json_dict(self) -> dict:
        return {
            "total_j": self.total_j,
            "network_j": self.network_j,
            "processing_j": self.processing_j,
            "per_device_class": dict(sorted(self.per_device_class.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["class", "joules"])
        for name, j in sorted(self.per_device_class.items()):
            w.writerow([name, f"{j:.6g}"])
        return buf.getvalue()


def _utilization(spec: DeviceSpec, flow: PhaseFlow) -> float:
    if spec.capacity is not None:
        return flow.aggregate_rate / spec.capacity
    if spec.storage_bits is not None:
        return flow.aggregate_rate * flow.duration / spec.storage_bits
    raise ConfigurationError(f"device class {spec.name!r} has no capacity")


def phase_energy(flows: Iterable[PhaseFlow], topology: Topology, catalog: DeviceCatalog,
                 idle_scope: Iterable[str] | None = None,
                 idle_duration: float | None = None) -> dict[str, float]:
    """Per-node joules for flows sharing one phase.

    Each node pays its idle share once, over the longest flow through it;
    proportional terms add up across flows. With ``idle_scope`` the idle
    share is charged on exactly those nodes for ``idle_duration`` instead.
    """
    util_time: dict[str, float] = defaultdict(float)
    busy_window: dict[str, float] = {}
    for f in flows:
        if f.n_patients <= 0:
            continue
        if f.duration <= 0:
            raise ValueError("flow duration must be positive")
        for node in f.path.nodes:
            spec = catalog[topology.device_class(node)]
            util_time[node] += _utilization(spec, f) * f.duration
            busy_window[node] = max(busy_window.get(node, 0.0), f.duration)

    if idle_scope is not None:
        if idle_duration is None:
            raise ValueError("idle_duration required with idle_scope")
        idle_window = {n: idle_duration for n in idle_scope}
    else:
        idle_window = busy_window

    out: dict[str, float] = {}
    for node in sorted(set(util_time) | set(idle_window)):
        spec = catalog[topology.device_class(node)]
        e = attributable_power(spec, 0.0, catalog.hc_share) * idle_window.get(node, 0.0)
        if node in util_time:
            # mean utilisation over the node's busy window, to stay in the [0, 1] domain
            window = busy_window[node]
            e += attributable_power(spec, util_time[node] / window, 0.0) * window
        out[node] = e
    return out


def flow_energy(flow: PhaseFlow, topology: Topology, catalog: DeviceCatalog) -> dict[str, float]:
    return phase_energy([flow], topology, catalog)


def processing_energy(server: DeviceSpec, n_assigned: float, unit_pa_time: float,
                      idle_window: float, idle_share: float = 1.0) -> float:
    """Joules of one server: idle floor over the window, full load while busy."""
    if n_assigned < 0:
        raise ValueError("n_assigned must be non-negative")
    busy = n_assigned * unit_pa_time
    if busy > idle_window * (1 + 1e-12):
        raise InfeasibleSchedule(f"busy time {busy:.6g} s exceeds window {idle_window:.6g} s")
    return (attributable_power(server, 0.0, idle_share) * idle_window
            + attributable_power(server, 1.0, 0.0) * busy)


def server_idle_window(scenario: Scenario, options: EnergyOptions) -> float:
    w = options.server_idle_window
    if w == "t_total":
        return scenario.params.t_total
    if w == "t_total+t_cloud":
        return scenario.params.t_total + scenario.timing.t_cloud
    if isinstance(w, (int, float)):
        return float(w)
    raise ConfigurationError(f"unknown server_idle_window {w!r}")


def server_loads(load: float, k: int, pat_max: int) -> list[float]:
    """Split a site's load over ``k`` servers, filling each up to ``pat_max``."""
    out = []
    left = load
    for _ in range(k):
        take = min(left, pat_max)
        out.append(take)
        left -= take
    return out


def _trim(path: Path, head: bool = False, tail: bool = False) -> Path:
    nodes, links = path.nodes, path.links
    if head:
        nodes, links = nodes[1:], links[1:]
    if tail:
        nodes, links = nodes[:-1], links[:-1]
    return Path(nodes, links)


def check_complete(topology: Topology, placement: PlacementSolution) -> None:
    got: dict[str, float] = defaultdict(float)
    for (ap, _), n in placement.assignment.items():
        got[ap] += n
    for ap in topology.aps:
        want = topology.patients_per_ap[ap]
        if abs(got.get(ap, 0.0) - want) > ASSIGN_TOL:
            raise InvalidPlacement(f"{ap}: {got.get(ap, 0.0)} of {want} patients assigned")


def phase_flows(topology: Topology, scenario: Scenario,
                placement: PlacementSolution) -> dict[Phase, list[PhaseFlow]]:
    t, r = scenario.timing, scenario.rates
    out: dict[Phase, list[PhaseFlow]] = {}
    if placement.mode is Mode.CA:
        out[Phase.CLOUD_RAW_UPLOAD] = [
            PhaseFlow(_trim(route(topology, ap, topology.content_server), tail=True),
                      r.r_ps, n, t.t_t, Phase.CLOUD_RAW_UPLOAD)
            for ap, n in topology.patients_per_ap.items() if n > 0
        ]
        total = topology.n_patients
        # nothing to store means no storage-write traffic at all
        out[Phase.STORAGE_WRITE] = [] if total <= 0 or t.t_cloud <= 0 else [
            PhaseFlow(_trim(route(topology, topology.content_server, topology.storage), head=True),
                      r.r_cloud, total, t.t_cloud, Phase.STORAGE_WRITE)
        ]
        return out
    out[Phase.RAW_UPLOAD] = [
        PhaseFlow(route(topology, ap, site), r.r_ps, n, t.t_t, Phase.RAW_UPLOAD)
        for (ap, site), n in sorted(placement.assignment.items()) if n > 0
    ]
    out[Phase.ANALYSED_UPLOAD] = [
        PhaseFlow(route(topology, site, topology.storage), r.r_cloud, n, t.t_cloud,
                  Phase.ANALYSED_UPLOAD)
        for site, n in sorted(placement.site_loads().items()) if n > 0 and t.t_cloud > 0
    ]
    return out


def idle_scope(topology: Topology, phase: Phase) -> list[str]:
    """Devices charged unconditionally in ``phase`` when activation is disabled."""
    access = list(topology.aps) + list(topology.onts) + [topology.olt]
    if phase is Phase.RAW_UPLOAD:
        return access
    if phase is Phase.ANALYSED_UPLOAD:
        return list(topology.onts) + [topology.olt, *topology.chain, topology.storage]
    if phase is Phase.CLOUD_RAW_UPLOAD:
        return access + list(topology.chain)
    return list(_trim(route(topology, topology.content_server, topology.storage), head=True).nodes)


def phase_duration(scenario: Scenario, phase: Phase) -> float:
    if phase in (Phase.RAW_UPLOAD, Phase.CLOUD_RAW_UPLOAD):
        return scenario.timing.t_t
    return scenario.timing.t_cloud


def evaluate(topology: Topology, scenario: Scenario, placement: PlacementSolution,
             catalog: DeviceCatalog, options: EnergyOptions = EnergyOptions()) -> EnergyBreakdown:
    check_complete(topology, placement)
    per_class: dict[str, float] = defaultdict(float)
    network = 0.0

    for phase, flows in phase_flows(topology, scenario, placement).items():
        if phase is Phase.STORAGE_WRITE and not options.charge_storage_write:
            continue
        if options.activation:
            joules = phase_energy(flows, topology, catalog)
        else:
            joules = phase_energy(flows, topology, catalog, idle_scope(topology, phase),
                                  phase_duration(scenario, phase))
        for node, j in joules.items():
            per_class[topology.device_class(node)] += j
            network += j

    processing = 0.0
    window = server_idle_window(scenario, options)
    unit = scenario.params.unit_pa_time
    pm = scenario.pat_max
    if placement.mode is Mode.CA:
        spec = catalog[cat.CONTENT_SERVER]
        share = catalog.hc_share if options.cloud_idle_share is None else options.cloud_idle_share
        for n in server_loads(topology.n_patients, placement.cloud_servers, pm):
            processing += processing_energy(spec, n, unit, window, share)
        if processing:
            per_class[cat.CONTENT_SERVER] += processing
    else:
        spec = catalog[cat.PROCESSING_SERVER]
        loads = placement.site_loads()
        for site, k in sorted(placement.servers_per_site.items()):
            for n in server_loads(loads.get(site, 0.0), k, pm):
                processing += processing_energy(spec, n, unit, window)
        if processing:
            per_class[cat.PROCESSING_SERVER] += processing

    return EnergyBreakdown(dict(per_class), network, processing, network + processing)


def ca_placement(topology: Topology, pat_max: int) -> PlacementSolution:
    """The fixed all-cloud placement: every AP's patients go to content servers."""
    from .solution import Optimality

    n = topology.n_patients
    return PlacementSolution(
        mode=Mode.CA, pat_max=pat_max, servers_per_site={},
        assignment={(ap, topology.content_server): p
                    for ap, p in topology.patients_per_ap.items() if p > 0},
        optimality=Optimality.PROVED_OPTIMAL,
        cloud_servers=math.ceil(n / pat_max - 1e-12) if n > 0 else 0,
    )


def energy_of_flows(flows: Sequence[PhaseFlow], topology: Topology,
                    catalog: DeviceCatalog) -> float:
    return sum(phase_energy(flows, topology, catalog).values())
