"""Bundle of everything one solve needs."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .catalog import DeviceCatalog, default_catalog
from .energy import EnergyOptions
from .scenario import Scenario, ScenarioParams, make_scenario
from .topology import GponParams, Topology, build_gpon, uplink_hc_share


@dataclass(frozen=True)
class Instance:
    topology: Topology
    scenario: Scenario
    catalog: DeviceCatalog
    options: EnergyOptions = EnergyOptions()


def make_instance(pat_max: int, gpon: GponParams | None = None,
                  catalog: DeviceCatalog | None = None,
                  base: ScenarioParams | None = None,
                  options: EnergyOptions | None = None) -> Instance:
    catalog = catalog or default_catalog()
    gpon = gpon or GponParams()
    topo = build_gpon(gpon, catalog)
    params = replace(base or ScenarioParams(pat_max=pat_max), pat_max=pat_max,
                     n_patients=gpon.n_patients)
    scenario = make_scenario(params, uplink_hc_share(topo, catalog))
    return Instance(topo, scenario, catalog, options or EnergyOptions())
