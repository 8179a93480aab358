"""Energy-minimising placement of fog processing servers in a GPON access network."""

from .catalog import DeviceCatalog, DeviceSpec, attributable_power, default_catalog, validate_catalog
from .energy import EnergyBreakdown, EnergyOptions, evaluate
from .config import RunConfig, load_config
from .instance import Instance, make_instance
from .oracle import enumerate_optimal, equivalence_check
from .scenario import ScenarioParams, derive_rates, derive_timing, scenario_table
from .solution import Mode, Optimality, PlacementSolution
from .topology import GponParams, build_gpon, route

__all__ = [
    "DeviceCatalog",
    "DeviceSpec",
    "EnergyBreakdown",
    "EnergyOptions",
    "GponParams",
    "Instance",
    "Mode",
    "Optimality",
    "PlacementSolution",
    "RunConfig",
    "ScenarioParams",
    "attributable_power",
    "build_gpon",
    "default_catalog",
    "derive_rates",
    "derive_timing",
    "enumerate_optimal",
    "equivalence_check",
    "evaluate",
    "load_config",
    "make_instance",
    "route",
    "scenario_table",
    "validate_catalog",
]
