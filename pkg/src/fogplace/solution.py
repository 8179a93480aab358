"""Placement modes and the solution record shared by energy, placement and oracle."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field


class Mode(enum.Enum):
    SFA = "SFA"
    MFA = "MFA"
    CA = "CA"


class Optimality(enum.Enum):
    PROVED_OPTIMAL = "ProvedOptimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"


class InvalidPlacement(ValueError):
    pass


@dataclass
class PlacementSolution:
    mode: Mode
    pat_max: int
    servers_per_site: dict[str, int]
    assignment: dict[tuple[str, str], float]
    objective_j: float = float("nan")
    optimality: Optimality = Optimality.FEASIBLE
    # phase name -> (src, dst) -> aggregate healthcare bit rate
    link_loads: dict[str, dict[tuple[str, str], float]] = field(default_factory=dict)
    cloud_servers: int = 0
    infeasible_reason: str = ""

    @property
    def servers_total(self) -> int:
        return sum(self.servers_per_site.values())

    def site_loads(self) -> dict[str, float]:
        loads: dict[str, float] = {}
        for (_, site), n in self.assignment.items():
            loads[site] = loads.get(site, 0) + n
        return loads

    def placement_key(self) -> tuple:
        """Servers per site with zero entries dropped, sorted by site."""
        return tuple(sorted((s, k) for s, k in self.servers_per_site.items() if k))

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "pat_max": self.pat_max,
            "servers_per_site": {s: k for s, k in self.servers_per_site.items() if k},
            "assignment": [
                {"ap": a, "site": s, "patients": _num(n)}
                for (a, s), n in sorted(self.assignment.items()) if n
            ],
            "objective_j": self.objective_j,
            "optimality": self.optimality.value,
            "cloud_servers": self.cloud_servers,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


def _num(n: float) -> float | int:
    return int(n) if float(n).is_integer() else n
