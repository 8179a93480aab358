"""Search over metro/core hop chains for the best fit to the saving trends.

Fog placements do not depend on the chain as long as its links do not bind:
every fog placement sends all n analysed streams through the OLT and the
whole chain, so the chain adds the same joules to each of them. The search
therefore solves each (pat_max, mode) once per distinct uplink share and
re-evaluates the fixed placements on every chain, after checking that they
stay feasible there.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from . import catalog as cat
from .catalog import DeviceCatalog, default_catalog
from .energy import EnergyOptions, ca_placement, evaluate
from .instance import make_instance
from .placement import check_feasibility, formulate, solve
from .scenario import ScenarioParams
from .solution import Mode, PlacementSolution
from .topology import GponParams, build_gpon, uplink_hc_share

FOG_MODES = (Mode.SFA, Mode.MFA)


@dataclass(frozen=True)
class ChainSpace:
    """Chains of the form: agg switches, agg routers, core routers, agg routers, cloud switch.

    Aggregation routers are split evenly around the core, the extra one going
    to the cloud side.
    """

    max_agg_switches: int = 2
    max_agg_routers: int = 4
    max_core_routers: int = 6

    def chains(self) -> list[tuple[str, ...]]:
        out = []
        for s, r, c in itertools.product(range(self.max_agg_switches + 1),
                                         range(self.max_agg_routers + 1),
                                         range(self.max_core_routers + 1)):
            out.append(tuple([cat.AGG_SWITCH] * s + [cat.AGG_ROUTER] * (r // 2)
                             + [cat.CORE_ROUTER] * c + [cat.AGG_ROUTER] * (r - r // 2)
                             + [cat.CLOUD_SWITCH]))
        return out


@dataclass(frozen=True)
class TrendTargets:
    first_saving_pct: float = 68.0
    last_saving_pct: float = 22.0
    saving_tol: float = 5.0
    mfa_vs_sfa_pct: tuple[float, ...] = (0.2, 9.0, 0.1, 0.0)
    delta_tol: float = 2.0


@dataclass(frozen=True)
class ChainFit:
    chain: tuple[str, ...]
    pat_max: tuple[int, ...]
    # savings[i][j]: saving vs CA in percent for pat_max[i], FOG_MODES[j]
    savings: tuple[tuple[float, float], ...]
    mfa_vs_sfa: tuple[float, ...]
    targets: TrendTargets = TrendTargets()

    @property
    def first_residual(self) -> float:
        return max(abs(s - self.targets.first_saving_pct) for s in self.savings[0])

    @property
    def last_residual(self) -> float:
        return max(abs(s - self.targets.last_saving_pct) for s in self.savings[-1])

    @property
    def residual(self) -> float:
        return max(self.first_residual, self.last_residual)

    @property
    def meets_savings(self) -> bool:
        return self.residual <= self.targets.saving_tol

    @property
    def monotone(self) -> bool:
        return all(self.savings[i + 1][j] <= self.savings[i][j]
                   for i in range(len(self.savings) - 1) for j in range(len(FOG_MODES)))

    @property
    def deltas_ok(self) -> bool:
        tgt = self.targets.mfa_vs_sfa_pct
        if len(tgt) != len(self.mfa_vs_sfa):
            return False
        for i, (got, want) in enumerate(zip(self.mfa_vs_sfa, tgt)):
            if want == 0.0 and i == len(tgt) - 1:
                if got != 0.0:
                    return False
            elif abs(got - want) > self.targets.delta_tol:
                return False
        return True

    @property
    def admissible(self) -> bool:
        return self.monotone and self.deltas_ok

    def rank_key(self) -> tuple:
        return (not self.admissible, round(self.residual, 9), len(self.chain), self.chain)


def _fog_placements(pat_max: Sequence[int], gpon: GponParams, catalog: DeviceCatalog,
                    base: ScenarioParams | None, options: EnergyOptions):
    out = {}
    for pm in pat_max:
        inst = make_instance(pm, gpon=gpon, catalog=catalog, base=base, options=options)
        for mode in FOG_MODES:
            out[(pm, mode)] = solve(formulate(inst.topology, inst.scenario, mode, catalog, options))
    return out


def fit_chain(chain: Sequence[str], pat_max: Sequence[int] = (50, 100, 150, 200),
              gpon: GponParams | None = None, catalog: DeviceCatalog | None = None,
              base: ScenarioParams | None = None, options: EnergyOptions | None = None,
              targets: TrendTargets = TrendTargets(),
              placements: dict[tuple[int, Mode], PlacementSolution] | None = None) -> ChainFit:
    """Saving trends of one chain; solves the placements unless given."""
    catalog = catalog or default_catalog()
    options = options or EnergyOptions()
    g = replace(gpon or GponParams(), metro_core_hops=tuple(chain))
    if placements is None:
        placements = _fog_placements(pat_max, g, catalog, base, options)
    savings, deltas = [], []
    for pm in pat_max:
        inst = make_instance(pm, gpon=g, catalog=catalog, base=base, options=options)
        ca = evaluate(inst.topology, inst.scenario, ca_placement(inst.topology, pm),
                      catalog, options).total_j
        tot = {}
        for mode in FOG_MODES:
            sol = placements[(pm, mode)]
            if check_feasibility(inst.topology, inst.scenario, sol, catalog):
                raise ValueError(f"placement for pat_max={pm} {mode.value} infeasible on {chain}")
            tot[mode] = evaluate(inst.topology, inst.scenario, sol, catalog, options).total_j
        savings.append(tuple(100.0 * (1.0 - tot[m] / ca) for m in FOG_MODES))
        deltas.append(100.0 * (1.0 - tot[Mode.MFA] / tot[Mode.SFA]))
    return ChainFit(tuple(chain), tuple(pat_max), tuple(savings), tuple(deltas), targets)


def calibrate(space: ChainSpace = ChainSpace(), pat_max: Sequence[int] = (50, 100, 150, 200),
              gpon: GponParams | None = None, catalog: DeviceCatalog | None = None,
              base: ScenarioParams | None = None, options: EnergyOptions | None = None,
              targets: TrendTargets = TrendTargets(),
              chains: Iterable[Sequence[str]] | None = None) -> list[ChainFit]:
    """Every chain in the space, best fit first."""
    catalog = catalog or default_catalog()
    options = options or EnergyOptions()
    gpon = gpon or GponParams()
    cache: dict[float, dict] = {}
    fits = []
    for chain in (space.chains() if chains is None else chains):
        g = replace(gpon, metro_core_hops=tuple(chain))
        share = uplink_hc_share(build_gpon(g, catalog), catalog)
        if share not in cache:
            cache[share] = _fog_placements(pat_max, g, catalog, base, options)
        fits.append(fit_chain(chain, pat_max, gpon, catalog, base, options, targets, cache[share]))
    fits.sort(key=ChainFit.rank_key)
    return fits


def format_fit(fit: ChainFit) -> str:
    sav = ", ".join(f"pat_max={pm}: SFA {s[0]:.1f}% MFA {s[1]:.1f}%"
                    for pm, s in zip(fit.pat_max, fit.savings))
    dl = ", ".join(f"{d:.2f}%" for d in fit.mfa_vs_sfa)
    return (f"chain={' > '.join(fit.chain)} | savings {sav} | MFA vs SFA {dl} | "
            f"residuals first={fit.first_residual:.2f} last={fit.last_residual:.2f} "
            f"admissible={fit.admissible}")
