"""Command-line entry point: derive, solve, compare, dump-topology, export-lp, oracle-check."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Any, Sequence

from .config import ConfigError, RunConfig, check_writable, load_config
from .energy import EnergyBreakdown, ca_placement, evaluate
from .instance import Instance, make_instance
from .placement import export_lp, formulate, solve
from .placement.solver import SolverInvariantError
from .scenario import InfeasibleDeadline, scenario_table
from .solution import Mode, Optimality, PlacementSolution
from .topology import build_gpon, dump_topology_csv, uplink_hc_share

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_INVARIANT = 4

DERIVE_COLUMNS = ("scenario", "pat_max", "t_pa_s", "t_t_s", "r_ps_kbps", "r_cloud_kbps",
                  "t_cloud_s")
COMPARE_COLUMNS = ("scenario", "mode", "network_j", "processing_j", "total_j",
                   "saving_vs_ca_pct", "mfa_vs_sfa_pct")
SUMMARY_COLUMNS = ("site", "servers", "patients")


class Infeasible(RuntimeError):
    pass


class InvariantFailure(RuntimeError):
    pass


def sig6(x: float) -> str:
    """Six significant digits in plain positional notation."""
    return _plain(_round6(x))


def _round6(x: float) -> Decimal:
    if not math.isfinite(x):
        raise ValueError(f"cannot format {x}")
    d = Decimal(repr(float(x)))
    if d == 0:
        return Decimal(0)
    return d.quantize(Decimal(1).scaleb(d.adjusted() - 5), rounding=ROUND_HALF_EVEN)


def _plain(d: Decimal) -> str:
    s = format(d.normalize(), "f")
    return "0" if s in ("-0", "0") else s


@dataclass
class Report:
    """Rows of one subcommand, renderable as CSV or JSON."""

    command: str
    config_hash: str
    columns: tuple[str, ...]
    rows: list[dict[str, Any]] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)
    comments: list[str] = field(default_factory=list)

    def header(self) -> str:
        return f"# fogplace {self.command} config_sha256={self.config_hash}"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.header() + "\n")
        for c in self.comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {"command": self.command, "config_sha256": self.config_hash,
                   "rows": self.rows, **self.extra}
        return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _json_default(v: Any) -> Any:
    if isinstance(v, Decimal):
        return float(v)
    raise TypeError(f"not serialisable: {v!r}")


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, Decimal):
        return _plain(v)
    if isinstance(v, float):
        return "nan" if math.isnan(v) else sig6(v)
    return str(v)


def _threads() -> int:
    raw = os.environ.get("FOGPLACE_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FOGPLACE_THREADS: expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"FOGPLACE_THREADS: expected a positive integer, got {raw!r}")
    return n


def instance_for(config: RunConfig, pat_max: int) -> Instance:
    try:
        return make_instance(pat_max, gpon=config.gpon, catalog=config.catalog(),
                             base=config.scenario_params(pat_max), options=config.energy)
    except InfeasibleDeadline as exc:
        raise Infeasible(f"pat_max={pat_max}: {exc}") from exc


def resolve_scenario(config: RunConfig, ident: str) -> tuple[str, int]:
    """Accept 'S2' or '2' (1-based position in the pat_max list)."""
    s = ident.strip()
    num = s[1:] if s[:1] in ("S", "s") else s
    if not num.isdigit() or not 1 <= int(num) <= len(config.pat_max):
        raise ConfigError(f"--scenario: {ident!r} is not one of "
                          f"S1..S{len(config.pat_max)}")
    i = int(num)
    return f"S{i}", config.pat_max[i - 1]


def solve_cell(config: RunConfig, pat_max: int, mode: Mode) -> tuple[PlacementSolution, EnergyBreakdown]:
    inst = instance_for(config, pat_max)
    if mode is Mode.CA:
        sol = ca_placement(inst.topology, pat_max)
    else:
        try:
            sol = solve(formulate(inst.topology, inst.scenario, mode, inst.catalog, inst.options))
        except SolverInvariantError as exc:
            raise InvariantFailure(str(exc)) from exc
        if sol.optimality is Optimality.INFEASIBLE:
            raise Infeasible(f"pat_max={pat_max} {mode.value}: {sol.infeasible_reason}")
    br = evaluate(inst.topology, inst.scenario, sol, inst.catalog, inst.options)
    sol.objective_j = br.total_j
    return sol, br


# -- subcommands ---------------------------------------------------------------

def run_derive(config: RunConfig) -> Report:
    share = uplink_hc_share(build_gpon(config.gpon, config.catalog()), config.catalog())
    rows = []
    try:
        table = scenario_table(config.pat_max, config.scenario_params(1), share)
    except InfeasibleDeadline as exc:
        raise Infeasible(str(exc)) from exc
    for r in table:
        rows.append({"scenario": r.label, "pat_max": r.pat_max, "t_pa_s": r.t_pa_s,
                     "t_t_s": r.t_t_s, "r_ps_kbps": r.r_ps_kbps,
                     "r_cloud_kbps": r.r_cloud_kbps, "t_cloud_s": r.t_cloud_s})
    return Report("derive", config.digest(), DERIVE_COLUMNS, rows)


def run_solve(config: RunConfig, scenario: str, mode: Mode) -> Report:
    label, pm = resolve_scenario(config, scenario)
    sol, br = solve_cell(config, pm, mode)
    rows = []
    if mode is Mode.CA:
        inst_n = sum(n for n in sol.assignment.values())
        site = next(iter(sol.assignment))[1] if sol.assignment else "CONTENT_SERVER"
        rows.append({"site": site, "servers": sol.cloud_servers, "patients": _num(inst_n)})
    else:
        loads = sol.site_loads()
        for site, k in sol.servers_per_site.items():
            if k:
                rows.append({"site": site, "servers": k, "patients": _num(loads.get(site, 0))})
    comments = [f"scenario={label} pat_max={pm} mode={mode.value} "
                f"objective_j={sig6(sol.objective_j)} optimality={sol.optimality.value}"]
    extra = {"scenario": label, "solution": sol.to_json_dict(), "energy": br.to_json_dict()}
    return Report("solve", config.digest(), SUMMARY_COLUMNS, rows, extra, comments)


def _num(x: float) -> int | float:
    return int(x) if float(x).is_integer() else float(x)


def run_compare(config: RunConfig) -> Report:
    if not config.pat_max or not config.modes:
        raise ConfigError("compare needs at least one scenario and one mode")
    cells = [(i, pm, m) for i, pm in enumerate(config.pat_max) for m in config.modes]
    needed = list(cells)
    # savings need the CA reference and the delta needs SFA even when not listed
    for i, pm in enumerate(config.pat_max):
        for m in (Mode.CA, Mode.SFA):
            if (i, pm, m) not in needed:
                needed.append((i, pm, m))
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(lambda c: solve_cell(config, c[1], c[2])[1], needed))
    by_cell = dict(zip(needed, results))
    rows = []
    for cell in cells:
        i, pm, mode = cell
        br = by_cell[cell]
        net, proc = _round6(br.network_j), _round6(br.processing_j)
        ca = by_cell[(i, pm, Mode.CA)].total_j
        sfa = by_cell[(i, pm, Mode.SFA)].total_j
        saving = None if mode is Mode.CA or ca == 0 else 100.0 * (1.0 - br.total_j / ca)
        delta = None
        if mode is Mode.MFA:
            delta = 0.0 if br.total_j == sfa else 100.0 * (1.0 - br.total_j / sfa)
        rows.append({"scenario": f"S{i + 1}", "pat_max": pm, "mode": mode.value,
                     "network_j": net, "processing_j": proc, "total_j": net + proc,
                     "saving_vs_ca_pct": saving, "mfa_vs_sfa_pct": delta,
                     "_exact": br})
    report = Report("compare", config.digest(), COMPARE_COLUMNS, rows)
    # unrounded breakdowns ride along in the JSON form only
    report.extra["exact"] = [
        {"scenario": r["scenario"], "mode": r["mode"], **r.pop("_exact").to_json_dict()}
        for r in rows]
    return report


def run_dump_topology(config: RunConfig) -> Report:
    cat_ = config.catalog()
    topo = build_gpon(config.gpon, cat_)
    text = dump_topology_csv(topo, cat_)
    reader = csv.DictReader(io.StringIO(text))
    rows = [dict(r) for r in reader]
    return Report("dump-topology", config.digest(), tuple(reader.fieldnames or ()), rows)


def run_export_lp(config: RunConfig, scenario: str, mode: Mode) -> str:
    label, pm = resolve_scenario(config, scenario)
    inst = instance_for(config, pm)
    model = formulate(inst.topology, inst.scenario, mode, inst.catalog, inst.options)
    head = (f"\\ fogplace export-lp config_sha256={config.digest()} "
            f"scenario={label} pat_max={pm} mode={mode.value}\n")
    return head + export_lp(model)


def run_oracle_check(config: RunConfig, seed: int, instances: int) -> Report:
    from .oracle import equivalence_check, random_cases

    rep = equivalence_check(random_cases(seed, instances))
    rows = [{"case": r.label, "passed": r.passed, "solver_j": r.solver_objective,
             "oracle_j": r.oracle_objective} for r in rep.results]
    report = Report("oracle-check", config.digest(), ("case", "passed", "solver_j", "oracle_j"),
                    rows, comments=[f"seed={seed} instances={instances} "
                                    f"passed={sum(r.passed for r in rep.results)}"])
    report.extra["all_passed"] = rep.all_passed
    report.extra["first_failure"] = rep.first_failure
    return report


# -- argument handling -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--format", choices=("csv", "json"), help="report format")
    common.add_argument("--out", help="write the report here instead of stdout")
    p = argparse.ArgumentParser(prog="fogplace", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("derive", parents=[common], help="timing and rate table")
    s = sub.add_parser("solve", parents=[common], help="optimal placement of one scenario")
    s.add_argument("--scenario", required=True, help="S1, S2, ... or 1, 2, ...")
    s.add_argument("--mode", required=True, type=Mode, choices=list(Mode))
    sub.add_parser("compare", parents=[common], help="energy of every scenario and mode")
    sub.add_parser("dump-topology", parents=[common], help="links and capacities as CSV")
    e = sub.add_parser("export-lp", parents=[common], help="write the MILP in LP format")
    e.add_argument("--scenario", required=True)
    e.add_argument("--mode", required=True, type=Mode, choices=list(Mode))
    o = sub.add_parser("oracle-check", parents=[common],
                       help="compare the solver with brute-force enumeration")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--instances", type=int, default=50)
    return p


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        fmt = args.format or config.format
        out = args.out if args.out is not None else config.out
        check_writable(out)
        if args.command == "derive":
            text = run_derive(config).render(fmt)
        elif args.command == "solve":
            text = run_solve(config, args.scenario, args.mode).render(fmt)
        elif args.command == "compare":
            text = run_compare(config).render(fmt)
        elif args.command == "dump-topology":
            text = run_dump_topology(config).render(fmt)
        elif args.command == "export-lp":
            text = run_export_lp(config, args.scenario, args.mode)
        else:
            if args.instances < 0:
                raise ConfigError("--instances must be >= 0")
            report = run_oracle_check(config, args.seed, args.instances)
            _emit(report.render(fmt), out)
            if not report.extra["all_passed"]:
                i = report.extra["first_failure"]
                print(f"oracle mismatch at case {i}: {report.rows[i]['case']}", file=sys.stderr)
                return EXIT_INVARIANT
            return EXIT_OK
        _emit(text, out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
