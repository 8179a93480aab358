"""Run configuration: strict JSON loading with full defaults."""

from __future__ import annotations

import hashlib
import json
import os
import types
import typing
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from . import catalog as cat
from .catalog import DeviceCatalog, DeviceSpec, Sharing, default_catalog, validate_catalog
from .energy import EnergyOptions
from .scenario import ScenarioParams
from .solution import Mode
from .topology import GponParams, TopologyError, build_gpon

DEFAULT_PAT_MAX = (50, 100, 150, 200)
DEFAULT_MODES = (Mode.SFA, Mode.MFA, Mode.CA)
FORMATS = ("csv", "json")
CATALOG_FIELDS = ("p_max", "capacity", "idle_fraction", "sharing", "storage_bits")
# n_patients and pat_max come from the gpon section and the pat_max list
SCENARIO_EXCLUDED = ("pat_max", "n_patients")


class ConfigError(ValueError):
    """Bad configuration; the message names the offending key or position."""


@dataclass(frozen=True)
class RunConfig:
    catalog_overrides: Mapping[str, Mapping[str, Any]] = field(default_factory=dict)
    hc_share: float = 0.003
    gpon: GponParams = GponParams()
    scenario: ScenarioParams = ScenarioParams(pat_max=1)
    pat_max: tuple[int, ...] = DEFAULT_PAT_MAX
    modes: tuple[Mode, ...] = DEFAULT_MODES
    energy: EnergyOptions = EnergyOptions()
    format: str = "csv"
    out: str | None = None

    def catalog(self) -> DeviceCatalog:
        return default_catalog().with_overrides(self.catalog_overrides, self.hc_share)

    def scenario_params(self, pat_max: int) -> ScenarioParams:
        from dataclasses import replace

        return replace(self.scenario, pat_max=pat_max, n_patients=self.gpon.n_patients)

    def to_dict(self) -> dict:
        scen = {k: v for k, v in asdict(self.scenario).items() if k not in SCENARIO_EXCLUDED}
        gpon = asdict(self.gpon)
        gpon["metro_core_hops"] = list(self.gpon.metro_core_hops)
        return {
            "catalog": {k: dict(v) for k, v in sorted(self.catalog_overrides.items())},
            "hc_share": self.hc_share,
            "gpon": gpon,
            "scenario": scen,
            "pat_max": list(self.pat_max),
            "modes": [m.value for m in self.modes],
            "energy": asdict(self.energy),
            "format": self.format,
            "out": self.out,
        }

    def digest(self) -> str:
        """SHA-256 of the effective configuration; the output path is left out."""
        d = self.to_dict()
        d.pop("out")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# -- typed field coercion ----------------------------------------------------

def _coerce(value: Any, hint: Any, where: str) -> Any:
    origin = typing.get_origin(hint)
    if origin in (typing.Union, types.UnionType):
        for arm in typing.get_args(hint):
            try:
                return _coerce(value, arm, where)
            except ConfigError:
                pass
        raise ConfigError(f"{where}: value {value!r} has the wrong type")
    if hint is type(None):
        if value is None:
            return None
        raise ConfigError(f"{where}: expected null")
    if hint is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"{where}: expected a boolean, got {value!r}")
    if hint is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if hint is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if hint is str:
        if isinstance(value, str):
            return value
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    if origin is tuple:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        (item, _) = typing.get_args(hint)
        return tuple(_coerce(v, item, f"{where}[{i}]") for i, v in enumerate(value))
    raise ConfigError(f"{where}: unsupported field type {hint!r}")


def _section(cls: type, data: Any, where: str, exclude: tuple[str, ...] = (), **fixed) -> Any:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    hints = typing.get_type_hints(cls)
    allowed = {f.name for f in fields(cls)} - set(exclude)
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key {where}.{key}" if where else f"unknown key {key}")
    kwargs = dict(fixed)
    for name, value in data.items():
        kwargs[name] = _coerce(value, hints[name], f"{where}.{name}")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _catalog_overrides(data: Any, hc_share: float) -> dict[str, dict[str, Any]]:
    if not isinstance(data, dict):
        raise ConfigError("catalog: expected an object keyed by device class")
    hints = typing.get_type_hints(DeviceSpec)
    out: dict[str, dict[str, Any]] = {}
    for name, entry in data.items():
        if name not in cat.REQUIRED_CLASSES:
            raise ConfigError(f"unknown key catalog.{name}")
        if not isinstance(entry, dict):
            raise ConfigError(f"catalog.{name}: expected an object")
        fixed: dict[str, Any] = {}
        for key, value in entry.items():
            where = f"catalog.{name}.{key}"
            if key not in CATALOG_FIELDS:
                raise ConfigError(f"unknown key {where}")
            if key == "sharing":
                try:
                    fixed[key] = Sharing(value).value
                except ValueError:
                    raise ConfigError(f"{where}: expected one of "
                                      f"{[s.value for s in Sharing]}") from None
            else:
                fixed[key] = _coerce(value, hints[key], where)
        out[name] = fixed
    report = validate_catalog(default_catalog().with_overrides(out, hc_share))
    if report:
        v = report.violations[0]
        raise ConfigError(f"catalog.{v.entity}: {v.rule} {v.detail}".rstrip())
    return out


def _energy(data: Any) -> EnergyOptions:
    opts = _section(EnergyOptions, data, "energy")
    w = opts.server_idle_window
    if isinstance(w, str) and w not in ("t_total", "t_total+t_cloud"):
        raise ConfigError("energy.server_idle_window: expected 't_total', 't_total+t_cloud' "
                          "or a number of seconds")
    if isinstance(w, float) and w <= 0:
        raise ConfigError("energy.server_idle_window: must be positive")
    s = opts.cloud_idle_share
    if s is not None and not 0.0 <= s <= 1.0:
        raise ConfigError("energy.cloud_idle_share: must lie in [0, 1]")
    return opts


TOP_KEYS = ("catalog", "hc_share", "gpon", "scenario", "pat_max", "modes", "energy",
            "format", "out")


def parse_config(data: Any) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a JSON object")
    for key in data:
        if key not in TOP_KEYS:
            raise ConfigError(f"unknown key {key}")
    hc_share = _coerce(data.get("hc_share", 0.003), float, "hc_share")
    if not 0.0 < hc_share <= 1.0:
        raise ConfigError("hc_share: must lie in (0, 1]")
    overrides = _catalog_overrides(data.get("catalog", {}), hc_share)
    gpon = _section(GponParams, data.get("gpon", {}), "gpon")
    if gpon.n_aps < 1:
        raise ConfigError("gpon.n_aps: must be >= 1")
    if gpon.n_patients < 0:
        raise ConfigError("gpon.n_patients: must be >= 0")
    if gpon.gpon_trunk_capacity <= 0:
        raise ConfigError("gpon.gpon_trunk_capacity: must be positive")
    for i, hop in enumerate(gpon.metro_core_hops):
        if hop not in cat.REQUIRED_CLASSES:
            raise ConfigError(f"gpon.metro_core_hops[{i}]: unknown device class {hop!r}")
    try:
        build_gpon(gpon, default_catalog().with_overrides(overrides, hc_share))
    except TopologyError as exc:
        raise ConfigError(f"gpon: {exc}") from None
    scen = _section(ScenarioParams, data.get("scenario", {}), "scenario",
                    exclude=SCENARIO_EXCLUDED, pat_max=1)
    try:
        scen.validate()
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None
    pat_max = _coerce(data.get("pat_max", list(DEFAULT_PAT_MAX)), tuple[int, ...], "pat_max")
    for i, pm in enumerate(pat_max):
        if pm < 1:
            raise ConfigError(f"pat_max[{i}]: must be >= 1")
    raw_modes = _coerce(data.get("modes", [m.value for m in DEFAULT_MODES]),
                        tuple[str, ...], "modes")
    modes = []
    for i, m in enumerate(raw_modes):
        try:
            modes.append(Mode(m))
        except ValueError:
            raise ConfigError(f"modes[{i}]: expected one of SFA, MFA, CA") from None
    fmt = _coerce(data.get("format", "csv"), str, "format")
    if fmt not in FORMATS:
        raise ConfigError(f"format: expected one of {FORMATS}")
    out = _coerce(data.get("out"), str | None, "out")
    return RunConfig(overrides, hc_share, gpon, scen, pat_max, tuple(modes),
                     _energy(data.get("energy", {})), fmt, out)


def load_config(path: str | os.PathLike | None) -> RunConfig:
    """Read a JSON config; None gives the defaults."""
    if path is None:
        return RunConfig()
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: parse error at line {exc.lineno}, column {exc.colno}: "
                          f"{exc.msg}") from None
    return parse_config(data)


def check_writable(path: str | None) -> None:
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise ConfigError(f"out: directory {parent} is not writable")


__all__ = ["ConfigError", "RunConfig", "check_writable", "load_config", "parse_config"]
