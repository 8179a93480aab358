"""Device power/capacity catalog and the two-part attributable power function."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping


class Sharing(enum.Enum):
    SHARED_NETWORK = "SharedNetwork"
    DEDICATED_SERVER = "DedicatedServer"


NETWORK_IDLE_FRACTION = 0.9
SERVER_IDLE_FRACTION = 0.54
DEFAULT_HC_SHARE = 0.003

ACCESS_POINT = "access point"
ONT = "ONT"
OLT = "OLT"
AGG_SWITCH = "aggregation switch"
PROCESSING_SERVER = "processing server"
CLOUD_SWITCH = "cloud switch"
CLOUD_STORAGE = "cloud storage"
CORE_ROUTER = "core router"
CONTENT_SERVER = "content server"
AGG_ROUTER = "aggregation/cloud router"

REQUIRED_CLASSES = (
    ACCESS_POINT,
    ONT,
    OLT,
    AGG_SWITCH,
    PROCESSING_SERVER,
    CLOUD_SWITCH,
    CLOUD_STORAGE,
    CORE_ROUTER,
    CONTENT_SERVER,
    AGG_ROUTER,
)

GBPS = 1e9
TERABYTE_BITS = 8e12


class DomainError(ValueError):
    """Raised when an argument lies outside the function's domain."""


@dataclass(frozen=True)
class DeviceSpec:
    """One device class.

    ``capacity`` is a transport rate in bit/s and is ``None`` for the
    processing server, whose capacity is the per-server patient cap.
    ``storage_bits`` is only set for storage devices.
    """

    name: str
    p_max: float
    capacity: float | None
    idle_fraction: float
    sharing: Sharing = Sharing.SHARED_NETWORK
    storage_bits: float | None = None


@dataclass(frozen=True)
class DeviceCatalog:
    entries: Mapping[str, DeviceSpec]
    hc_share: float = DEFAULT_HC_SHARE

    def __getitem__(self, name: str) -> DeviceSpec:
        return self.entries[name]

    def __contains__(self, name: object) -> bool:
        return name in self.entries

    def with_overrides(self, overrides: Mapping[str, Mapping[str, object]] | None = None,
                       hc_share: float | None = None) -> "DeviceCatalog":
        """Return a copy with per-class field overrides applied."""
        entries = dict(self.entries)
        for name, fields in (overrides or {}).items():
            base = entries.get(name)
            if base is None:
                raise KeyError(f"unknown device class {name!r}")
            kwargs = dict(fields)
            if "sharing" in kwargs and not isinstance(kwargs["sharing"], Sharing):
                kwargs["sharing"] = Sharing(kwargs["sharing"])
            entries[name] = replace(base, **kwargs)
        return DeviceCatalog(entries, self.hc_share if hc_share is None else hc_share)

    def scaled(self, k: float) -> "DeviceCatalog":
        """Every p_max multiplied by ``k``."""
        return DeviceCatalog({n: replace(s, p_max=s.p_max * k) for n, s in self.entries.items()},
                             self.hc_share)


def _net(name: str, p_max: float, capacity: float) -> DeviceSpec:
    return DeviceSpec(name, p_max, capacity, NETWORK_IDLE_FRACTION)


def default_catalog() -> DeviceCatalog:
    rows = [
        _net(ACCESS_POINT, 21.0, 0.3 * GBPS),
        _net(ONT, 8.0, 3.75 * GBPS),
        _net(OLT, 20.0, 128 * GBPS),
        _net(AGG_SWITCH, 1766.0, 256 * GBPS),
        DeviceSpec(PROCESSING_SERVER, 3.96, None, SERVER_IDLE_FRACTION, Sharing.DEDICATED_SERVER),
        _net(CLOUD_SWITCH, 2020.0, 320 * GBPS),
        DeviceSpec(CLOUD_STORAGE, 4900.0, None, NETWORK_IDLE_FRACTION,
                   storage_bits=75.6 * TERABYTE_BITS),
        _net(CORE_ROUTER, 12300.0, 4480 * GBPS),
        _net(CONTENT_SERVER, 380.8, 1.8 * GBPS),
        _net(AGG_ROUTER, 4550.0, 560 * GBPS),
    ]
    return DeviceCatalog({s.name: s for s in rows}, DEFAULT_HC_SHARE)


def attributable_power(spec: DeviceSpec, utilization: float, idle_share: float) -> float:
    """Power (W) attributed to one application on ``spec``.

    The idle floor is scaled by ``idle_share``; the load-proportional part
    covers the remaining ``1 - idle_fraction`` of p_max.
    """
    if not 0.0 <= utilization <= 1.0:
        raise DomainError(f"utilization {utilization!r} outside [0, 1] for {spec.name}")
    if not 0.0 <= idle_share <= 1.0:
        raise DomainError(f"idle_share {idle_share!r} outside [0, 1]")
    return (idle_share * spec.idle_fraction * spec.p_max
            + (1.0 - spec.idle_fraction) * spec.p_max * utilization)


@dataclass(frozen=True)
class Violation:
    entity: str
    rule: str
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def __bool__(self) -> bool:  # truthy when there is something to report
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def names(self) -> set[str]:
        return {v.entity for v in self.violations}


def validate_catalog(catalog: DeviceCatalog) -> ValidationReport:
    report = ValidationReport()
    add = report.violations.append
    for name in REQUIRED_CLASSES:
        if name not in catalog.entries:
            add(Violation(name, "required class present", "missing"))
    if not 0.0 < catalog.hc_share <= 1.0:
        add(Violation("hc_share", "0 < hc_share <= 1", repr(catalog.hc_share)))
    for name, spec in catalog.entries.items():
        if not spec.p_max > 0:
            add(Violation(name, "p_max > 0", repr(spec.p_max)))
        if not 0.0 <= spec.idle_fraction <= 1.0:
            add(Violation(name, "0 <= idle_fraction <= 1", repr(spec.idle_fraction)))
        if spec.capacity is not None and not spec.capacity > 0:
            add(Violation(name, "capacity > 0", repr(spec.capacity)))
        if spec.storage_bits is not None and not spec.storage_bits > 0:
            add(Violation(name, "storage_bits > 0", repr(spec.storage_bits)))
    return report
