"""GPON access tree plus the metro/core chain to the cloud."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import catalog as cat
from .catalog import DeviceCatalog

# Layer-by-layer reading of the end-to-end network: metro, core, metro, cloud.
LAYERED_CHAIN = (
    cat.AGG_SWITCH,
    cat.AGG_ROUTER,
    cat.CORE_ROUTER,
    cat.CORE_ROUTER,
    cat.AGG_ROUTER,
    cat.CLOUD_SWITCH,
)

# Best fit of the saving trends over calibration.ChainSpace (see README).
DEFAULT_CHAIN = (
    cat.AGG_SWITCH,
    cat.AGG_ROUTER,
    cat.AGG_ROUTER,
    cat.CLOUD_SWITCH,
)

OLT_ID = "OLT"
STORAGE_ID = "STORAGE"
CONTENT_SERVER_ID = "CONTENT_SERVER"


class Layer(enum.Enum):
    ACCESS_POINT = "AccessPoint"
    ONT = "ONT"
    OLT = "OLT"
    METRO = "Metro"
    CORE = "Core"
    CLOUD = "Cloud"


class TopologyError(ValueError):
    pass


class RoutingError(TopologyError):
    pass


@dataclass(frozen=True)
class Node:
    id: str
    device_class: str
    layer: Layer


@dataclass(frozen=True)
class Link:
    src: str
    dst: str
    capacity: float
    hc_capacity_override: float | None = None


@dataclass(frozen=True)
class Path:
    nodes: tuple[str, ...]
    links: tuple[Link, ...]

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class GponParams:
    n_aps: int = 32
    n_patients: int = 200
    gpon_trunk_capacity: float = 2.5e9
    metro_core_hops: tuple[str, ...] = DEFAULT_CHAIN
    # healthcare capacity of each OLT->ONT link; None falls back to hc_share x capacity
    downstream_hc_override: float | None = 468_750.0
    upstream_hc_override: float | None = None
    fractional_patients: bool = False


@dataclass(frozen=True, eq=False)
class Topology:
    nodes: Mapping[str, Node]
    links: Mapping[tuple[str, str], Link]
    candidate_sites: tuple[str, ...]
    cloud_nodes: tuple[str, ...]
    patients_per_ap: Mapping[str, float]
    aps: tuple[str, ...]
    home_ont: Mapping[str, str]
    chain: tuple[str, ...]
    olt: str = OLT_ID
    storage: str = STORAGE_ID
    content_server: str = CONTENT_SERVER_ID
    _parent: Mapping[str, str | None] = field(default_factory=dict, repr=False)
    _depth: Mapping[str, int] = field(default_factory=dict, repr=False)

    @property
    def onts(self) -> tuple[str, ...]:
        return tuple(s for s in self.candidate_sites if s != self.olt)

    @property
    def n_patients(self) -> float:
        return sum(self.patients_per_ap.values())

    def ap_of(self, ont: str) -> str | None:
        for ap, o in self.home_ont.items():
            if o == ont:
                return ap
        return None

    def device_class(self, node_id: str) -> str:
        return self.nodes[node_id].device_class

    def link(self, src: str, dst: str) -> Link:
        try:
            return self.links[(src, dst)]
        except KeyError:
            raise RoutingError(f"no link {src}->{dst}") from None


def _distribute(n_patients: int, n_aps: int, fractional: bool) -> list[float]:
    if fractional:
        return [n_patients / n_aps] * n_aps
    base, extra = divmod(n_patients, n_aps)
    return [base + 1 if i < extra else base for i in range(n_aps)]


def _chain_layer(i: int, chain: tuple[str, ...]) -> Layer:
    cores = [j for j, c in enumerate(chain) if c == cat.CORE_ROUTER]
    if not cores:
        return Layer.METRO if i < len(chain) - 1 else Layer.CLOUD
    if i < cores[0]:
        return Layer.METRO
    if i <= cores[-1]:
        return Layer.CORE
    return Layer.CLOUD


def build_gpon(params: GponParams, catalog: DeviceCatalog) -> Topology:
    if params.n_aps <= 0:
        raise TopologyError(f"n_aps must be positive, got {params.n_aps}")
    if params.n_patients < 0:
        raise TopologyError(f"n_patients must be non-negative, got {params.n_patients}")
    if not params.metro_core_hops:
        raise TopologyError("metro_core_hops must be non-empty")
    if params.gpon_trunk_capacity <= 0:
        raise TopologyError("gpon_trunk_capacity must be positive")
    needed = {cat.ACCESS_POINT, cat.ONT, cat.OLT, cat.CLOUD_STORAGE, cat.CONTENT_SERVER,
              *params.metro_core_hops}
    missing = sorted(needed - set(catalog.entries))
    if missing:
        raise TopologyError(f"device classes missing from catalog: {missing}")
    for c in params.metro_core_hops:
        if catalog[c].capacity is None:
            raise TopologyError(f"chain class {c!r} has no transport capacity")

    nodes: dict[str, Node] = {}
    links: dict[tuple[str, str], Link] = {}
    parent: dict[str, str | None] = {OLT_ID: None}

    def add_edge(child: str, par: str, up: float, down: float,
                 up_override: float | None = None, down_override: float | None = None) -> None:
        for cap_, ov in ((up, up_override), (down, down_override)):
            if ov is not None and ov > cap_:
                raise TopologyError(f"override {ov} exceeds capacity {cap_} on {child}<->{par}")
        links[(child, par)] = Link(child, par, up, up_override)
        links[(par, child)] = Link(par, child, down, down_override)
        parent[child] = par

    nodes[OLT_ID] = Node(OLT_ID, cat.OLT, Layer.OLT)
    per_ont = params.gpon_trunk_capacity / params.n_aps
    counts = _distribute(params.n_patients, params.n_aps, params.fractional_patients)
    ap_cap = catalog[cat.ACCESS_POINT].capacity
    aps, onts, home = [], [], {}
    patients: dict[str, float] = {}
    for i in range(params.n_aps):
        ap, ont = f"AP_{i}", f"ONT_{i}"
        nodes[ap] = Node(ap, cat.ACCESS_POINT, Layer.ACCESS_POINT)
        nodes[ont] = Node(ont, cat.ONT, Layer.ONT)
        add_edge(ont, OLT_ID, per_ont, per_ont,
                 params.upstream_hc_override, params.downstream_hc_override)
        add_edge(ap, ont, ap_cap, ap_cap)
        aps.append(ap)
        onts.append(ont)
        home[ap] = ont
        patients[ap] = counts[i]

    chain_ids = []
    prev, prev_cap = OLT_ID, catalog[cat.OLT].capacity
    for i, cls in enumerate(params.metro_core_hops):
        nid = f"HOP_{i}"
        nodes[nid] = Node(nid, cls, _chain_layer(i, params.metro_core_hops))
        cap_ = min(prev_cap, catalog[cls].capacity)
        add_edge(nid, prev, cap_, cap_)
        chain_ids.append(nid)
        prev, prev_cap = nid, catalog[cls].capacity

    nodes[STORAGE_ID] = Node(STORAGE_ID, cat.CLOUD_STORAGE, Layer.CLOUD)
    add_edge(STORAGE_ID, prev, prev_cap, prev_cap)
    nodes[CONTENT_SERVER_ID] = Node(CONTENT_SERVER_ID, cat.CONTENT_SERVER, Layer.CLOUD)
    cs_cap = min(prev_cap, catalog[cat.CONTENT_SERVER].capacity)
    add_edge(CONTENT_SERVER_ID, prev, cs_cap, cs_cap)

    depth: dict[str, int] = {}

    def _d(n: str) -> int:
        if n not in depth:
            p = parent[n]
            depth[n] = 0 if p is None else _d(p) + 1
        return depth[n]

    for n in nodes:
        _d(n)

    cloud = tuple(c for c in chain_ids if nodes[c].layer is Layer.CLOUD) + (
        CONTENT_SERVER_ID, STORAGE_ID)
    return Topology(
        nodes=nodes,
        links=links,
        candidate_sites=tuple(onts) + (OLT_ID,),
        cloud_nodes=cloud,
        patients_per_ap=patients,
        aps=tuple(aps),
        home_ont=home,
        chain=tuple(chain_ids),
        _parent=parent,
        _depth=depth,
    )


def route(topology: Topology, src: str, dst: str) -> Path:
    """Unique simple path between two nodes of the tree."""
    for n in (src, dst):
        if n not in topology.nodes:
            raise RoutingError(f"unknown node {n!r}")
    parent, depth = topology._parent, topology._depth
    up, down = [src], [dst]
    a, b = src, dst
    while depth[a] > depth[b]:
        a = parent[a]
        up.append(a)
    while depth[b] > depth[a]:
        b = parent[b]
        down.append(b)
    while a != b:
        a, b = parent[a], parent[b]
        if a is None or b is None:
            raise RoutingError(f"{src} and {dst} are disconnected")
        up.append(a)
        down.append(b)
    nodes = tuple(up + down[-2::-1])
    links = tuple(topology.link(u, v) for u, v in zip(nodes, nodes[1:]))
    return Path(nodes, links)


def link_hc_capacity(link: Link, catalog: DeviceCatalog) -> float:
    if link.hc_capacity_override is not None:
        return link.hc_capacity_override
    return catalog.hc_share * link.capacity


def candidate_sites(topology: Topology) -> list[str]:
    return list(topology.candidate_sites)


def uplink_hc_share(topology: Topology, catalog: DeviceCatalog) -> float:
    """Tightest healthcare capacity on any candidate-site -> storage route."""
    best = float("inf")
    for s in topology.candidate_sites:
        for ln in route(topology, s, topology.storage).links:
            best = min(best, link_hc_capacity(ln, catalog))
    return best


def dump_topology_csv(topology: Topology, catalog: DeviceCatalog) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from", "to", "capacity_bps", "hc_capacity_bps"])
    for (src, dst), ln in topology.links.items():
        w.writerow([src, dst, f"{ln.capacity:.6g}", f"{link_hc_capacity(ln, catalog):.6g}"])
    return buf.getvalue()


def iter_links(paths: Iterable[Path]) -> Iterable[Link]:
    for p in paths:
        yield from p.links
