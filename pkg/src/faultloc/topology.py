"""Network topologies, component enumeration and simulator-side routing.

A component is a localizable fault site: either an end host or a router
interface.  Every router endpoint of a link owns one interface; host
endpoints own none (the host NIC is folded into the host component).

Interfaces are modelled as *egress* ports: a route lists the interface of
each traversed router on the link towards the next hop.  This matches the
fault injector semantics of corrupting packets sent out of an interface,
and it is what makes the two interfaces of one link distinguishable from
path measurements alone.
"""

from __future__ import annotations

import json
import re
from collections import deque
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path

import numpy as np

from .errors import TopologyError, UnknownPreset

PRESETS = ("internet2-like", "ring", "random")

_NUM_RE = re.compile(r"(\d+)")


def node_key(node_id: str):
    """Natural sort key, so that ``r2 < r10``."""
    return tuple(int(t) if t.isdigit() else t for t in _NUM_RE.split(node_id))


@dataclass(frozen=True)
class ComponentId:
    kind: str  # "host" or "iface"
    index: int
    node: str
    link: int | None = None
    peer: str | None = None

    @property
    def label(self) -> str:
        if self.kind == "host":
            return self.node
        return f"{self.node}:{self.peer}"


@dataclass(frozen=True)
class Topology:
    name: str
    hosts: tuple[str, ...]
    routers: tuple[str, ...]
    links: tuple[tuple[str, str], ...]
    _components: tuple[ComponentId, ...] = field(init=False, repr=False, compare=False)
    _adjacency: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hosts", tuple(self.hosts))
        object.__setattr__(self, "routers", tuple(self.routers))
        object.__setattr__(self, "links", tuple((str(a), str(b)) for a, b in self.links))
        self._validate()
        object.__setattr__(self, "_adjacency", self._build_adjacency())
        if not self._is_connected():
            raise TopologyError(f"topology {self.name!r} is not connected")
        object.__setattr__(self, "_components", self._enumerate_components())

    def _validate(self):
        nodes = list(self.hosts) + list(self.routers)
        if len(set(nodes)) != len(nodes):
            raise TopologyError("node ids must be unique")
        if not self.hosts:
            raise TopologyError("topology needs at least one host")
        known = set(nodes)
        seen = set()
        for i, (a, b) in enumerate(self.links):
            if a not in known or b not in known:
                raise TopologyError(f"link {i} ({a}, {b}) names an unknown node")
            if a == b:
                raise TopologyError(f"link {i} is a self loop on {a}")
            key = frozenset((a, b))
            if key in seen:
                raise TopologyError(f"duplicate link between {a} and {b}")
            seen.add(key)

    def _build_adjacency(self):
        adj = {n: [] for n in (*self.hosts, *self.routers)}
        for i, (a, b) in enumerate(self.links):
            adj[a].append((b, i))
            adj[b].append((a, i))
        for n in adj:
            adj[n].sort(key=lambda t: node_key(t[0]))
        return adj

    def _is_connected(self):
        start = self.hosts[0]
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v, _ in self._adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == len(self._adjacency)

    def _enumerate_components(self):
        router_set = set(self.routers)
        comps = []
        for h in sorted(self.hosts, key=node_key):
            comps.append(ComponentId("host", len(comps), h))
        ifaces = []
        for i, (a, b) in enumerate(self.links):
            if a in router_set:
                ifaces.append((a, i, b))
            if b in router_set:
                ifaces.append((b, i, a))
        ifaces.sort(key=lambda t: (node_key(t[0]), t[1]))
        for router, link, peer in ifaces:
            comps.append(ComponentId("iface", len(comps), router, link, peer))
        return tuple(comps)

    def is_router(self, node: str) -> bool:
        return node in self.routers

    def neighbors(self, node: str):
        """(neighbor, link id) pairs sorted by neighbor id."""
        return self._adjacency[node]

    @property
    def n_interfaces(self) -> int:
        return len(self._components) - len(self.hosts)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "hosts": list(self.hosts),
            "routers": list(self.routers),
            "links": [{"a": a, "b": b} for a, b in self.links],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Topology":
        try:
            links = [(l["a"], l["b"]) for l in doc["links"]]
            return cls(doc.get("name", "custom"), doc["hosts"], doc["routers"], links)
        except (KeyError, TypeError) as exc:
            raise TopologyError(f"malformed topology document: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Topology":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def component_list(topology: Topology) -> list[ComponentId]:
    """Hosts first (by id), then router interfaces by (router id, link id)."""
    return list(topology._components)


def component_labels(topology: Topology) -> list[str]:
    return [c.label for c in topology._components]


# ---------------------------------------------------------------------------
# Presets

# Ten core routers (r0-r9) and five access routers (r10-r14), one end host
# per router.  36 router-router links -> 72 + 15 access = 87 interfaces.
_I2_CORE_RING = [(i, (i + 1) % 10) for i in range(10)]
_I2_CORE_CHORDS = [
    (0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (0, 3),
    (2, 6), (5, 8), (1, 9), (4, 7), (3, 6), (7, 9),
]
_I2_ACCESS_UPLINKS = [
    (10, 0), (10, 3), (11, 2), (11, 5), (12, 4),
    (12, 7), (13, 6), (13, 9), (14, 8), (14, 1),
]
_I2_ACCESS_LATERAL = [(10, 11), (11, 12), (12, 13), (13, 14)]


def _internet2_like() -> Topology:
    hosts = [f"h{i}" for i in range(15)]
    routers = [f"r{i}" for i in range(15)]
    links = [(f"h{i}", f"r{i}") for i in range(15)]
    for a, b in _I2_CORE_RING + _I2_CORE_CHORDS + _I2_ACCESS_UPLINKS + _I2_ACCESS_LATERAL:
        links.append((f"r{a}", f"r{b}"))
    return Topology("internet2-like", hosts, routers, links)


def _ring() -> Topology:
    hosts = [f"h{i}" for i in range(4)]
    routers = [f"r{i}" for i in range(4)]
    links = [(f"r{i}", f"r{(i + 1) % 4}") for i in range(4)]
    links += [(f"h{i}", f"r{i}") for i in range(4)]
    return Topology("ring", hosts, routers, links)


RANDOM_DEFAULTS = {"n_routers": 8, "n_hosts": 6, "edge_prob": 0.35, "max_retries": 100}


def _random(seed: int, params: dict | None) -> Topology:
    p = {**RANDOM_DEFAULTS, **(params or {})}
    unknown = set(p) - set(RANDOM_DEFAULTS)
    if unknown:
        raise TopologyError(f"unknown random-topology parameters: {sorted(unknown)}")
    n_r, n_h = int(p["n_routers"]), int(p["n_hosts"])
    if n_r < 1 or n_h < 2:
        raise TopologyError("random topology needs >= 1 router and >= 2 hosts")
    rng = np.random.Generator(np.random.PCG64(seed))
    routers = [f"r{i}" for i in range(n_r)]
    hosts = [f"h{i}" for i in range(n_h)]
    for _ in range(int(p["max_retries"])):
        links = [
            (routers[i], routers[j])
            for i in range(n_r)
            for j in range(i + 1, n_r)
            if rng.random() < p["edge_prob"]
        ]
        attach = rng.integers(0, n_r, size=n_h)
        links += [(h, routers[a]) for h, a in zip(hosts, attach)]
        try:
            return Topology(f"random-{seed}", hosts, routers, links)
        except TopologyError:
            continue
    raise TopologyError(
        f"random generator produced no connected graph in {p['max_retries']} attempts"
    )


def build_preset(preset_name: str, seed: int = 0, params: dict | None = None) -> Topology:
    """Build one of the named topologies.

    ``params`` is only consulted by the ``random`` preset (see
    ``RANDOM_DEFAULTS``); the other presets are fixed wirings.
    """
    if preset_name == "internet2-like":
        return _internet2_like()
    if preset_name == "ring":
        return _ring()
    if preset_name == "random":
        if seed is None:
            raise TopologyError("the random preset requires a seed")
        return _random(int(seed), params)
    raise UnknownPreset(f"unknown preset {preset_name!r}; expected one of {PRESETS}")


# ---------------------------------------------------------------------------
# Paths and routing


@dataclass(frozen=True)
class PathIndex:
    paths: tuple[tuple[str, str], ...]

    def __len__(self):
        return len(self.paths)

    @property
    def labels(self) -> list[str]:
        return [f"{s}>{d}" for s, d in self.paths]

    @classmethod
    def from_labels(cls, labels) -> "PathIndex":
        out = []
        for lab in labels:
            s, sep, d = lab.partition(">")
            if not sep:
                raise TopologyError(f"bad path label {lab!r}")
            out.append((s, d))
        return cls(tuple(out))


def path_index(topology: Topology) -> PathIndex:
    hosts = sorted(topology.hosts, key=node_key)
    return PathIndex(tuple(permutations(hosts, 2)))


@dataclass(frozen=True)
class Route:
    nodes: tuple[str, ...]
    components: tuple[int, ...]
    links: tuple[int, ...]


@dataclass(frozen=True)
class RoutingTable:
    routes: dict

    def __getitem__(self, pair) -> Route:
        return self.routes[pair]

    def __len__(self):
        return len(self.routes)


def _hop_distances(topology: Topology, dst: str) -> dict:
    # hosts other than the destination never forward traffic
    dist = {dst: 0}
    queue = deque([dst])
    while queue:
        u = queue.popleft()
        if u != dst and not topology.is_router(u):
            continue
        for v, _ in topology.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _shortest_route(topology: Topology, src: str, dst: str, dist: dict) -> list:
    if src not in dist:
        raise TopologyError(f"no route from {src} to {dst}")
    nodes, links = [src], []
    cur = src
    while cur != dst:
        for v, link in topology.neighbors(cur):
            if dist.get(v) == dist[cur] - 1 and (v == dst or topology.is_router(v)):
                nodes.append(v)
                links.append(link)
                cur = v
                break
        else:  # pragma: no cover - BFS guarantees a predecessor
            raise TopologyError(f"no route from {src} to {dst}")
    return nodes, links


def compute_routes(topology: Topology) -> RoutingTable:
    """Hop-count shortest routes between every ordered host pair.

    Among equal-length routes the one with the lexicographically smallest
    node sequence (natural id order) from the smaller host to the larger is
    chosen; the reverse direction reuses it backwards so both directions
    traverse the same links.
    """
    iface_of = {
        (c.node, c.link): c.index for c in topology._components if c.kind == "iface"
    }
    host_of = {c.node: c.index for c in topology._components if c.kind == "host"}
    hosts = sorted(topology.hosts, key=node_key)
    routes = {}
    for i, a in enumerate(hosts):
        for b in hosts[i + 1:]:
            nodes, links = _shortest_route(topology, a, b, _hop_distances(topology, b))
            for seq, lks in ((nodes, links), (nodes[::-1], links[::-1])):
                comps = [host_of[seq[0]]]
                comps += [iface_of[(seq[k], lks[k])] for k in range(1, len(seq) - 1)]
                comps.append(host_of[seq[-1]])
                routes[(seq[0], seq[-1])] = Route(tuple(seq), tuple(comps), tuple(lks))
    return RoutingTable(routes)


def incidence_matrix(topology: Topology, routes: RoutingTable | None = None,
                     paths: PathIndex | None = None) -> np.ndarray:
    """Boolean [paths x components] matrix: True where a route uses a component."""
    routes = routes or compute_routes(topology)
    paths = paths or path_index(topology)
    out = np.zeros((len(paths), len(topology._components)), dtype=bool)
    for p, pair in enumerate(paths.paths):
        out[p, list(routes[pair].components)] = True
    return out
