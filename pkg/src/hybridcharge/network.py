"""Directed road network with memoized shortest-path distances."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

EARTH_RADIUS_KM = 6371.0088


@dataclass(frozen=True)
class Node:
    id: int
    lon: float = 0.0
    lat: float = 0.0


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    length_km: float


class NetworkError(ValueError):
    pass


@dataclass(eq=False)
class RoadNetwork:
    """Junctions and one-way roads.

    Distances are directed shortest-path lengths in km; ``inf`` marks an
    unreachable pair. Rows are filled lazily per source and cached, so the
    object can be shared between threads once built (a concurrent fill just
    computes the same row twice).
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    metric: str = "network"
    _index: dict[int, int] = field(init=False, repr=False)
    _graph: csr_matrix = field(init=False, repr=False)
    _rows: dict[int, np.ndarray] = field(init=False, repr=False, default_factory=dict)
    _full: np.ndarray | None = field(init=False, repr=False, default=None)
    _lock: threading.Lock = field(init=False, repr=False, default_factory=threading.Lock)

    def __post_init__(self) -> None:
        self._index = {n.id: i for i, n in enumerate(self.nodes)}
        n = len(self.nodes)
        # keep the shortest of parallel edges; csr_matrix would sum duplicates
        best: dict[tuple[int, int], float] = {}
        for e in self.edges:
            key = (self._index[e.source], self._index[e.target])
            if key not in best or e.length_km < best[key]:
                best[key] = e.length_km
        if best:
            rows, cols = zip(*best.keys())
            data = list(best.values())
        else:
            rows, cols, data = (), (), ()
        self._graph = csr_matrix((data, (rows, cols)), shape=(n, n))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def ids(self) -> list[int]:
        return [n.id for n in self.nodes]

    def index(self, node_id: int) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise NetworkError(f"unknown node id {node_id}") from None

    def __contains__(self, node_id: int) -> bool:
        return node_id in self._index

    def _row(self, i: int) -> np.ndarray:
        row = self._rows.get(i)
        if row is None:
            if self.metric == "great-circle":
                row = _haversine_row(self.nodes, i)
            else:
                row = dijkstra(self._graph, directed=True, indices=i)
            with self._lock:
                self._rows[i] = row
        return row

    def dist(self, u: int, v: int) -> float:
        return float(self._row(self.index(u))[self.index(v)])

    def dist_from(self, u: int) -> np.ndarray:
        """Distances from ``u`` to every node, in node order."""
        return self._row(self.index(u))

    def matrix(self) -> np.ndarray:
        """All-pairs distance matrix indexed by node position."""
        if self._full is None:
            n = len(self.nodes)
            if self.metric == "great-circle":
                full = np.vstack([_haversine_row(self.nodes, i) for i in range(n)]) if n else np.zeros((0, 0))
            else:
                full = dijkstra(self._graph, directed=True) if n else np.zeros((0, 0))
            full.setflags(write=False)
            self._full = full
        return self._full


def _haversine_row(nodes: Sequence[Node], i: int) -> np.ndarray:
    lon = np.radians([n.lon for n in nodes])
    lat = np.radians([n.lat for n in nodes])
    dlon = lon - lon[i]
    dlat = lat - lat[i]
    a = np.sin(dlat / 2) ** 2 + np.cos(lat[i]) * np.cos(lat) * np.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def build_network(nodes: Iterable[Node], edges: Iterable[Edge], metric: str = "network") -> RoadNetwork:
    nodes = tuple(nodes)
    edges = tuple(edges)
    seen: set[int] = set()
    for n in nodes:
        if n.id < 0:
            raise NetworkError(f"node id must be >= 0, got {n.id}")
        if n.id in seen:
            raise NetworkError(f"duplicate node id {n.id}")
        seen.add(n.id)
    for e in edges:
        if e.source not in seen or e.target not in seen:
            raise NetworkError(f"edge {e.source}->{e.target} references a missing node")
        if not (e.length_km > 0) or math.isinf(e.length_km):
            raise NetworkError(f"edge {e.source}->{e.target} has non-positive length {e.length_km}")
    if metric not in ("network", "great-circle"):
        raise NetworkError(f"unknown distance metric {metric!r}")
    return RoadNetwork(nodes, edges, metric)
