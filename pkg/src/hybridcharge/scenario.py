"""Scenario bundle and a seeded synthetic scenario generator."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist, squareform

from .demand import DemandMatrix
from .network import Edge, Node, RoadNetwork, build_network
from .plan import ChargingPlan, Depot, ScenarioConfig, Station, empty_plan, sizing_config

KM_PER_DEG_LAT = 110.574
BASE_LON, BASE_LAT = 113.93, 22.53


@dataclass(frozen=True)
class Scenario:
    network: RoadNetwork
    demand: DemandMatrix
    depots: tuple[Depot, ...]
    config: ScenarioConfig = field(default_factory=ScenarioConfig)
    reference_plan: Optional[ChargingPlan] = None
    planning_start: int = 0

    def __post_init__(self):
        if self.demand.n_nodes != len(self.network):
            raise ValueError(f"demand has {self.demand.n_nodes} columns for {len(self.network)} nodes")
        for d in self.depots:
            if d.node not in self.network:
                raise ValueError(f"depot node {d.node} is not in the network")
        object.__setattr__(self, "depots", tuple(self.depots))

    @property
    def horizon(self) -> int:
        return self.config.horizon_slots

    def truth_window(self, start: Optional[int] = None) -> np.ndarray:
        start = self.planning_start if start is None else start
        return self.demand.window(start, self.horizon)

    def empty_plan(self, horizon: Optional[int] = None) -> ChargingPlan:
        return empty_plan(self.depots, self.config, horizon)

    def with_config(self, **changes) -> "Scenario":
        return replace(self, config=replace(self.config, **changes))


@dataclass(frozen=True)
class GeneratorConfig:
    n_nodes: int = 50
    n_slots: int = 48
    n_hotspots: int = 3
    n_depots: int = 2
    extent_km: float = 2.0
    k_nearest: int = 3
    detour: float = 1.25
    hotspot_sigma_km: float = 0.4
    peak_rate: float = 0.05  # EV/h at a hotspot centre
    background_rate: float = 0.005
    noise: float = 0.1
    season: int = 24
    planning_start: int = 24
    n_reference_stations: int = 3
    # a transient hotspot active only inside the planning window
    surge_rate: float = 0.0
    surge_sigma_km: float = 0.5
    params: ScenarioConfig = field(default_factory=ScenarioConfig)


def _build_graph(pos: np.ndarray, cfg: GeneratorConfig, rng: np.random.Generator) -> list[Edge]:
    n = len(pos)
    pairs: set[tuple[int, int]] = set()
    if n > 1:
        k = min(cfg.k_nearest, n - 1)
        _, nbrs = cKDTree(pos).query(pos, k=k + 1)
        for i in range(n):
            for j in np.atleast_1d(nbrs[i])[1:]:
                pairs.add((min(i, int(j)), max(i, int(j))))
        # spanning tree keeps the undirected skeleton connected
        mst = minimum_spanning_tree(squareform(pdist(pos))).tocoo()
        for i, j in zip(mst.row, mst.col):
            pairs.add((min(int(i), int(j)), max(int(i), int(j))))
    edges = []
    for i, j in sorted(pairs):
        base = float(np.linalg.norm(pos[i] - pos[j]))
        base = max(base, 0.05)
        # both directions, slightly different lengths (one-way detours)
        fwd, back = cfg.detour * base * (1 + 0.1 * rng.random(2))
        edges.append(Edge(i, j, float(fwd)))
        edges.append(Edge(j, i, float(back)))
    return edges


def _bump(pos: np.ndarray, centre: np.ndarray, sigma: float) -> np.ndarray:
    d2 = ((pos - centre) ** 2).sum(axis=1)
    return np.exp(-d2 / (2 * sigma ** 2))


def generate_scenario(cfg: GeneratorConfig = GeneratorConfig(), seed: int = 0) -> Scenario:
    if cfg.n_nodes < 1 or cfg.n_slots < 1:
        raise ValueError("need at least one node and one slot")
    if cfg.n_hotspots < 0 or cfg.n_depots < 0 or cfg.extent_km <= 0:
        raise ValueError("invalid generator sizes")
    horizon = cfg.params.horizon_slots
    if not 0 <= cfg.planning_start <= cfg.n_slots - horizon:
        raise ValueError(f"planning_start {cfg.planning_start} leaves no room for a {horizon}-slot window "
                         f"in {cfg.n_slots} slots")
    rng = np.random.default_rng(seed)
    pos = rng.random((cfg.n_nodes, 2)) * cfg.extent_km
    lat = BASE_LAT + pos[:, 1] / KM_PER_DEG_LAT
    lon = BASE_LON + pos[:, 0] / (KM_PER_DEG_LAT * np.cos(np.radians(BASE_LAT)))
    nodes = [Node(i, float(lon[i]), float(lat[i])) for i in range(cfg.n_nodes)]
    net = build_network(nodes, _build_graph(pos, cfg, rng))

    t = np.arange(cfg.n_slots)
    rates = np.full((cfg.n_slots, cfg.n_nodes), cfg.background_rate)
    for _ in range(cfg.n_hotspots):
        centre = pos[rng.integers(cfg.n_nodes)] + rng.normal(0, 0.2, 2)
        phase = rng.uniform(0, 2 * np.pi)
        level = cfg.peak_rate * rng.uniform(0.5, 1.0)
        profile = level * (0.55 + 0.45 * np.cos(2 * np.pi * t / cfg.season - phase))
        rates += np.outer(profile, _bump(pos, centre, cfg.hotspot_sigma_km))
    if cfg.noise > 0:
        rates *= rng.lognormal(0.0, cfg.noise, rates.shape)
    if cfg.surge_rate > 0:
        centre = pos[rng.integers(cfg.n_nodes)]
        window = slice(cfg.planning_start, cfg.planning_start + horizon)
        rates[window] += cfg.surge_rate * _bump(pos, centre, cfg.surge_sigma_km)
    demand = DemandMatrix(rates, cfg.params.slot_minutes)

    depot_nodes = rng.choice(cfg.n_nodes, size=min(cfg.n_depots, cfg.n_nodes), replace=False)
    depots = tuple(Depot(int(v), cfg.params.depot_power_kw) for v in sorted(depot_nodes))

    reference = None
    if cfg.n_reference_stations > 0:
        picks = rng.choice(cfg.n_nodes, size=min(cfg.n_reference_stations, cfg.n_nodes), replace=False)
        peak = rates[:cfg.planning_start].max(axis=0) if cfg.planning_start else rates.max(axis=0)
        stations = tuple(Station(int(v), sizing_config(float(peak[v]), cfg.params)) for v in sorted(picks))
        reference = ChargingPlan(stations=stations, mcs=(), depots=depots)
    return Scenario(net, demand, depots, cfg.params, reference, cfg.planning_start)
