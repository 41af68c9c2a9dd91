"""Small scenario builders and a slow, loop-based re-implementation of the
utility model used as an independent second route in tests."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from hybridcharge.demand import DemandMatrix
from hybridcharge.network import Edge, Node, build_network
from hybridcharge.plan import DEFAULT_CHARGER_TYPES, ChargingPlan, Depot, ScenarioConfig
from hybridcharge.scenario import GeneratorConfig, Scenario, generate_scenario


def two_way(pairs: Sequence[tuple[int, int, float]]) -> list[Edge]:
    out = []
    for u, v, km in pairs:
        out += [Edge(u, v, km), Edge(v, u, km)]
    return out


def make_scenario(n_nodes: int, edges: Sequence[Edge], demand: np.ndarray, *, depots: Sequence[int] = (),
                  reference: Optional[ChargingPlan] = None, planning_start: int = 0, **params) -> Scenario:
    nodes = [Node(i, 114.0 + 0.001 * i, 22.5) for i in range(n_nodes)]
    net = build_network(nodes, edges)
    cfg = ScenarioConfig(**params)
    dem = DemandMatrix(np.atleast_2d(np.asarray(demand, dtype=float)), cfg.slot_minutes)
    deps = tuple(Depot(d, cfg.depot_power_kw) for d in depots)
    return Scenario(net, dem, deps, cfg, reference, planning_start)


def tiny_scenario(seed: int, extent_km: float = 0.6, peak_rate: float = 0.002) -> Scenario:
    """At most 8 nodes, K=2, two charger types, no fleets: small enough to enumerate."""
    params = ScenarioConfig(max_chargers=2, charger_types=DEFAULT_CHARGER_TYPES[:2], n_mcs=0, budget=20000.0)
    g = GeneratorConfig(n_nodes=8, n_hotspots=2, n_depots=1, extent_km=extent_km, hotspot_sigma_km=extent_km / 5,
                        peak_rate=peak_rate, background_rate=peak_rate / 20, n_reference_stations=2, params=params)
    return generate_scenario(g, seed)


def line_scenario(demand_row: Sequence[float], spacing_km: float = 0.5, slots: int = 1, **params) -> Scenario:
    """Nodes 0..n-1 on a two-way line, the same demand in every slot."""
    n = len(demand_row)
    edges = two_way([(i, i + 1, spacing_km) for i in range(n - 1)])
    dem = np.tile(np.asarray(demand_row, dtype=float), (slots, 1))
    params.setdefault("horizon_slots", slots)
    return make_scenario(n, edges, dem, **params)


def reference_breakdown(plan: ChargingPlan, scenario: Scenario, demand: np.ndarray,
                        cfg: ScenarioConfig, norms: tuple[float, float]) -> dict[str, float]:
    net = scenario.network
    n_slots, n_nodes = demand.shape
    ids = net.ids
    powers = [c.power_kw for c in cfg.charger_types]
    w_max = cfg.w_max_minutes / 60.0
    b = cfg.ev_battery_kwh
    benefit = travel = charging = waiting = loss = 0.0
    for t in range(n_slots):
        caps = {}
        for s in plan.stations:
            c = sum(x * p for x, p in zip(s.chargers, powers))
            for m in plan.mcs:
                if t < len(m.assignment) and m.assignment[t] == s.node:
                    c += cfg.mc_fleet_size * cfg.mc_power_kw * m.delta[t]
            caps[s.node] = c
        radius = {n: cfg.r_max_km / (1 + math.exp(-(c - cfg.capacity_offset_kw) / cfg.capacity_scale_kw))
                  for n, c in caps.items()}
        active = sorted(n for n, c in caps.items() if c > 0)
        arrivals = {n: 0.0 for n in caps}
        for j, v in enumerate(ids):
            k = sum(1 for n in active if net.dist(v, n) < radius[n])
            benefit += sum(1.0 / i for i in range(1, k + 1))
            best = None
            for n in active:
                d = net.dist(v, n)
                if math.isfinite(d) and (best is None or d < best[0]):
                    best = (d, n)
            if best is not None:
                d, n = best
                d = max(d, cfg.eps_km)
                arrivals[n] += demand[t, j] / d
                travel += d / cfg.speed_kmh * demand[t, j]
        for n, c in caps.items():
            d = arrivals[n]
            if c <= 0:
                loss += d
                continue
            mu = c / b
            d_max = 2 * w_max * c * c / ((2 * w_max * c + b) * b)
            if d >= d_max:
                dt, w = d_max, w_max
            else:
                dt = d
                rho = dt / mu
                w = 0.0 if dt == 0 else min(rho / (2 * mu * (1 - rho)), w_max)
            charging += dt / mu
            waiting += dt * w
            loss += d - dt
    benefit /= n_nodes * n_slots
    travel /= n_slots
    charging /= n_slots
    waiting /= n_slots
    cost = cfg.alpha * travel + (1 - cfg.alpha) * (waiting + charging)
    util = cfg.lambda_b * benefit - cfg.lambda_c * cost / norms[0] - cfg.lambda_q * loss / norms[1]
    return dict(benefit=benefit, travel=travel, charging=charging, waiting=waiting, queuing_loss=loss,
                cost=cost, utility=util)


def hidden_surge_scenario() -> Scenario:
    """Two 7 kW stations 4 km apart with one fleet between them.

    Through the history node 2 is the busy one; in the operated slots demand
    jumps at node 0 instead, so a forecaster that repeats yesterday sends the
    fleet to the wrong station.
    """
    slots, start = 30, 24
    dem = np.full((slots, 3), 0.001)
    dem[:, 2] = 0.05
    dem[start:, 2] = 0.001
    dem[start:, 0] = 0.5
    edges = two_way([(0, 1, 2.0), (1, 2, 2.0)])
    return make_scenario(3, edges, dem, depots=(1,), planning_start=start, n_mcs=1, horizon_slots=3)
