"""Rolling-horizon utility of a charging plan.

Coverage uses a sigmoid influence radius on station capacity; station
queues are single aggregated M/D/1 servers with a maximum-average-wait cap
(arrivals above the cap balk and count as queuing loss).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .plan import ChargingPlan, ScenarioConfig, Station
from .scenario import Scenario


@dataclass(frozen=True)
class QueueStats:
    mu: float
    arrivals: float
    d_max: float
    corrected: float
    wait: float
    rho: float


@dataclass(frozen=True)
class UtilityBreakdown:
    benefit: float
    travel: float
    charging: float
    waiting: float
    queuing_loss: float
    cost: float
    utility: float
    unserved: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


METRICS = ("benefit", "cost", "travel", "charging", "waiting", "queuing_loss")


def influence_radius(capacity_kw, cfg: ScenarioConfig):
    scaled = (np.asarray(capacity_kw, dtype=float) - cfg.capacity_offset_kw) / cfg.capacity_scale_kw
    r = cfg.r_max_km / (1.0 + np.exp(-scaled))
    return float(r) if np.ndim(r) == 0 else r


def max_arrivals(capacity_kw, cfg: ScenarioConfig):
    """Arrival rate at which the mean M/D/1 wait reaches the cap."""
    c = np.asarray(capacity_kw, dtype=float)
    w, b = cfg.w_max_hours, cfg.ev_battery_kwh
    out = 2 * w * c ** 2 / ((2 * w * c + b) * b)
    return float(out) if np.ndim(out) == 0 else out


def md1_wait(rho, mu):
    """Mean queueing delay of an M/D/1 server (Pollaczek-Khinchine)."""
    rho = np.asarray(rho, dtype=float)
    mu = np.asarray(mu, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where((mu > 0) & (rho > 0), rho / (2 * mu * (1 - rho)), 0.0)
    return float(w) if np.ndim(w) == 0 else w


def queue_arrays(capacity_kw: np.ndarray, arrivals: np.ndarray, cfg: ScenarioConfig):
    """Vectorized queue statistics; returns (mu, d_max, corrected, wait, rho)."""
    c = np.asarray(capacity_kw, dtype=float)
    d = np.asarray(arrivals, dtype=float)
    mu = c / cfg.ev_battery_kwh
    d_max = max_arrivals(c, cfg)
    over = d >= d_max
    corrected = np.where(over, d_max, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(mu > 0, corrected / mu, 0.0)
    w_max = cfg.w_max_hours
    # below the cap rho < 1 holds algebraically; the min() only absorbs rounding at the boundary
    wait = np.where(over, w_max, np.minimum(md1_wait(np.where(over, 0.0, rho), mu), w_max))
    return mu, d_max, corrected, wait, rho


def _harmonic(n: int) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, n + 1))])


class Context:
    """Everything needed to score plans on one demand window."""

    def __init__(self, scenario: Scenario, demand: Optional[np.ndarray] = None,
                 config: Optional[ScenarioConfig] = None):
        self.scenario = scenario
        self.cfg = config or scenario.config
        dem = scenario.truth_window() if demand is None else demand
        dem = np.array(dem, dtype=float)
        if dem.ndim != 2 or dem.shape[1] != len(scenario.network):
            raise ValueError(f"demand window must be slots x {len(scenario.network)}, got {dem.shape}")
        if np.any(dem < 0):
            raise ValueError("demand must be non-negative")
        dem.setflags(write=False)
        self.demand = dem
        self.net = scenario.network
        self.dist = scenario.network.matrix()
        self.node_ids = np.array(scenario.network.ids)
        self._norms: Optional[tuple[float, float]] = None
        self._cache: dict = {}
        self.evaluations = 0

    @property
    def n_slots(self) -> int:
        return self.demand.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.demand.shape[1]

    def idx(self, node: int) -> int:
        return self.net.index(node)

    def with_demand(self, demand: np.ndarray) -> "Context":
        return Context(self.scenario, demand, self.cfg)

    def norms(self) -> tuple[float, float]:
        if self._norms is None:
            cost_n, loss_n = 1.0, 1.0
            ref = self.scenario.reference_plan
            if ref is not None and (self.cfg.cost_norm is None or self.cfg.loss_norm is None):
                det = detail(ref, self)
                if det.cost > 0:
                    cost_n = det.cost
                if det.loss > 0:
                    loss_n = det.loss
            if self.cfg.cost_norm is not None:
                cost_n = self.cfg.cost_norm
            if self.cfg.loss_norm is not None:
                loss_n = self.cfg.loss_norm
            self._norms = (cost_n, loss_n)
        return self._norms


def capacity(station: Station, plan: ChargingPlan, t: int, cfg: ScenarioConfig) -> float:
    fixed = sum(x * c.power_kw for x, c in zip(station.chargers, cfg.charger_types))
    mobile = sum(cfg.fleet_power_kw * m.delta[t] for m in plan.mcs
                 if m.target(t) == station.node and t < len(m.delta))
    return fixed + mobile


@dataclass(frozen=True)
class Detail:
    """Per-slot, per-station intermediate quantities of one evaluation."""

    nodes: np.ndarray  # (S,) station node ids, ascending
    fixed: np.ndarray  # (S,) fixed kW
    capacity: np.ndarray  # (T, S)
    active: np.ndarray  # (T, S)
    radius: np.ndarray  # (T, S)
    cover: np.ndarray  # (T, V, S) bool
    counts: np.ndarray  # (T, V)
    assign: np.ndarray  # (T, V) station position or -1
    assign_dist: np.ndarray  # (T, V)
    arrivals: np.ndarray  # (T, S)
    mu: np.ndarray
    d_max: np.ndarray
    corrected: np.ndarray
    wait: np.ndarray
    rho: np.ndarray
    benefit: float
    travel: float
    charging: float
    waiting: float
    loss: float
    unserved: float
    cost: float

    def position(self, node: int) -> int:
        pos = np.flatnonzero(self.nodes == node)
        if pos.size == 0:
            raise KeyError(f"no station at node {node}")
        return int(pos[0])

    def station_waiting(self) -> np.ndarray:
        return self.corrected * self.wait

    def station_charging(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.mu > 0, self.corrected / self.mu, 0.0)

    def station_loss(self) -> np.ndarray:
        return np.maximum(self.arrivals - self.corrected, 0.0)

    def overload_score(self, cfg: ScenarioConfig, start: int = 0) -> np.ndarray:
        """lambda_c * (waiting + charging) + lambda_q * queuing loss per station,
        summed over slots ``start..``."""
        n_slots = self.capacity.shape[0]
        sl = slice(start, None)
        wc = (self.station_waiting()[sl] + self.station_charging()[sl]).sum(axis=0) / n_slots
        return cfg.lambda_c * wc + cfg.lambda_q * self.station_loss()[sl].sum(axis=0)

    def benefit_share(self) -> np.ndarray:
        """Benefit each station adds on top of the others (marginal harmonic term)."""
        n_slots, n_nodes = self.counts.shape
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(self.counts > 0, 1.0 / self.counts, 0.0)
        return np.einsum("tvs,tv->s", self.cover, inv) / (n_nodes * n_slots)


def _capacity_matrix(plan: ChargingPlan, ctx: Context) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cfg = ctx.cfg
    n_slots = ctx.n_slots
    nodes = np.array([s.node for s in plan.stations], dtype=int)
    powers = cfg.powers()
    fixed = np.array([float(np.dot(s.chargers, powers[:len(s.chargers)])) for s in plan.stations])
    cap = np.tile(fixed, (n_slots, 1)) if len(nodes) else np.zeros((n_slots, 0))
    for m in plan.mcs:
        if m.delta and len(m.delta) != n_slots:
            raise ValueError(f"fleet {m.id} is scheduled for {len(m.delta)} slots but the demand window has {n_slots}")
    if len(nodes):
        pos = {int(n): i for i, n in enumerate(nodes)}
        for m in plan.mcs:
            for t in range(min(n_slots, len(m.assignment))):
                a = m.assignment[t]
                if a is not None and a in pos:
                    cap[t, pos[a]] += cfg.fleet_power_kw * m.delta[t]
    return nodes, fixed, cap


def detail(plan: ChargingPlan, ctx: Context) -> Detail:
    cached = ctx._cache.get(plan)
    if cached is not None:
        return cached
    ctx.evaluations += 1
    cfg = ctx.cfg
    n_slots, n_nodes = ctx.demand.shape
    nodes, fixed, cap = _capacity_matrix(plan, ctx)
    n_st = len(nodes)
    active = cap > 0
    radius = influence_radius(cap, cfg) if n_st else np.zeros((n_slots, 0))
    radius = np.asarray(radius).reshape(n_slots, n_st)
    sidx = np.array([ctx.idx(int(n)) for n in nodes], dtype=int)
    d_vs = ctx.dist[:, sidx] if n_st else np.zeros((n_nodes, 0))
    cover = (d_vs[None, :, :] < radius[:, None, :]) & active[:, None, :]
    counts = cover.sum(axis=2)
    assign = np.full((n_slots, n_nodes), -1, dtype=int)
    assign_dist = np.full((n_slots, n_nodes), np.inf)
    arrivals = np.zeros((n_slots, n_st))
    travel_slot = np.zeros(n_slots)
    unserved_slot = np.zeros(n_slots)
    rows = np.arange(n_nodes)
    for t in range(n_slots):
        dem = ctx.demand[t]
        if n_st:
            masked = np.where(active[t][None, :], d_vs, np.inf)
            a = masked.argmin(axis=1)
            md = masked[rows, a]
            ok = np.isfinite(md)
            assign[t, ok] = a[ok]
            assign_dist[t, ok] = md[ok]
            # co-located demand is treated as eps away for arrivals and travel alike
            km = np.maximum(md[ok], cfg.eps_km)
            arrivals[t] = np.bincount(a[ok], weights=dem[ok] / km, minlength=n_st)
            travel_slot[t] = np.sum(km / cfg.speed_kmh * dem[ok])
            unserved_slot[t] = np.sum(dem[~ok])
        else:
            unserved_slot[t] = np.sum(dem)
    mu, d_max, corrected, wait, rho = queue_arrays(cap, arrivals, cfg)
    harmonic = _harmonic(max(n_st, 1))
    benefit = float(harmonic[counts].sum() / (n_nodes * n_slots))
    with np.errstate(divide="ignore", invalid="ignore"):
        charging_st = np.where(mu > 0, corrected / mu, 0.0)
    travel = float(travel_slot.sum() / n_slots)
    charging = float(charging_st.sum() / n_slots)
    waiting = float((corrected * wait).sum() / n_slots)
    loss = float(np.maximum(arrivals - corrected, 0.0).sum())
    cost = cfg.alpha * travel + (1 - cfg.alpha) * (waiting + charging)
    out = Detail(nodes, fixed, cap, active, radius, cover, counts, assign, assign_dist, arrivals,
                 mu, d_max, corrected, wait, rho, benefit, travel, charging, waiting, loss,
                 float(unserved_slot.sum()), cost)
    if len(ctx._cache) > 20000:
        ctx._cache.clear()
    ctx._cache[plan] = out
    return out


def combine(benefit: float, travel: float, charging: float, waiting: float, loss: float,
            cfg: ScenarioConfig, norms: tuple[float, float], unserved: float = 0.0) -> UtilityBreakdown:
    cost = cfg.alpha * travel + (1 - cfg.alpha) * (waiting + charging)
    cost_n, loss_n = norms
    util = cfg.lambda_b * benefit - cfg.lambda_c * cost / cost_n - cfg.lambda_q * loss / loss_n
    return UtilityBreakdown(benefit, travel, charging, waiting, loss, cost, util, unserved)


def evaluate(plan: ChargingPlan, ctx: Context) -> UtilityBreakdown:
    d = detail(plan, ctx)
    return combine(d.benefit, d.travel, d.charging, d.waiting, d.loss, ctx.cfg, ctx.norms(), d.unserved)


def utility(plan: ChargingPlan, ctx: Context) -> float:
    return evaluate(plan, ctx).utility


def benefit(plan: ChargingPlan, ctx: Context) -> float:
    return detail(plan, ctx).benefit


def coverage(plan: ChargingPlan, ctx: Context, v: int, t: int) -> tuple[int, ...]:
    d = detail(plan, ctx)
    hits = d.cover[t, ctx.idx(v)]
    return tuple(int(n) for n in d.nodes[hits])


def mean_coverage(plan: ChargingPlan, ctx: Context) -> np.ndarray:
    """Mean number of covering stations per node, in node order."""
    return detail(plan, ctx).counts.mean(axis=0)


def assign_station(plan: ChargingPlan, ctx: Context, v: int, t: int = 0) -> Optional[int]:
    """Node of the station serving ``v`` in slot ``t`` (nearest active one)."""
    d = detail(plan, ctx)
    a = d.assign[t, ctx.idx(v)]
    return None if a < 0 else int(d.nodes[a])


def queue_stats(plan: ChargingPlan, ctx: Context, node: int, t: int) -> QueueStats:
    d = detail(plan, ctx)
    s = d.position(node)
    return QueueStats(float(d.mu[t, s]), float(d.arrivals[t, s]), float(d.d_max[t, s]),
                      float(d.corrected[t, s]), float(d.wait[t, s]), float(d.rho[t, s]))
