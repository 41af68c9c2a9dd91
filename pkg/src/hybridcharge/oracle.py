"""Independent checks: a discrete-event M/D/1 simulator and an exhaustive
planner for tiny instances."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .plan import ChargingPlan, Station, config_table
from .scenario import Scenario
from .utility import Context, UtilityBreakdown, evaluate


class UnstableQueue(ValueError):
    pass


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class QueueSimResult:
    mean_wait: float  # h, over admitted customers
    served: int
    balked: int
    half_width: float  # 95% batch-means confidence half-width, h

    @property
    def balked_fraction(self) -> float:
        total = self.served + self.balked
        return self.balked / total if total else 0.0


def _batch_half_width(waits: np.ndarray, n_batches: int = 20) -> float:
    if waits.size < 2 * n_batches:
        return math.inf if waits.size else 0.0
    usable = waits[: waits.size - waits.size % n_batches]
    means = usable.reshape(n_batches, -1).mean(axis=1)
    return float(stats.t.ppf(0.975, n_batches - 1) * means.std(ddof=1) / math.sqrt(n_batches))


def simulate_md1(arrival_rate: float, service_time: float, n_arrivals: int,
                 w_max: Optional[float] = None, seed: int = 0, warmup: float = 0.01) -> QueueSimResult:
    """FIFO single server, Poisson arrivals, deterministic service.

    With ``w_max`` an arriving EV leaves without queueing when the number of
    EVs already in the system times the service time exceeds ``w_max``.
    The first ``warmup`` fraction of customers is excluded from the statistics.
    """
    if arrival_rate < 0 or service_time <= 0 or n_arrivals < 0:
        raise ValueError("need arrival_rate >= 0, service_time > 0, n_arrivals >= 0")
    if w_max is None and arrival_rate * service_time >= 1:
        raise UnstableQueue(f"utilization {arrival_rate * service_time:.3f} >= 1 without a waiting cap")
    if arrival_rate == 0 or n_arrivals == 0:
        return QueueSimResult(0.0, 0, 0, 0.0)
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(1.0 / arrival_rate, n_arrivals)
    skip = int(warmup * n_arrivals)

    if w_max is None:
        # Lindley recursion W[k+1] = max(0, W[k] + S - gap[k+1]) in closed form
        steps = np.concatenate([[0.0], service_time - gaps[1:]])
        walk = np.cumsum(steps)
        waits = walk - np.minimum(np.minimum.accumulate(walk), 0.0)
        kept = waits[skip:]
        return QueueSimResult(float(kept.mean()), int(kept.size), 0, _batch_half_width(kept))

    arrivals = np.cumsum(gaps)
    departures: deque[float] = deque()
    waits = []
    balked = 0
    last_departure = 0.0
    for k, a in enumerate(arrivals.tolist()):
        while departures and departures[0] <= a:
            departures.popleft()
        if len(departures) * service_time > w_max:
            if k >= skip:
                balked += 1
            continue
        w = max(last_departure - a, 0.0)
        last_departure = a + w + service_time
        departures.append(last_departure)
        if k >= skip:
            waits.append(w)
    kept = np.asarray(waits)
    mean = float(kept.mean()) if kept.size else 0.0
    return QueueSimResult(mean, int(kept.size), balked, _batch_half_width(kept))


@dataclass(frozen=True)
class BruteForceResult:
    plan: ChargingPlan
    breakdown: UtilityBreakdown
    enumerated: int

    @property
    def utility(self) -> float:
        return self.breakdown.utility


def _count_within_budget(n_nodes: int, fees: list[float], budget: float) -> int:
    """Number of per-node option tuples whose total fee fits the budget."""
    counts = {0.0: 1}
    for _ in range(n_nodes):
        nxt: dict[float, int] = {}
        for spent, c in counts.items():
            for f in fees:
                s = spent + f
                if s <= budget:
                    nxt[s] = nxt.get(s, 0) + c
        counts = nxt
    return sum(counts.values())


def brute_force(scenario: Scenario, demand: Optional[np.ndarray] = None,
                max_plans: int = 10_000_000) -> BruteForceResult:
    """Best stations-only plan by exhaustive enumeration.

    Every node gets either no station or one of the charger configurations
    with 1..K chargers; combinations over budget are skipped. Among plans
    within 1e-12 of the best utility, the one whose sorted
    (node, chargers) listing is lexicographically smallest wins.
    """
    cfg = scenario.config
    if cfg.n_mcs:
        raise ValueError("exhaustive search covers fixed stations only; set n_mcs = 0")
    ctx = Context(scenario, demand)
    table = config_table(cfg)
    options = [None] + [tuple(int(v) for v in row) for row, f in zip(table.configs, table.fee)
                        if row.sum() > 0 and f <= cfg.budget]
    fees = [0.0] + [float(np.dot(o, cfg.fees())) for o in options[1:]]
    ids = sorted(scenario.network.ids)
    size = _count_within_budget(len(ids), fees, cfg.budget)
    if size > max_plans:
        raise EnumerationTooLarge(f"{size} candidate plans exceed the cap of {max_plans}")

    best_plan, best_bd, best_key = None, None, None
    enumerated = 0

    def visit(stations: tuple[Station, ...]) -> None:
        nonlocal best_plan, best_bd, best_key, enumerated
        plan = ChargingPlan(stations, (), scenario.depots)
        bd = evaluate(plan, ctx)
        enumerated += 1
        key = tuple((s.node, s.chargers) for s in stations)
        if best_bd is None:
            better = True
        else:
            gap = bd.utility - best_bd.utility
            tol = 1e-12 * max(1.0, abs(best_bd.utility))
            better = gap > tol or (abs(gap) <= tol and key < best_key)
        if better:
            best_plan, best_bd, best_key = plan, bd, key

    def walk(i: int, spent: float, chosen: tuple[Station, ...]) -> None:
        if i == len(ids):
            visit(chosen)
            return
        for opt, fee in zip(options, fees):
            if spent + fee > cfg.budget:
                continue
            nxt = chosen if opt is None else chosen + (Station(ids[i], opt),)
            walk(i + 1, spent + fee, nxt)

    walk(0, 0.0, ())
    ctx._cache.clear()
    return BruteForceResult(best_plan, best_bd, enumerated)

