"""The five neighborhood moves that edit a charging plan.

Every move returns a new plan, or ``None`` when it is masked (no valid
target, or the result would break the per-station charger limit or the
budget). Ties go to the lowest node id.
"""

from __future__ import annotations

import enum
from typing import Optional

import numpy as np

from .mcs import sanitize
from .plan import ChargingPlan, Station, budget_used, sizing_config
from .utility import Context, detail


class Action(enum.IntEnum):
    CREATE_BY_DEMAND = 0
    CREATE_BY_BENEFIT = 1
    INCREASE_BY_DEMAND = 2
    INCREASE_BY_BENEFIT = 3
    RELOCATE = 4


N_ACTIONS = len(Action)


def _argbest(values: np.ndarray, ids: np.ndarray, candidates: np.ndarray, maximize: bool) -> Optional[int]:
    """Node id with the best value among ``candidates`` (lowest id on ties)."""
    if not candidates.any():
        return None
    v = values[candidates]
    best = v.max() if maximize else v.min()
    return int(ids[candidates][v == best].min())


def _nearest_permanent(plan: ChargingPlan, ctx: Context, node: int) -> Optional[Station]:
    perm = plan.permanent
    if not perm:
        return None
    row = ctx.dist[ctx.idx(node)]
    d = np.array([row[ctx.idx(s.node)] for s in perm])
    if not np.isfinite(d.min()):
        return None
    return perm[int(np.flatnonzero(d == d.min())[0])]


def _cheapest_type(ctx: Context) -> int:
    fees = ctx.cfg.fees()
    return int(np.flatnonzero(fees == fees.min())[0])


def _add_one(station: Station, kind: int, n_types: int) -> Station:
    x = list(station.chargers) + [0] * (n_types - len(station.chargers))
    x[kind] += 1
    return Station(station.node, tuple(x))


def _create(plan: ChargingPlan, ctx: Context, node: Optional[int]) -> Optional[ChargingPlan]:
    if node is None:
        return None
    peak = float(ctx.demand[:, ctx.idx(node)].max())
    return plan.with_station(Station(node, sizing_config(peak, ctx.cfg)))


def _increase(plan: ChargingPlan, ctx: Context, station: Optional[Station]) -> Optional[ChargingPlan]:
    if station is None or station.total >= ctx.cfg.max_chargers:
        return None
    return plan.with_station(_add_one(station, _cheapest_type(ctx), ctx.cfg.n_types))


def _relocate(plan: ChargingPlan, ctx: Context) -> Optional[ChargingPlan]:
    perm = plan.permanent
    if len(perm) < 2:
        return None
    det = detail(plan, ctx)
    share = det.benefit_share()
    donors = [s for s in perm if s.total > 0]
    if not donors:
        return None
    donor = min(donors, key=lambda s: (share[det.position(s.node)], s.node))
    score = det.overload_score(ctx.cfg)
    targets = [s for s in perm if s.node != donor.node and s.total < ctx.cfg.max_chargers]
    if not targets:
        return None
    target = min(targets, key=lambda s: (-score[det.position(s.node)], s.node))
    powers = ctx.cfg.powers()
    present = [i for i, x in enumerate(donor.chargers) if x > 0]
    kind = max(present, key=lambda i: (powers[i], -i))
    x = list(donor.chargers)
    x[kind] -= 1
    out = plan.with_station(_add_one(target, kind, ctx.cfg.n_types))
    if sum(x):
        return out.with_station(Station(donor.node, tuple(x)))
    return out.without_station(donor.node)


def propose(plan: ChargingPlan, action: Action, ctx: Context) -> Optional[ChargingPlan]:
    """Raw move, before feasibility checks."""
    action = Action(action)
    ids = ctx.node_ids
    free = np.array([plan.station_at(int(n)) is None or plan.station_at(int(n)).temporary for n in ids])
    if action is Action.CREATE_BY_DEMAND:
        return _create(plan, ctx, _argbest(ctx.demand.sum(axis=0), ids, free, maximize=True))
    if action is Action.CREATE_BY_BENEFIT:
        cov = detail(plan, ctx).counts.mean(axis=0)
        return _create(plan, ctx, _argbest(cov, ids, free, maximize=False))
    everyone = np.ones(len(ids), dtype=bool)
    if action is Action.INCREASE_BY_DEMAND:
        hot = _argbest(ctx.demand.sum(axis=0), ids, everyone, maximize=True)
        return _increase(plan, ctx, _nearest_permanent(plan, ctx, hot))
    if action is Action.INCREASE_BY_BENEFIT:
        cov = detail(plan, ctx).counts.mean(axis=0)
        cold = _argbest(cov, ids, everyone, maximize=False)
        return _increase(plan, ctx, _nearest_permanent(plan, ctx, cold))
    return _relocate(plan, ctx)


def feasible(plan: ChargingPlan, ctx: Context) -> bool:
    cfg = ctx.cfg
    if any(s.total > cfg.max_chargers for s in plan.stations):
        return False
    return budget_used(plan, cfg) <= cfg.budget


def apply_action(plan: ChargingPlan, action: Action, ctx: Context) -> Optional[ChargingPlan]:
    nxt = propose(plan, action, ctx)
    if nxt is None:
        return None
    nxt = sanitize(nxt, ctx)
    if not feasible(nxt, ctx):
        return None
    return nxt


def action_mask(plan: ChargingPlan, ctx: Context) -> np.ndarray:
    return np.array([apply_action(plan, a, ctx) is not None for a in Action])
