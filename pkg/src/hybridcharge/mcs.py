"""Mobile-charger scheduling: availability discount, energy bookkeeping,
depot recalls, and the two greedy dispatch heuristics (support an overloaded
station / open a temporary charging area at a demand hotspot)."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .plan import ChargingPlan, Depot, MobileCharger, Station, budget_used
from .utility import Context, detail, max_arrivals


class RecallError(RuntimeError):
    pass


@dataclass(frozen=True)
class MCScheduleEvent:
    mc: int
    slot: int
    kind: str  # support-station | flex-area | recall | idle
    target: Optional[int]
    tau_arrival: float
    delta: float


def discount(tau_minutes: float, t: int, slot_minutes: float) -> float:
    """Fraction of slot ``t`` a fleet arriving at minute ``tau`` can serve."""
    late = (tau_minutes - t * slot_minutes) / slot_minutes
    return min(max(1.0 - min(late, 1.0), 0.0), 1.0)


def nearest_depot(loc: int, depots: Iterable[Depot], ctx: Context) -> tuple[Depot, float]:
    best, best_d = None, math.inf
    for d in sorted(depots, key=lambda d: d.node):
        km = ctx.net.dist(loc, d.node)
        if km < best_d:
            best, best_d = d, km
    if best is None:
        raise RecallError(f"no reachable depot from node {loc}; a fleet needs recharging")
    return best, best_d


def rollout(mc: MobileCharger, depots: tuple[Depot, ...], ctx: Context,
            assignment: Optional[tuple] = None, n_slots: Optional[int] = None) -> MobileCharger:
    """Recompute the trajectory of ``mc`` from its start state and assignment.

    Assignments the fleet cannot honour (unreachable target, or arriving a
    full slot late) are dropped. A fleet whose battery cannot cover one more
    full slot is sent to the nearest depot; it is unavailable until travel
    plus recharge time has elapsed, and its battery is full afterwards.
    """
    cfg = ctx.cfg
    n_slots = ctx.n_slots if n_slots is None else n_slots
    h_min = cfg.slot_minutes
    full = cfg.fleet_battery_kwh
    need_slot = cfg.idle_energy_kwh
    plan_a = mc.assignment if assignment is None else assignment
    plan_a = tuple(plan_a[:n_slots]) + (None,) * max(0, n_slots - len(plan_a))

    loc, q, ready = mc.start_location, float(mc.start_energy), float(mc.start_ready)
    out_a, out_loc, out_tau, out_q, out_delta, out_recall, out_km = [], [], [], [], [], [], []
    delivered = recharged = 0.0
    for t in range(n_slots):
        recall = None
        if q < need_slot:
            depot, km = nearest_depot(loc, depots, ctx)
            top_up = full - q
            ready = max(t * h_min, ready) + (km / cfg.speed_kmh + top_up / depot.power_kw) * 60.0
            loc = depot.node
            recharged += top_up
            out_q.append(q)
            q = full
            recall = depot.node
        else:
            out_q.append(q)
        target = plan_a[t]
        delta = 0.0
        km_moved = 0.0
        if target is not None:
            km = 0.0 if target == loc else ctx.net.dist(loc, target)
            if math.isfinite(km):
                arrive = max(t * h_min, ready) + km / cfg.speed_kmh * 60.0
                delta = discount(arrive, t, h_min)
                if delta > 0:
                    loc, ready, km_moved = target, arrive, km
            if delta <= 0:
                target, delta = None, 0.0
        out_a.append(target)
        out_loc.append(loc)
        out_tau.append(ready)
        out_delta.append(delta)
        out_recall.append(recall)
        out_km.append(km_moved)
        served = min(cfg.fleet_power_kw * delta * cfg.slot_hours, q)
        delivered += served
        q = max(q - served, 0.0)
    return replace(mc, assignment=tuple(out_a), location=tuple(out_loc), tau=tuple(out_tau),
                   energy=tuple(out_q), delta=tuple(out_delta), recalls=tuple(out_recall),
                   recharged=recharged, delivered=delivered,
                   final_location=loc, final_energy=q, final_ready=ready, travel_km=tuple(out_km))


def advance(mc: MobileCharger, depots: tuple[Depot, ...], ctx: Context) -> MobileCharger:
    """State of ``mc`` at the start of the next slot after serving slot 0.

    The returned fleet keeps its identity and employment, carries its
    remaining assignment shifted by one slot, and counts time from the new
    slot start.
    """
    step = rollout(mc, depots, ctx, n_slots=1)
    h_min = ctx.cfg.slot_minutes
    return MobileCharger(id=mc.id, depot=mc.depot, start_location=step.final_location,
                         start_energy=step.final_energy, start_ready=max(step.final_ready - h_min, 0.0),
                         hired=step.employed, assignment=tuple(mc.assignment[1:]))


def sanitize(plan: ChargingPlan, ctx: Context) -> ChargingPlan:
    """Drop assignments to vanished stations, recompute every trajectory and
    remove temporary stations no fleet is serving."""
    nodes = {s.node for s in plan.stations}
    mcs = []
    for m in plan.mcs:
        a = tuple(x if x in nodes else None for x in m.assignment)
        mcs.append(rollout(m, plan.depots, ctx, a))
    staffed = {x for m in mcs for x in m.assignment if x is not None}
    stations = tuple(s for s in plan.stations if not s.temporary or s.node in staffed)
    return ChargingPlan(stations, tuple(mcs), plan.depots)


def _fixed_satisfies(plan: ChargingPlan, ctx: Context, node: int, t: int) -> bool:
    st = plan.station_at(node)
    if st is None or st.temporary:
        return False
    det = detail(plan, ctx)
    s = det.position(node)
    arrivals = det.arrivals[t, s]
    return arrivals == 0 or arrivals < max_arrivals(det.fixed[s], ctx.cfg)


def idle_candidates(plan: ChargingPlan, ctx: Context, t: int, target: int) -> list[tuple[float, int, MobileCharger]]:
    """Fleets that could start serving ``target`` in slot ``t``, nearest first.

    A fleet counts as idle when it is unassigned in ``t`` (or parked at a
    station whose fixed chargers already cope), holds enough energy for a
    full slot, is not recharging, and would arrive before the slot ends.
    """
    cfg = ctx.cfg
    spent = budget_used(plan, cfg)
    out = []
    for m in plan.mcs:
        current = m.target(t)
        if current == target:
            continue
        if current is not None and not _fixed_satisfies(plan, ctx, current, t):
            continue
        if not m.employed and spent + cfg.mc_fee > cfg.budget:
            continue
        a = tuple(m.assignment[:t]) + (target,) * (ctx.n_slots - t)
        trial = rollout(m, plan.depots, ctx, a)
        if trial.recalls[t] is not None or trial.assignment[t] != target or trial.delta[t] <= 0:
            continue
        out.append((trial.travel_km[t], m.id, trial))
    out.sort(key=lambda c: (c[0], c[1]))
    return out


def support_stations(plan: ChargingPlan, ctx: Context, t: int) -> ChargingPlan:
    """Send the nearest idle fleet to the most overloaded permanent station,
    for slots ``t`` to the end of the window."""
    perm = [s.node for s in plan.permanent]
    if not perm or not plan.mcs:
        return plan
    det = detail(plan, ctx)
    score = det.overload_score(ctx.cfg, start=t)
    cand = [(score[det.position(n)], n) for n in perm]
    best_score = max(c[0] for c in cand)
    if not best_score > 0:
        return plan
    node = min(n for sc, n in cand if sc == best_score)
    found = idle_candidates(plan, ctx, t, node)
    if not found:
        return plan
    return sanitize(plan.with_mc(found[0][2]), ctx)


def establish_flex_areas(plan: ChargingPlan, ctx: Context, t: int) -> ChargingPlan:
    """Open a temporary charging area at the busiest node without a station."""
    if not plan.mcs:
        return plan
    taken = {s.node for s in plan.stations}
    window = ctx.demand[t:].sum(axis=0)
    best, best_dem = None, 0.0
    for i, node in enumerate(ctx.node_ids):
        node = int(node)
        if node in taken:
            continue
        if window[i] > best_dem or (window[i] == best_dem and best is not None and node < best):
            best, best_dem = node, window[i]
    if best is None or not best_dem > 0:
        return plan
    found = idle_candidates(plan, ctx, t, best)
    if not found:
        return plan
    nxt = plan.with_mc(found[0][2]).with_station(Station(best, (0,) * ctx.cfg.n_types, temporary=True))
    return sanitize(nxt, ctx)


def schedule(plan: ChargingPlan, ctx: Context, slots: Iterable[int], mcs1: bool = True, mcs2: bool = True,
             repeat: bool = False) -> ChargingPlan:
    """Run the enabled heuristics once per slot (or until no fleet moves)."""
    for t in slots:
        while True:
            before = plan
            if mcs1:
                plan = support_stations(plan, ctx, t)
            if mcs2:
                plan = establish_flex_areas(plan, ctx, t)
            if not repeat or plan == before:
                break
    return plan


def events(plan: ChargingPlan, offset: int = 0) -> list[MCScheduleEvent]:
    """Flatten fleet trajectories into a per-slot event list."""
    temp = {s.node for s in plan.stations if s.temporary}
    out = []
    for m in plan.mcs:
        for t, a in enumerate(m.assignment):
            if m.recalls[t] is not None:
                out.append(MCScheduleEvent(m.id, t + offset, "recall", m.recalls[t], m.tau[t], 0.0))
            if a is None:
                if m.recalls[t] is None:
                    out.append(MCScheduleEvent(m.id, t + offset, "idle", None, m.tau[t], 0.0))
                continue
            kind = "flex-area" if a in temp else "support-station"
            out.append(MCScheduleEvent(m.id, t + offset, kind, a, m.tau[t], m.delta[t]))
    return out
