"""Rolling-horizon operation: re-plan fleet dispatch every slot against a
demand forecast, commit the first slot and score it on the true demand."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .demand import Forecaster, forecast
from .mcs import MCScheduleEvent, advance, events, sanitize, schedule
from .plan import ChargingPlan, MobileCharger, budget_used
from .scenario import Scenario
from .utility import Context, UtilityBreakdown, evaluate


@dataclass
class OperationResult:
    events: list[MCScheduleEvent]
    slots: list[UtilityBreakdown]
    committed: list[ChargingPlan] = field(default_factory=list)  # plan in force during each slot
    start: int = 0

    @property
    def aggregate(self) -> UtilityBreakdown:
        """Per-slot means of benefit, cost terms and utility; loss and unserved demand are summed."""
        if not self.slots:
            return UtilityBreakdown(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)

        def mean(name: str) -> float:
            return float(np.mean([getattr(b, name) for b in self.slots]))

        def total(name: str) -> float:
            return float(np.sum([getattr(b, name) for b in self.slots]))

        return UtilityBreakdown(mean("benefit"), mean("travel"), mean("charging"), mean("waiting"),
                                total("queuing_loss"), mean("cost"), mean("utility"), total("unserved"))


def _fleet_at_start(m: MobileCharger, keep_schedule: bool) -> MobileCharger:
    return MobileCharger(id=m.id, depot=m.depot, start_location=m.start_location,
                         start_energy=m.start_energy, start_ready=m.start_ready, hired=m.hired,
                         assignment=m.assignment if keep_schedule else ())


def operate_mpc(plan: ChargingPlan, scenario: Scenario, forecaster: Forecaster,
                total_slots: int, *, start: Optional[int] = None, mcs1: bool = True, mcs2: bool = True,
                repeat: bool = False) -> OperationResult:
    """Operate ``plan``'s permanent stations and fleets for ``total_slots`` slots.

    The plan's fleet schedule (for the slots starting at ``start``) is the
    initial commitment. Every slot the enabled heuristics run once on slot 0
    of a forecast window of the scenario horizon, commitments carry over, and
    the resulting slot is scored on true demand with the scenario's
    reference normalization. With both heuristics disabled no fleet moves.
    """
    start = scenario.planning_start if start is None else start
    horizon = scenario.horizon
    n_total = scenario.demand.n_slots
    if total_slots < 0 or start < 0 or start + total_slots > n_total:
        raise ValueError(f"slots {start}..{start + total_slots - 1} fall outside the {n_total}-slot demand record")
    cfg = scenario.config
    stations = plan.permanent
    dispatch = mcs1 or mcs2
    fleets = tuple(_fleet_at_start(m, dispatch) for m in plan.mcs)
    carried_temp = tuple(st for st in plan.stations if st.temporary) if dispatch else ()

    log: list[MCScheduleEvent] = []
    scored: list[UtilityBreakdown] = []
    committed: list[ChargingPlan] = []
    for k in range(total_slots):
        s = start + k
        fc = forecast(forecaster, scenario.demand, s - 1, truth=scenario.demand, steps=horizon)
        ctx = Context(scenario, fc)
        window = sanitize(ChargingPlan(stations + carried_temp, fleets, plan.depots), ctx)
        if dispatch:
            window = schedule(window, ctx, [0], mcs1, mcs2, repeat)
        if budget_used(window, cfg) > cfg.budget + 1e-9:
            raise RuntimeError(f"operation exceeded the budget at slot {s}")

        truth_ctx = Context(scenario, scenario.demand.window(s, 1))
        now = sanitize(window, truth_ctx)
        committed.append(now)
        scored.append(evaluate(now, truth_ctx))
        log.extend(e for e in events(now, offset=s) if e.slot == s)

        fleets = tuple(advance(m, plan.depots, ctx) for m in window.mcs)
        still = {a for m in fleets for a in m.assignment[:1] if a is not None}
        carried_temp = tuple(st for st in window.stations if st.temporary and st.node in still)
    return OperationResult(log, scored, committed, start)
