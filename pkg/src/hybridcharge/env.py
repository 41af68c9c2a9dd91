"""Planning environment: observation vector, masked transitions, utility-delta reward."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .actions import N_ACTIONS, Action, apply_action
from .mcs import sanitize, schedule
from .plan import ChargingPlan
from .scenario import Scenario
from .utility import Context, UtilityBreakdown, evaluate


@dataclass(frozen=True)
class EnvState:
    plan: ChargingPlan
    step: int
    breakdown: UtilityBreakdown

    @property
    def utility(self) -> float:
        return self.breakdown.utility


def observation_size(n_nodes: int, n_slots: int, n_types: int, n_mcs: int) -> int:
    return n_nodes * (2 + n_slots + n_types) + n_mcs * 3 * n_slots


def observe(plan: ChargingPlan, ctx: Context) -> np.ndarray:
    """Flatten (lon, lat, demand per slot, charger counts) per node in id order,
    then (location, energy, arrival time per slot) per fleet in id order."""
    net = ctx.net
    n_types = ctx.cfg.n_types
    order = sorted(range(len(net)), key=lambda i: net.nodes[i].id)
    stations = {s.node: s for s in plan.stations}
    parts = []
    for i in order:
        node = net.nodes[i]
        st = stations.get(node.id)
        x = np.zeros(n_types)
        if st is not None:
            x[:len(st.chargers)] = st.chargers
        parts.append(np.concatenate([[node.lon, node.lat], ctx.demand[:, i], x]))
    for m in plan.mcs:
        parts.append(np.concatenate([np.asarray(m.location, float), np.asarray(m.energy, float),
                                     np.asarray(m.tau, float)]))
    return np.concatenate(parts) if parts else np.zeros(0)


class PlanningEnv:
    """Episode over the five plan edits. After every unmasked edit the fleet
    heuristics run for each slot of the window; reward is the utility change.

    ``demand`` is the window the planner sees (a forecast); scoring against
    true demand is done separately with a context built on the truth window.
    """

    def __init__(self, scenario: Scenario, demand: Optional[np.ndarray] = None, *,
                 episode_length: int = 100, mcs1: bool = True, mcs2: bool = True, repeat: bool = False,
                 initial_plan: Optional[ChargingPlan] = None, cache_size: int = 200_000):
        self.scenario = scenario
        self.ctx = Context(scenario, demand)
        self.episode_length = episode_length
        self.mcs1, self.mcs2, self.repeat = mcs1, mcs2, repeat
        base = initial_plan if initial_plan is not None else scenario.empty_plan(self.ctx.n_slots)
        self.initial_plan = sanitize(base, self.ctx)
        self._succ: dict = {}
        self._cache_size = cache_size
        self.transitions = 0

    @property
    def n_actions(self) -> int:
        return N_ACTIONS

    def reset(self, plan: Optional[ChargingPlan] = None) -> EnvState:
        plan = self.initial_plan if plan is None else plan
        return EnvState(plan, 0, evaluate(plan, self.ctx))

    def successor(self, plan: ChargingPlan, action: int) -> Optional[ChargingPlan]:
        key = (plan, int(action))
        if key in self._succ:
            return self._succ[key]
        self.transitions += 1
        nxt = apply_action(plan, Action(action), self.ctx)
        if nxt is not None and (self.mcs1 or self.mcs2):
            nxt = schedule(nxt, self.ctx, range(self.ctx.n_slots), self.mcs1, self.mcs2, self.repeat)
        if len(self._succ) >= self._cache_size:
            self._succ.clear()
        self._succ[key] = nxt
        return nxt

    def is_cached(self, plan: ChargingPlan, action: int) -> bool:
        return (plan, int(action)) in self._succ

    def mask(self, state: EnvState) -> np.ndarray:
        return np.array([self.successor(state.plan, a) is not None for a in range(N_ACTIONS)])

    def step(self, state: EnvState, action: int, check_done: bool = True) -> tuple[EnvState, float, bool]:
        nxt = self.successor(state.plan, action)
        if nxt is None:
            new = EnvState(state.plan, state.step + 1, state.breakdown)
            reward = 0.0
        else:
            new = EnvState(nxt, state.step + 1, evaluate(nxt, self.ctx))
            reward = new.utility - state.utility
        done = new.step >= self.episode_length
        if not done and check_done:
            done = not self.mask(new).any()
        return new, reward, done

    def observe(self, state: EnvState) -> np.ndarray:
        return observe(state.plan, self.ctx)
