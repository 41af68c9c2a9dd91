"""Search drivers over the plan-edit neighborhood: greedy hill-climb and
simulated annealing with restarts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .env import EnvState, PlanningEnv
from .plan import ChargingPlan


@dataclass
class SearchResult:
    plan: ChargingPlan
    utility: float
    evaluations: int
    trace: list[tuple[int, float]] = field(default_factory=list)  # (evaluation, best utility)


def greedy(env: PlanningEnv, max_steps: Optional[int] = None) -> SearchResult:
    """Take the best improving edit until none improves."""
    state = env.reset()
    best = state
    start = env.transitions
    max_steps = env.episode_length if max_steps is None else max_steps
    trace = [(0, state.utility)]
    for _ in range(max_steps):
        options = []
        for a in range(env.n_actions):
            nxt, _, _ = env.step(state, a, check_done=False)
            if nxt.plan is not state.plan:
                options.append((nxt.utility, a, nxt))
        if not options:
            break
        u, _, nxt = max(options, key=lambda o: (o[0], -o[1]))
        if u <= state.utility:
            break
        state = nxt
        best = state
        trace.append((env.transitions - start, best.utility))
    return SearchResult(best.plan, best.utility, env.transitions - start, trace)


def geometric_schedule(t0: float, t_end: float) -> Callable[[float], float]:
    """Temperature as a function of the used fraction of the evaluation budget."""
    if t0 <= 0:
        return lambda frac: 0.0
    t_end = max(t_end, 1e-300)
    return lambda frac: t0 * (t_end / t0) ** min(max(frac, 0.0), 1.0)


def search_sa(env: PlanningEnv, eval_budget: int = 10_000,
              temperature: Callable[[float], float] | tuple[float, float] = (0.05, 1e-4),
              seed: int = 0, restart_best: float = 0.5, max_proposals: Optional[int] = None) -> SearchResult:
    """Simulated annealing over plan edits.

    One evaluation is one new (plan, edit) transition; revisiting a cached
    transition is free. Episodes restart at the initial plan or, with
    probability ``restart_best``, at the best plan so far when they hit the
    episode length or a plan with every edit masked.
    """
    if eval_budget < 1:
        raise ValueError("eval_budget must be >= 1")
    if isinstance(temperature, tuple):
        temperature = geometric_schedule(*temperature)
    rng = np.random.default_rng(seed)
    start = env.transitions
    state = env.reset()
    best = state
    trace = [(0, best.utility)]
    max_proposals = 50 * eval_budget if max_proposals is None else max_proposals
    proposals = 0
    while env.transitions - start < eval_budget and proposals < max_proposals:
        proposals += 1
        if state.step >= env.episode_length or _dead(env, state):
            state = env.reset(best.plan if rng.random() < restart_best else None)
            if _dead(env, state):
                state = env.reset()
                if _dead(env, state):
                    break
            continue
        a = int(rng.integers(env.n_actions))
        nxt, _, _ = env.step(state, a, check_done=False)
        if nxt.plan is state.plan:
            continue
        used = env.transitions - start
        if nxt.utility > best.utility:
            best = nxt
            trace.append((used, best.utility))
        delta = nxt.utility - state.utility
        temp = temperature(used / eval_budget)
        if delta >= 0 or (temp > 0 and rng.random() < math.exp(delta / temp)):
            state = nxt
    return SearchResult(best.plan, best.utility, env.transitions - start, trace)


def _dead(env: PlanningEnv, state: EnvState) -> bool:
    # known dead only once every edit has been tried; never spends evaluations
    return all(env.is_cached(state.plan, a) and env.successor(state.plan, a) is None
               for a in range(env.n_actions))
