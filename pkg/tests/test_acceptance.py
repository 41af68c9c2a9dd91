"""One test per acceptance criterion, each at its stated tolerance.

Every test records a single PASS/FAIL line; the lines are repeated in the
terminal summary.
"""

import time

import numpy as np

from hybridcharge.baselines import highest_demand_baseline
from hybridcharge.cli import planning_window
from hybridcharge.demand import Forecaster
from hybridcharge.env import PlanningEnv
from hybridcharge.mcs import sanitize, support_stations
from hybridcharge.mpc import operate_mpc
from hybridcharge.oracle import brute_force, simulate_md1
from hybridcharge.plan import ChargingPlan, MobileCharger, ScenarioConfig, Station, budget_used
from hybridcharge.scenario import GeneratorConfig, generate_scenario
from hybridcharge.search import search_sa
from hybridcharge.utility import Context, benefit, detail, evaluate, max_arrivals, md1_wait

from helpers import hidden_surge_scenario, make_scenario, tiny_scenario

CFG = ScenarioConfig()
MU = 2.2571


def test_criterion_01_queue_simulation_matches_closed_form(verdict):
    parts, ok = [], True
    for rho in (0.3, 0.5, 0.7):
        t0 = time.perf_counter()
        r = simulate_md1(rho * MU, 1 / MU, 1_000_000, seed=2024)
        secs = time.perf_counter() - t0
        w = md1_wait(rho, MU)
        err = abs(r.mean_wait - w) / w
        ok &= err <= 0.05 and secs < 60
        parts.append(f"rho={rho}: sim {r.mean_wait:.4f} h vs {w:.4f} h, err {100 * err:.2f}%, {secs:.1f}s")
    verdict(1, "M/D/1 simulation within 5% of closed form", ok, "; ".join(parts))


def test_criterion_02_balking_matches_cap(verdict):
    d_max = max_arrivals(79.0, CFG)
    rate = 2 * d_max
    r = simulate_md1(rate, CFG.ev_battery_kwh / 79.0, 1_000_000, w_max=CFG.w_max_hours, seed=7)
    target = (rate - d_max) / rate
    ok_dmax = abs(d_max - 6241 / 3990) < 1e-12 and round(d_max, 4) == 1.5642
    ok_wait = r.mean_wait <= CFG.w_max_hours
    ok_frac = abs(r.balked_fraction - target) <= 0.10 * target
    verdict(2, "D_max cross-check with balking simulation", ok_dmax and ok_wait and ok_frac,
            f"D_max {d_max:.4f}; mean wait {r.mean_wait:.4f} h <= {CFG.w_max_hours}: {ok_wait}; "
            f"balked {r.balked_fraction:.4f} vs {target:.4f} (10%): {ok_frac}")


def test_criterion_03_annealing_reaches_enumerated_optimum(verdict):
    t0 = time.perf_counter()
    hits, gaps = 0, []
    for seed in range(10):
        sc = tiny_scenario(seed)
        best = brute_force(sc)
        found = search_sa(PlanningEnv(sc, mcs1=False, mcs2=False), eval_budget=10_000, seed=seed)
        u_sa = evaluate(found.plan, Context(sc)).utility
        hits += best.utility - u_sa <= 0.01 * abs(best.utility)
        gaps.append(best.utility - u_sa)
    secs = time.perf_counter() - t0
    verdict(3, "SA within 1% of brute force on tiny scenarios", hits >= 9 and secs < 300,
            f"{hits}/10 within 1%, worst gap {max(gaps):.4f}, {secs:.0f}s")


def _random_config(rng):
    return ScenarioConfig(n_mcs=int(rng.integers(0, 4)), max_chargers=int(rng.integers(1, 8)),
                          budget=float(rng.choice([3000.0, 2e4, 1e5, 5e5, 5.4e7])),
                          mc_battery_kwh=float(rng.choice([20.0, 50.0, 105.0])))


def test_criterion_04_random_edits_stay_feasible(verdict):
    rng = np.random.default_rng(4)
    sequences, violations, distinct = 0, [], 0
    for i in range(50):
        cfg = _random_config(rng)
        sc = generate_scenario(GeneratorConfig(n_nodes=int(rng.integers(4, 12)), n_slots=27, planning_start=24,
                                               peak_rate=float(rng.uniform(0.01, 2.0)), params=cfg), i)
        env = PlanningEnv(sc)
        checked = set()
        for _ in range(2000):
            plan = env.initial_plan
            for a in rng.integers(0, 5, int(rng.integers(1, 16))):
                nxt = env.successor(plan, int(a))
                plan = plan if nxt is None else nxt
                if plan in checked:
                    continue
                checked.add(plan)
                if budget_used(plan, cfg) > cfg.budget:
                    violations.append(("budget", i))
                if any(s.total > cfg.max_chargers for s in plan.stations):
                    violations.append(("K", i))
                for m in plan.mcs:
                    if any(q < 0 for q in m.energy) or m.final_energy < 0:
                        violations.append(("energy", i))
                    if any(not 0.0 <= d <= 1.0 for d in m.delta):
                        violations.append(("delta", i))
            sequences += 1
        distinct += len(checked)
    verdict(4, "feasibility invariants under random edits", not violations,
            f"{sequences} sequences, {distinct} distinct plans, {len(violations)} violations")


def _random_plan(sc, ctx, rng):
    ids = sc.network.ids
    k = int(rng.integers(0, len(ids) + 1))
    stations = []
    for v in rng.choice(ids, size=k, replace=False):
        x = tuple(int(c) for c in rng.integers(0, 4, sc.config.n_types))
        if sum(x):
            stations.append(Station(int(v), x))
    targets = [s.node for s in stations]
    fleets = []
    for j in range(sc.config.n_mcs):
        home = sc.depots[j % len(sc.depots)].node
        a = tuple(int(rng.choice(targets)) if targets and rng.random() < 0.6 else None for _ in range(ctx.n_slots))
        fleets.append(MobileCharger(id=j, depot=home, start_location=home,
                                    start_energy=float(rng.uniform(0, sc.config.fleet_battery_kwh)),
                                    assignment=a))
    return sanitize(ChargingPlan(tuple(stations), tuple(fleets), sc.depots), ctx)


def test_criterion_05_caps_hold(verdict):
    rng = np.random.default_rng(5)
    checked, bad, loss_checks = 0, 0, 0
    scenarios = [generate_scenario(GeneratorConfig(n_nodes=12, n_slots=27, planning_start=24,
                                                   params=ScenarioConfig(n_mcs=2)), s) for s in range(10)]
    w_max = CFG.w_max_hours
    while checked < 10_000:
        sc = scenarios[checked % len(scenarios)]
        scale = 10 ** rng.uniform(-3, 1)
        ctx = Context(sc, rng.exponential(scale, (3, len(sc.network))))
        det = detail(_random_plan(sc, ctx, rng), ctx)
        bad += int(np.any(det.wait > w_max)) + int(np.any(det.corrected > det.d_max))
        if det.arrivals.size and np.all(det.arrivals < det.d_max):
            loss_checks += 1
            bad += det.loss != 0
        checked += 1
    verdict(5, "waiting and arrival caps hold exactly", bad == 0,
            f"{checked} evaluations, {loss_checks} all-below-cap cases, {bad} violations")


def test_criterion_06_benefit_monotone(verdict):
    rng = np.random.default_rng(6)
    pairs, drops = 0, 0
    scenarios = [generate_scenario(GeneratorConfig(n_nodes=15, n_slots=27, planning_start=24,
                                                   params=ScenarioConfig(n_mcs=2)), s) for s in range(10)]
    while pairs < 1000:
        sc = scenarios[pairs % len(scenarios)]
        ctx = Context(sc)
        plan = _random_plan(sc, ctx, rng)
        perm = plan.permanent
        if not perm:
            continue
        s = perm[int(rng.integers(len(perm)))]
        x = list(s.chargers)
        x[int(rng.integers(len(x)))] += 1
        bigger = plan.with_station(Station(s.node, tuple(x)))
        drops += benefit(bigger, ctx) < benefit(plan, ctx)
        pairs += 1
    verdict(6, "adding a charger never lowers benefit", drops == 0, f"{pairs} pairs, {drops} decreases")


def test_criterion_07_rewards_telescope(verdict):
    rng = np.random.default_rng(7)
    worst = 0.0
    for ep in range(100):
        cfg = ScenarioConfig(n_mcs=int(rng.integers(0, 4)))
        sc = generate_scenario(GeneratorConfig(n_nodes=int(rng.integers(5, 15)), n_slots=27, planning_start=24,
                                               params=cfg), ep)
        env = PlanningEnv(sc, episode_length=int(rng.integers(5, 40)))
        state = first = env.reset()
        total = 0.0
        done = False
        while not done:
            state, r, done = env.step(state, int(rng.integers(5)))
            total += r
        worst = max(worst, abs(total - (state.utility - first.utility)))
    verdict(7, "episode rewards telescope", worst <= 1e-9, f"100 episodes, max error {worst:.2e}")


def test_criterion_08_support_relieves_overload(verdict):
    d_max = max_arrivals(79.0, CFG)
    # one node: arrivals = dem / eps = 1.5 * D_max
    sc = make_scenario(1, [], np.array([[1.5 * d_max * CFG.eps_km]]), depots=(0,), horizon_slots=1, n_mcs=1)
    ctx = Context(sc)
    plan = sanitize(ChargingPlan((Station(0, (1, 1, 1)),), sc.empty_plan(1).mcs, sc.depots), ctx)
    before = detail(plan, ctx)
    after = detail(support_stations(plan, ctx, 0), ctx)
    expected_after = max_arrivals(499.0, CFG)
    ok = (after.d_max[0, 0] > before.d_max[0, 0] and after.loss < before.loss
          and abs(after.d_max[0, 0] - expected_after) < 1e-9 and abs(before.loss - 0.5 * d_max) < 1e-9)
    verdict(8, "station support raises D_max and cuts loss", ok,
            f"D_max {before.d_max[0, 0]:.4f} -> {after.d_max[0, 0]:.4f} (closed form {expected_after:.4f}); "
            f"loss {before.loss:.4f} -> {after.loss:.4f}")


def test_criterion_09_fleets_and_forecasts_help(verdict):
    wins = 0
    for seed in range(20):
        sc = generate_scenario(GeneratorConfig(n_nodes=30, surge_rate=0.05), seed)
        window = planning_window(sc, "oracle")
        full = search_sa(PlanningEnv(sc, window), eval_budget=500, seed=seed)
        bare_sc = sc.with_config(n_mcs=0)
        bare = search_sa(PlanningEnv(bare_sc, window), eval_budget=500, seed=seed)
        u_full = evaluate(full.plan, Context(sc, window)).utility
        u_bare = evaluate(bare.plan, Context(bare_sc, window)).utility
        wins += u_full >= u_bare
    hs = hidden_surge_scenario()
    plan = sanitize(ChargingPlan((Station(0, (1, 0, 0)), Station(2, (1, 0, 0))), hs.empty_plan().mcs, hs.depots),
                    Context(hs))
    seen = operate_mpc(plan, hs, Forecaster("oracle"), 4).aggregate.queuing_loss
    blind = operate_mpc(plan, hs, Forecaster("seasonal-naive", season=24), 4).aggregate.queuing_loss
    verdict(9, "full pipeline vs no fleets; oracle vs seasonal-naive operation", wins >= 16 and seen <= blind,
            f"full >= no-fleet in {wins}/20; loss oracle {seen:.4f} vs naive {blind:.4f}")


def test_criterion_10_search_beats_highest_demand(verdict):
    wins = 0
    for seed in range(100, 120):
        sc = generate_scenario(GeneratorConfig(n_nodes=30), seed)
        window = planning_window(sc, "oracle")
        ctx = Context(sc, window)
        found = search_sa(PlanningEnv(sc, window), eval_budget=500, seed=seed)
        wins += evaluate(found.plan, ctx).utility >= evaluate(highest_demand_baseline(sc, window), ctx).utility
    verdict(10, "SA plan >= highest-demand baseline", wins >= 16, f"{wins}/20 seeds")
