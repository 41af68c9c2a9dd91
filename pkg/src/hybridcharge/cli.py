"""Command-line entry point: ``hybridcharge <command> ...``.

Exit codes: 0 success, 2 usage error, 3 malformed input file, 4 unreadable
file, 5 infeasible configuration, 6 runtime failure (learner divergence,
forecaster failure, ...).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .baselines import highest_demand_baseline
from .demand import FORECASTER_KINDS, Forecaster, InsufficientHistory, forecast
from .env import PlanningEnv
from .learner import LearnerConfig, LearnerDiverged, train_learner
from .mpc import operate_mpc
from .oracle import UnstableQueue, simulate_md1
from .plan import ChargingPlan, InfeasibleTarget, ScenarioConfig
from .report import REFERENCE, MetricsReport
from .scenario import GeneratorConfig, Scenario, generate_scenario
from .search import greedy, search_sa
from .utility import METRICS, Context, evaluate, md1_wait

DRIVERS = ("greedy", "sa", "learner", "highest-demand")
PARAM_ALIASES = {"K": "max_chargers", "Budget": "budget", "W_max": "w_max_minutes", "M": "n_mcs",
                 "R_max": "r_max_km"}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise CliError(f"usage error: {message}", 2)


def _csv_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def parse_values(text: str) -> list[float]:
    """``4..36`` (step 1), ``4..36:4`` or ``4,8,12``."""
    if ".." in text:
        span, _, step = text.partition(":")
        lo, _, hi = span.partition("..")
        try:
            lo_v, hi_v = float(lo), float(hi)
            step_v = float(step) if step else 1.0
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad range {text!r}") from exc
        if step_v <= 0 or hi_v < lo_v:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        n = int(np.floor((hi_v - lo_v) / step_v + 1e-9)) + 1
        return [lo_v + i * step_v for i in range(n)]
    return _csv_floats(text)


def _scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", required=True, help="scenario JSON file")


def _flag_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-mcs1", action="store_true", help="disable station support dispatch")
    p.add_argument("--no-mcs2", action="store_true", help="disable temporary charging areas")
    p.add_argument("--repeat", action="store_true", help="repeat both heuristics until no fleet moves")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="hybridcharge", description="Hybrid fixed/mobile charging station planning.")
    sub = root.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic scenario")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--nodes", type=int, default=GeneratorConfig.n_nodes)
    g.add_argument("--slots", type=int, default=GeneratorConfig.n_slots)
    g.add_argument("--hotspots", type=int, default=GeneratorConfig.n_hotspots)
    g.add_argument("--depots", type=int, default=GeneratorConfig.n_depots)
    g.add_argument("--extent-km", type=float, default=GeneratorConfig.extent_km)
    g.add_argument("--peak-rate", type=float, default=GeneratorConfig.peak_rate)
    g.add_argument("--surge-rate", type=float, default=GeneratorConfig.surge_rate)
    g.add_argument("--planning-start", type=int, default=GeneratorConfig.planning_start)

    p = sub.add_parser("plan", help="run a planning driver")
    _scenario_args(p)
    p.add_argument("--driver", choices=DRIVERS, default="sa")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-evals", type=int, default=2000,
                   help="new transitions for sa, training steps for learner")
    p.add_argument("--forecaster", choices=FORECASTER_KINDS, default="oracle",
                   help="demand window the planner sees")
    p.add_argument("--curve", help="learner training curve CSV")
    p.add_argument("--out", required=True, help="plan JSON")
    _flag_args(p)

    e = sub.add_parser("evaluate", help="score a plan against the reference plan")
    _scenario_args(e)
    e.add_argument("--plan", required=True)
    e.add_argument("--out", help="report JSON")

    o = sub.add_parser("operate", help="rolling-horizon fleet operation of a plan")
    _scenario_args(o)
    o.add_argument("--plan", required=True)
    o.add_argument("--slots", type=int, default=None, help="slots to operate (default: scenario horizon)")
    o.add_argument("--start", type=int, default=None, help="first slot (default: planning start)")
    o.add_argument("--forecaster", choices=FORECASTER_KINDS, default="oracle")
    o.add_argument("--no-mpc", action="store_true", help="forecast by repeating the last observed slot")
    o.add_argument("--out", required=True, help="event log CSV")
    o.add_argument("--slots-out", help="per-slot breakdown CSV")
    _flag_args(o)

    s = sub.add_parser("simulate", help="M/D/1 queue simulation against the closed form")
    s.add_argument("--mu", type=float, default=2.2571, help="service rate, EV/h")
    s.add_argument("--rho", type=_csv_floats, default=[0.3, 0.5, 0.7])
    s.add_argument("--arrivals", type=float, default=1e6)
    s.add_argument("--w-max", type=float, default=None, help="waiting cap in hours (enables balking)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="CSV (default stdout)")

    r = sub.add_parser("report", help="merge plan files into a comparison table")
    _scenario_args(r)
    r.add_argument("plans", nargs="+", help="plan JSON files")
    r.add_argument("--out", help="report JSON")
    r.add_argument("--csv", help="report CSV")

    w = sub.add_parser("sweep", help="re-plan while varying one parameter")
    _scenario_args(w)
    w.add_argument("--param", required=True, help="K, Budget, W_max, M, R_max or any parameter field name")
    w.add_argument("--values", required=True, type=parse_values, help="4..36, 4..36:4 or 4,8,12")
    w.add_argument("--driver", choices=DRIVERS, default="sa")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--budget-evals", type=int, default=500)
    w.add_argument("--out", required=True, help="CSV")
    _flag_args(w)
    return root


def planning_window(scenario: Scenario, kind: str = "oracle") -> np.ndarray:
    f = Forecaster(kind, season=24)
    return forecast(f, scenario.demand, scenario.planning_start - 1, truth=scenario.demand,
                    steps=scenario.horizon)


def run_driver(scenario: Scenario, driver: str, seed: int = 0, budget_evals: int = 2000,
               mcs1: bool = True, mcs2: bool = True, repeat: bool = False, forecaster: str = "oracle",
               curve_path: Optional[str] = None) -> ChargingPlan:
    window = planning_window(scenario, forecaster)
    if driver == "highest-demand":
        return highest_demand_baseline(scenario, window)
    env = PlanningEnv(scenario, window, mcs1=mcs1, mcs2=mcs2, repeat=repeat)
    if driver == "greedy":
        return greedy(env).plan
    if driver == "sa":
        return search_sa(env, budget_evals, seed=seed).plan
    result = train_learner(env, LearnerConfig(max_steps=budget_evals), seed=seed)
    if curve_path:
        with open(curve_path, "w", newline="") as fh:
            cw = csv.writer(fh, lineterminator="\n")
            cw.writerow(["step", "mean_episode_reward"])
            cw.writerows((s, repr(v)) for s, v in result.curve)
    return result.plan


def _cmd_gen(a) -> int:
    params = io.env_overrides(ScenarioConfig())
    cfg = GeneratorConfig(n_nodes=a.nodes, n_slots=a.slots, n_hotspots=a.hotspots, n_depots=a.depots,
                          extent_km=a.extent_km, peak_rate=a.peak_rate, surge_rate=a.surge_rate,
                          planning_start=a.planning_start, params=params)
    sc = generate_scenario(cfg, a.seed)
    io.save_scenario(sc, a.out)
    print(f"wrote {a.out}: {len(sc.network)} nodes, {sc.demand.n_slots} slots, {len(sc.depots)} depots")
    return 0


def _cmd_plan(a) -> int:
    sc = io.load_scenario(a.scenario)
    t0 = time.perf_counter()
    plan = run_driver(sc, a.driver, a.seed, a.budget_evals, not a.no_mcs1, not a.no_mcs2, a.repeat,
                      a.forecaster, a.curve)
    runtime = time.perf_counter() - t0
    bd = evaluate(plan, Context(sc))
    run = {"approach": a.driver, "seed": a.seed, "budget_evals": a.budget_evals,
           "config_hash": io.config_hash(sc.config), "runtime_s": round(runtime, 3),
           "mcs1": not a.no_mcs1, "mcs2": not a.no_mcs2, "forecaster": a.forecaster,
           "breakdown": bd.as_dict()}
    io.save_plan(plan, a.out, run)
    print(f"{a.driver}: utility {bd.utility:.6f}, {len(plan.permanent)} stations, "
          f"{sum(m.employed for m in plan.mcs)} fleets employed -> {a.out}")
    return 0


def _report(sc: Scenario, named: list[tuple[str, ChargingPlan, dict]]) -> MetricsReport:
    ctx = Context(sc)
    ref = sc.reference_plan if sc.reference_plan is not None else sc.empty_plan(ctx.n_slots)
    bds = {REFERENCE: evaluate(ref, ctx)}
    meta = {REFERENCE: {"config_hash": io.config_hash(sc.config)}}
    for name, plan, run in named:
        if name in bds:
            raise CliError(f"duplicate approach name {name!r} in report inputs", 2)
        bds[name] = evaluate(plan, ctx)
        meta[name] = {k: v for k, v in run.items() if k != "breakdown"}
    return MetricsReport(bds, meta)


def _cmd_evaluate(a) -> int:
    sc = io.load_scenario(a.scenario)
    data = io.read_json(a.plan)
    plan = io.plan_from_dict(data, sc)
    run = data.get("run", {})
    rep = _report(sc, [(run.get("approach", Path(a.plan).stem), plan, run)])
    print(rep.table(), end="")
    if a.out:
        io.write_json(a.out, rep.to_dict())
    return 0


def _cmd_report(a) -> int:
    sc = io.load_scenario(a.scenario)
    named = []
    for path in a.plans:
        data = io.read_json(path)
        run = data.get("run", {})
        named.append((run.get("approach", Path(path).stem), io.plan_from_dict(data, sc), run))
    rep = _report(sc, named)
    print(rep.table(), end="")
    if a.out:
        io.write_json(a.out, rep.to_dict())
    if a.csv:
        Path(a.csv).write_text(rep.csv())
    return 0


def _cmd_operate(a) -> int:
    sc = io.load_scenario(a.scenario)
    plan = io.load_plan(a.plan, sc)
    kind = "persistence" if a.no_mpc else a.forecaster
    slots = sc.horizon if a.slots is None else a.slots
    res = operate_mpc(plan, sc, Forecaster(kind), slots, start=a.start,
                      mcs1=not a.no_mcs1, mcs2=not a.no_mcs2, repeat=a.repeat)
    with open(a.out, "w", newline="") as fh:
        cw = csv.writer(fh, lineterminator="\n")
        cw.writerow(["mc", "slot", "kind", "target", "tau_arrival_min", "delta"])
        for ev in res.events:
            cw.writerow([ev.mc, ev.slot, ev.kind, "" if ev.target is None else ev.target,
                         repr(ev.tau_arrival), repr(ev.delta)])
    if a.slots_out:
        with open(a.slots_out, "w", newline="") as fh:
            cw = csv.writer(fh, lineterminator="\n")
            cw.writerow(["slot", "utility"] + list(METRICS))
            for k, b in enumerate(res.slots):
                cw.writerow([res.start + k, repr(b.utility)] + [repr(getattr(b, m)) for m in METRICS])
    agg = res.aggregate
    print(f"operated {slots} slots with {kind} forecasts: mean utility {agg.utility:.6f}, "
          f"queuing loss {agg.queuing_loss:.6f}, {len(res.events)} events -> {a.out}")
    return 0


def _cmd_simulate(a) -> int:
    rows = [["rho", "mu_per_h", "arrival_rate_per_h", "service_time_h", "w_max_h", "analytic_wait_h",
             "simulated_wait_h", "ci_half_width_h", "served", "balked", "balked_fraction"]]
    for rho in a.rho:
        lam = rho * a.mu
        res = simulate_md1(lam, 1.0 / a.mu, int(a.arrivals), a.w_max, a.seed)
        analytic = md1_wait(rho, a.mu) if rho < 1 else float("inf")
        rows.append([repr(rho), repr(a.mu), repr(lam), repr(1.0 / a.mu), "" if a.w_max is None else repr(a.w_max),
                     repr(analytic), repr(res.mean_wait), repr(res.half_width), res.served, res.balked,
                     repr(res.balked_fraction)])
    out = open(a.out, "w", newline="") if a.out else sys.stdout
    try:
        csv.writer(out, lineterminator="\n").writerows(rows)
    finally:
        if a.out:
            out.close()
    return 0


def _cmd_sweep(a) -> int:
    sc = io.load_scenario(a.scenario)
    field = PARAM_ALIASES.get(a.param, a.param)
    names = {f.name: f for f in dataclasses.fields(ScenarioConfig)}
    if field not in names or field == "charger_types":
        raise CliError(f"unknown sweep parameter {a.param!r}", 2)
    is_int = isinstance(getattr(sc.config, field), int)
    with open(a.out, "w", newline="") as fh:
        cw = csv.writer(fh, lineterminator="\n")
        cw.writerow([a.param, "utility"] + list(METRICS) + ["stations", "fleets_employed"])
        for v in a.values:
            value = int(round(v)) if is_int else v
            variant = sc.with_config(**{field: value})
            plan = run_driver(variant, a.driver, a.seed, a.budget_evals, not a.no_mcs1, not a.no_mcs2, a.repeat)
            b = evaluate(plan, Context(variant))
            cw.writerow([value, repr(b.utility)] + [repr(getattr(b, m)) for m in METRICS]
                        + [len(plan.permanent), sum(m.employed for m in plan.mcs)])
            print(f"{a.param}={value}: utility {b.utility:.6f}")
    return 0


COMMANDS = {"gen": _cmd_gen, "plan": _cmd_plan, "evaluate": _cmd_evaluate, "report": _cmd_report,
            "operate": _cmd_operate, "simulate": _cmd_simulate, "sweep": _cmd_sweep}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"error: unreadable file: {exc}", file=sys.stderr)
        return 4
    except io.FormatError as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return 3
    except (InfeasibleTarget, UnstableQueue, InsufficientHistory) as exc:
        print(f"error: infeasible configuration: {exc}", file=sys.stderr)
        return 5
    except LearnerDiverged as exc:
        print(f"error: learner diverged: {exc}", file=sys.stderr)
        return 6
    except ValueError as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return 5
    except RuntimeError as exc:
        print(f"error: run failed: {exc}", file=sys.stderr)
        return 6


def main() -> None:
    sys.exit(run_cli())
