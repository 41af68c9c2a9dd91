"""Plan a city: greedy, simulated annealing and the highest-demand baseline,
reported as percentages of the existing stations."""

from hybridcharge.baselines import highest_demand_baseline
from hybridcharge.cli import planning_window
from hybridcharge.env import PlanningEnv
from hybridcharge.report import REFERENCE, MetricsReport
from hybridcharge.scenario import GeneratorConfig, generate_scenario
from hybridcharge.search import greedy, search_sa
from hybridcharge.utility import Context, evaluate

sc = generate_scenario(GeneratorConfig(n_nodes=30), seed=11)
window = planning_window(sc, "oracle")
ctx = Context(sc, window)
print(f"{len(sc.network)} nodes, {sc.demand.n_slots} slots of demand, planning slots "
      f"{sc.planning_start}..{sc.planning_start + sc.horizon - 1}")
print("existing stations:", [(s.node, s.chargers) for s in sc.reference_plan.stations])

plans = {
    "greedy": greedy(PlanningEnv(sc, window)).plan,
    "annealing": search_sa(PlanningEnv(sc, window), eval_budget=1000, seed=0).plan,
    "highest-demand": highest_demand_baseline(sc, window),
}
breakdowns = {REFERENCE: evaluate(sc.reference_plan, ctx)}
breakdowns.update({name: evaluate(p, ctx) for name, p in plans.items()})
print(MetricsReport(breakdowns).table())

best = plans["annealing"]
print("annealing stations:", [(s.node, s.chargers) for s in best.permanent])
busy = [m for m in best.mcs if m.employed]
print(f"{len(busy)} of {len(best.mcs)} fleets dispatched; first few:")
for m in busy[:4]:
    print(f"  fleet {m.id}: targets {m.assignment}, usable share {[round(d, 2) for d in m.delta]}")
