"""How the per-station charger limit changes the planned network."""

from hybridcharge.cli import planning_window
from hybridcharge.env import PlanningEnv
from hybridcharge.scenario import GeneratorConfig, generate_scenario
from hybridcharge.search import search_sa
from hybridcharge.utility import Context, evaluate

base = generate_scenario(GeneratorConfig(n_nodes=25), seed=8)
print(f"{'K':>3} {'utility':>8} {'benefit':>8} {'cost':>8} {'loss':>8} stations")
for k in (1, 2, 4, 8, 16, 32):
    sc = base.with_config(max_chargers=k)
    window = planning_window(sc)
    plan = search_sa(PlanningEnv(sc, window), eval_budget=400, seed=0).plan
    b = evaluate(plan, Context(sc, window))
    print(f"{k:>3} {b.utility:>8.4f} {b.benefit:>8.4f} {b.cost:>8.4f} {b.queuing_loss:>8.4f} {len(plan.permanent)}")
