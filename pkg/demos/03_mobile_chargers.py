"""Mobile charger fleets: supporting an overloaded station, opening a
temporary charging area, and returning to a depot when drained."""

import numpy as np

from hybridcharge.mcs import establish_flex_areas, events, rollout, sanitize, support_stations
from hybridcharge.network import Edge, Node, build_network
from hybridcharge.plan import ChargingPlan, Depot, MobileCharger, ScenarioConfig, Station
from hybridcharge.demand import DemandMatrix
from hybridcharge.scenario import Scenario
from hybridcharge.utility import Context, detail, evaluate

# Four nodes on a line, 1.5 km apart; the depot is node 1.
nodes = [Node(i, 114.0 + 0.015 * i, 22.5) for i in range(4)]
edges = [e for i in range(3) for e in (Edge(i, i + 1, 1.5), Edge(i + 1, i, 1.5))]
cfg = ScenarioConfig(n_mcs=2, horizon_slots=3)
demand = DemandMatrix(np.tile([0.4, 0.01, 0.01, 0.3], (3, 1)))
sc = Scenario(build_network(nodes, edges), demand, (Depot(1),), cfg)
ctx = Context(sc)

plan = sanitize(ChargingPlan((Station(0, (1, 0, 0)),), sc.empty_plan().mcs, sc.depots), ctx)
before = detail(plan, ctx)
print(f"station 0 alone: arrivals {before.arrivals[0, 0]:.2f} EV/h vs cap {before.d_max[0, 0]:.2f}, "
      f"loss {before.loss:.2f}")

plan = support_stations(plan, ctx, 0)
after = detail(plan, ctx)
print(f"after support: cap {after.d_max[0, 0]:.2f} EV/h, loss {after.loss:.2f}")

plan = establish_flex_areas(plan, ctx, 0)
print("temporary areas:", [s.node for s in plan.stations if s.temporary])
for ev in events(plan):
    print(f"  fleet {ev.mc} slot {ev.slot}: {ev.kind} at {ev.target}, available from minute "
          f"{ev.tau_arrival:.1f}, usable share {ev.delta:.2f}")
print(f"utility {evaluate(plan, ctx).utility:.4f}")

# A fleet that starts nearly empty is sent to recharge first.
low = MobileCharger(id=9, depot=1, start_location=3, start_energy=100.0, assignment=(0, 0, 0))
trace = rollout(low, sc.depots, ctx)
print(f"low fleet: recalled to {trace.recalls[0]}, available at minute {trace.tau[0]:.1f}, "
      f"targets {trace.assignment}, energy per slot {trace.energy}")
