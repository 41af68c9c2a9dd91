import numpy as np
import pytest

from hybridcharge.demand import Forecaster
from hybridcharge.env import PlanningEnv
from hybridcharge.mcs import sanitize
from hybridcharge.mpc import operate_mpc
from hybridcharge.plan import ChargingPlan, ScenarioConfig, Station
from hybridcharge.scenario import GeneratorConfig, generate_scenario
from hybridcharge.search import search_sa
from hybridcharge.utility import Context, evaluate

from helpers import hidden_surge_scenario

ORACLE = Forecaster("oracle")


@pytest.fixture(scope="module")
def planned():
    sc = generate_scenario(GeneratorConfig(n_nodes=15, n_slots=36, planning_start=24,
                                           params=ScenarioConfig(n_mcs=3)), seed=2)
    res = search_sa(PlanningEnv(sc), eval_budget=300, seed=0)
    return sc, res.plan


def test_flags_off_is_static(planned):
    sc, plan = planned
    out = operate_mpc(plan, sc, ORACLE, 6, mcs1=False, mcs2=False)
    static = ChargingPlan(plan.permanent, sc.empty_plan(1).mcs, plan.depots)
    for k, (bd, now) in enumerate(zip(out.slots, out.committed)):
        ctx = Context(sc, sc.demand.window(sc.planning_start + k, 1))
        assert bd == evaluate(sanitize(static, ctx), ctx)
        for m, m0 in zip(now.mcs, plan.mcs):
            assert m.start_location == m0.start_location and m.start_energy == m0.start_energy
            assert not m.employed
    assert all(e.kind == "idle" for e in out.events)


def test_single_slot_without_fleets_matches_evaluate():
    sc = generate_scenario(GeneratorConfig(n_nodes=12, n_slots=30, planning_start=24,
                                           params=ScenarioConfig(n_mcs=0)), seed=4)
    plan = ChargingPlan((Station(int(sc.network.ids[0]), (2, 1, 0)), Station(int(sc.network.ids[5]), (1, 0, 0))))
    for s in (24, 27):
        out = operate_mpc(plan, sc, ORACLE, 1, start=s)
        ctx = Context(sc, sc.demand.window(s, 1))
        assert out.slots == [evaluate(plan, ctx)]


def test_dispatch_follows_the_forecast():
    sc = hidden_surge_scenario()
    plan = sanitize(ChargingPlan((Station(0, (1, 0, 0)), Station(2, (1, 0, 0))), sc.empty_plan().mcs,
                                 sc.depots), Context(sc, sc.truth_window()))
    seen = operate_mpc(plan, sc, ORACLE, 4, mcs2=False)
    blind = operate_mpc(plan, sc, Forecaster("seasonal-naive", season=24), 4, mcs2=False)
    assert seen.events[0].target == 0 and blind.events[0].target == 2
    assert seen.aggregate.queuing_loss < blind.aggregate.queuing_loss


def test_fleets_keep_state_between_slots(planned):
    sc, plan = planned
    out = operate_mpc(plan, sc, ORACLE, 8)
    for a, b in zip(out.committed, out.committed[1:]):
        for m, n in zip(a.mcs, b.mcs):
            assert n.start_location == m.final_location
            assert n.start_energy == pytest.approx(m.final_energy)
    assert {e.slot for e in out.events} <= set(range(24, 32))
    agg = out.aggregate
    assert agg.queuing_loss == pytest.approx(sum(b.queuing_loss for b in out.slots))
    assert agg.utility == pytest.approx(np.mean([b.utility for b in out.slots]))


def test_window_outside_record():
    sc = hidden_surge_scenario()
    with pytest.raises(ValueError):
        operate_mpc(ChargingPlan(), sc, ORACLE, 10)
