"""Joint planning of fixed charging stations and mobile charger fleets on a
road network, with a rolling-horizon operation loop."""

from .baselines import highest_demand_baseline
from .demand import DemandMatrix, Forecaster, allocate_demand, forecast
from .env import EnvState, PlanningEnv, observe
from .learner import LearnerConfig, train_learner
from .mcs import advance, discount, establish_flex_areas, schedule, support_stations
from .mpc import OperationResult, operate_mpc
from .network import Edge, Node, RoadNetwork, build_network
from .oracle import brute_force, simulate_md1
from .plan import (ChargerType, ChargingPlan, Depot, MobileCharger, ScenarioConfig, Station, budget_used,
                   cheapest_config)
from .actions import Action, apply_action
from .scenario import GeneratorConfig, Scenario, generate_scenario
from .search import greedy, search_sa
from .utility import Context, UtilityBreakdown, evaluate

__all__ = [
    "Action", "ChargerType", "ChargingPlan", "Context", "DemandMatrix", "Depot", "Edge", "EnvState",
    "Forecaster", "GeneratorConfig", "LearnerConfig", "MobileCharger", "Node", "OperationResult",
    "PlanningEnv", "RoadNetwork", "Scenario", "ScenarioConfig", "Station", "UtilityBreakdown",
    "advance", "allocate_demand", "apply_action", "brute_force", "budget_used", "build_network",
    "cheapest_config", "discount", "establish_flex_areas", "evaluate", "forecast", "generate_scenario",
    "greedy", "highest_demand_baseline", "observe", "operate_mpc", "schedule", "search_sa",
    "simulate_md1", "support_stations", "train_learner",
]
