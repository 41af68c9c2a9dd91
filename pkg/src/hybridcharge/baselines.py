"""Reference planners used for comparison."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .plan import ChargingPlan, Station, sizing_config
from .scenario import Scenario


def highest_demand_baseline(scenario: Scenario, demand: Optional[np.ndarray] = None) -> ChargingPlan:
    """Walk nodes by descending total demand over the window and install the
    peak-sized configuration wherever it still fits the budget. No fleets.

    Equal totals go to the lower node id; unaffordable nodes are skipped.
    """
    cfg = scenario.config
    dem = scenario.truth_window() if demand is None else np.asarray(demand, dtype=float)
    ids = np.array(scenario.network.ids)
    total = dem.sum(axis=0)
    order = sorted(range(len(ids)), key=lambda i: (-total[i], ids[i]))
    fees = cfg.fees()
    left = cfg.budget
    stations = []
    for i in order:
        x = sizing_config(float(dem[:, i].max()), cfg)
        fee = float(np.dot(x, fees))
        if sum(x) and fee <= left:
            stations.append(Station(int(ids[i]), x))
            left -= fee
    return ChargingPlan(tuple(stations), (), scenario.depots)
