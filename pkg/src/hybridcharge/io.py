"""JSON reading and writing for scenarios, plans and metric reports.

Units are part of every physical field name (``length_km``, ``power_kw``,
``fee_cny``, ``rate_ev_per_h`` ...). The schema is described in the README.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from .demand import DemandMatrix, allocate_demand
from .mcs import rollout
from .network import Edge, Node, build_network
from .plan import ChargerType, ChargingPlan, Depot, MobileCharger, ScenarioConfig, Station
from .scenario import Scenario
from .utility import Context

SCENARIO_FORMAT = "hybridcharge-scenario/1"
PLAN_FORMAT = "hybridcharge-plan/1"
ENV_PREFIX = "HYBRIDCHARGE_"

# ScenarioConfig field -> file key (fields whose names lack a unit get one)
_PARAM_KEYS = {
    "budget": "budget_cny",
    "mc_fee": "mc_fee_cny",
}


class FormatError(ValueError):
    """A scenario or plan file does not follow the schema."""


def _key(field: str) -> str:
    return _PARAM_KEYS.get(field, field)


def params_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "charger_types":
            out["charger_types"] = [{"power_kw": c.power_kw, "fee_cny": c.fee} for c in v]
        else:
            out[_key(f.name)] = v
    return out


def params_from_dict(data: Mapping[str, Any]) -> ScenarioConfig:
    known = {_key(f.name): f.name for f in dataclasses.fields(ScenarioConfig)}
    kwargs: dict[str, Any] = {}
    for k, v in data.items():
        if k not in known:
            raise FormatError(f"unknown parameter {k!r}")
        name = known[k]
        if name == "charger_types":
            try:
                v = tuple(ChargerType(float(c["power_kw"]), float(c["fee_cny"])) for c in v)
            except (KeyError, TypeError) as exc:
                raise FormatError(f"charger_types entries need power_kw and fee_cny: {exc}") from exc
        kwargs[name] = v
    return ScenarioConfig(**kwargs)


def env_overrides(cfg: ScenarioConfig, environ: Optional[Mapping[str, str]] = None) -> ScenarioConfig:
    """Apply ``HYBRIDCHARGE_<FIELD>=value`` overrides (e.g. ``HYBRIDCHARGE_MAX_CHARGERS=10``)."""
    environ = os.environ if environ is None else environ
    changes: dict[str, Any] = {}
    for f in dataclasses.fields(cfg):
        if f.name == "charger_types":
            continue
        raw = environ.get(ENV_PREFIX + f.name.upper())
        if raw is None:
            continue
        current = getattr(cfg, f.name)
        try:
            if isinstance(current, bool):
                changes[f.name] = raw.lower() in ("1", "true", "yes")
            elif isinstance(current, int):
                changes[f.name] = int(raw)
            else:
                changes[f.name] = float(raw)
        except ValueError as exc:
            raise FormatError(f"environment override {ENV_PREFIX + f.name.upper()}={raw!r} is not a number") from exc
    return dataclasses.replace(cfg, **changes) if changes else cfg


def plan_to_dict(plan: ChargingPlan) -> dict[str, Any]:
    return {
        "format": PLAN_FORMAT,
        "stations": [{"node": s.node, "chargers": list(s.chargers), "temporary": s.temporary}
                     for s in plan.stations],
        "depots": [{"node": d.node, "power_kw": d.power_kw} for d in plan.depots],
        "mobile_chargers": [{
            "id": m.id, "depot": m.depot, "start_location": m.start_location,
            "start_energy_kwh": m.start_energy, "start_ready_minutes": m.start_ready,
            "hired": m.hired, "assignment": list(m.assignment),
        } for m in plan.mcs],
    }


def plan_from_dict(data: Mapping[str, Any], scenario: Scenario) -> ChargingPlan:
    """Rebuild a plan; fleet trajectories are recomputed from the assignments."""
    if data.get("format", PLAN_FORMAT) != PLAN_FORMAT:
        raise FormatError(f"expected plan format {PLAN_FORMAT}, got {data.get('format')!r}")
    try:
        stations = tuple(Station(int(s["node"]), tuple(s["chargers"]), bool(s.get("temporary", False)))
                         for s in data.get("stations", []))
        depots = tuple(Depot(int(d["node"]), float(d["power_kw"])) for d in data.get("depots", []))
        raw_mcs = [dict(m) for m in data.get("mobile_chargers", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed plan: {exc}") from exc
    for s in stations:
        if s.node not in scenario.network:
            raise FormatError(f"plan station at unknown node {s.node}")
    ctx = Context(scenario)
    mcs = []
    for m in raw_mcs:
        try:
            a = tuple(None if x is None else int(x) for x in m["assignment"])
            base = MobileCharger(id=int(m["id"]), depot=int(m["depot"]), start_location=int(m["start_location"]),
                                 start_energy=float(m["start_energy_kwh"]),
                                 start_ready=float(m.get("start_ready_minutes", 0.0)),
                                 hired=bool(m.get("hired", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed mobile charger entry: {exc}") from exc
        mcs.append(rollout(base, depots, ctx, a, n_slots=len(a)))
    return ChargingPlan(stations, tuple(mcs), depots)


def scenario_to_dict(sc: Scenario) -> dict[str, Any]:
    net = sc.network
    return {
        "format": SCENARIO_FORMAT,
        "network": {
            "metric": net.metric,
            "nodes": [{"id": n.id, "lon": n.lon, "lat": n.lat} for n in net.nodes],
            "edges": [{"from": e.source, "to": e.target, "length_km": e.length_km} for e in net.edges],
        },
        "demand": {"slot_minutes": sc.demand.slot_minutes,
                   "rate_ev_per_h": np.asarray(sc.demand.values).tolist()},
        "depots": [{"node": d.node, "power_kw": d.power_kw} for d in sc.depots],
        "params": params_to_dict(sc.config),
        "planning_start": sc.planning_start,
        "reference_plan": None if sc.reference_plan is None else plan_to_dict(sc.reference_plan),
    }


def scenario_from_dict(data: Mapping[str, Any], overrides: Optional[Mapping[str, str]] = None) -> Scenario:
    if data.get("format") != SCENARIO_FORMAT:
        raise FormatError(f"expected scenario format {SCENARIO_FORMAT}, got {data.get('format')!r}")
    try:
        net_d = data["network"]
        nodes = [Node(int(n["id"]), float(n["lon"]), float(n["lat"])) for n in net_d["nodes"]]
        edges = [Edge(int(e["from"]), int(e["to"]), float(e["length_km"])) for e in net_d.get("edges", [])]
        net = build_network(nodes, edges, net_d.get("metric", "network"))
        cfg = params_from_dict(data.get("params", {}))
        cfg = env_overrides(cfg, overrides)
        dem_d = data["demand"]
        slot_minutes = float(dem_d.get("slot_minutes", cfg.slot_minutes))
        if "rate_ev_per_h" in dem_d:
            demand = DemandMatrix(np.asarray(dem_d["rate_ev_per_h"], dtype=float), slot_minutes)
        elif "station_series_ev_per_h" in dem_d:
            series = {int(k): v for k, v in dem_d["station_series_ev_per_h"].items()}
            demand = allocate_demand(series, net, power=float(dem_d.get("idw_power", 1.0)),
                                     eps_km=cfg.eps_km, slot_minutes=slot_minutes)
        else:
            raise FormatError("demand needs rate_ev_per_h or station_series_ev_per_h")
        depots = tuple(Depot(int(d["node"]), float(d.get("power_kw", cfg.depot_power_kw)))
                       for d in data.get("depots", []))
        start = int(data.get("planning_start", 0))
    except FormatError:
        raise
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed scenario: missing or mistyped field {exc}") from exc
    sc = Scenario(net, demand, depots, cfg, None, start)
    ref = data.get("reference_plan")
    if ref is not None:
        sc = dataclasses.replace(sc, reference_plan=plan_from_dict(ref, sc))
    return sc


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc}") from exc


def write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(dumps(data))


def save_scenario(sc: Scenario, path: str | Path) -> None:
    write_json(path, scenario_to_dict(sc))


def load_scenario(path: str | Path, overrides: Optional[Mapping[str, str]] = None) -> Scenario:
    return scenario_from_dict(read_json(path), overrides)


def save_plan(plan: ChargingPlan, path: str | Path, run: Optional[Mapping[str, Any]] = None) -> None:
    data = plan_to_dict(plan)
    if run is not None:
        data["run"] = dict(run)
    write_json(path, data)


def load_plan(path: str | Path, scenario: Scenario) -> ChargingPlan:
    return plan_from_dict(read_json(path), scenario)


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(dumps(params_to_dict(cfg)).encode()).hexdigest()[:16]
