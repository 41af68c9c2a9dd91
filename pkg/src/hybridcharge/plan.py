"""Charging-plan data model, budget accounting and the configuration lookup table."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class ChargerType:
    power_kw: float
    fee: float

    def __post_init__(self):
        if not self.power_kw > 0:
            raise ValueError(f"charger power must be > 0, got {self.power_kw}")
        if self.fee < 0:
            raise ValueError(f"charger fee must be >= 0, got {self.fee}")


DEFAULT_CHARGER_TYPES = (
    ChargerType(7.0, 2700.0),
    ChargerType(22.0, 6750.0),
    ChargerType(50.0, 252000.0),
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Model constants. Times are given in minutes, rates per hour."""

    alpha: float = 0.4
    lambda_b: float = 0.4
    lambda_c: float = 0.4
    lambda_q: float = 0.2
    max_chargers: int = 25  # K
    budget: float = 5.4e7
    ev_battery_kwh: float = 35.0  # B
    r_max_km: float = 2.5
    slot_minutes: float = 60.0  # H
    horizon_slots: int = 3  # |T|
    w_max_minutes: float = 30.0
    n_mcs: int = 30
    mc_fleet_size: int = 10  # k_MC
    mc_power_kw: float = 42.0
    mc_battery_kwh: float = 105.0
    mc_fee: float = 59400.0
    speed_kmh: float = 30.0
    capacity_offset_kw: float = 275.0  # C_0
    capacity_scale_kw: float = 100.0  # s_0
    eps_km: float = 0.1
    depot_power_kw: float = 420.0  # C'
    charger_types: tuple[ChargerType, ...] = DEFAULT_CHARGER_TYPES
    cost_norm: Optional[float] = None
    loss_norm: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        for name in ("lambda_b", "lambda_c", "lambda_q", "budget"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("ev_battery_kwh", "r_max_km", "slot_minutes", "w_max_minutes", "mc_power_kw",
                     "mc_battery_kwh", "speed_kmh", "capacity_scale_kw", "eps_km", "depot_power_kw"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_chargers < 0 or self.horizon_slots < 1 or self.n_mcs < 0 or self.mc_fleet_size < 1:
            raise ValueError("invalid integer parameter in ScenarioConfig")
        if not self.charger_types:
            raise ValueError("at least one charger type is required")
        object.__setattr__(self, "charger_types", tuple(self.charger_types))

    @property
    def n_types(self) -> int:
        return len(self.charger_types)

    @property
    def slot_hours(self) -> float:
        return self.slot_minutes / 60.0

    @property
    def w_max_hours(self) -> float:
        return self.w_max_minutes / 60.0

    @property
    def fleet_power_kw(self) -> float:
        return self.mc_fleet_size * self.mc_power_kw

    @property
    def fleet_battery_kwh(self) -> float:
        return self.mc_fleet_size * self.mc_battery_kwh

    @property
    def idle_energy_kwh(self) -> float:
        """Energy a fleet needs to serve one full slot."""
        return self.fleet_power_kw * self.slot_hours

    def powers(self) -> np.ndarray:
        return np.array([c.power_kw for c in self.charger_types])

    def fees(self) -> np.ndarray:
        return np.array([c.fee for c in self.charger_types])


@dataclass(frozen=True)
class Station:
    node: int
    chargers: tuple[int, ...]
    temporary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "chargers", tuple(int(c) for c in self.chargers))
        if any(c < 0 for c in self.chargers):
            raise ValueError(f"negative charger count at node {self.node}")
        if self.temporary and sum(self.chargers):
            raise ValueError("temporary stations carry no fixed chargers")

    @property
    def total(self) -> int:
        return sum(self.chargers)


@dataclass(frozen=True)
class Depot:
    node: int
    power_kw: float = 420.0

    def __post_init__(self):
        if not self.power_kw > 0:
            raise ValueError("depot recharge power must be > 0")


@dataclass(frozen=True)
class MobileCharger:
    """One batch of ``k_MC`` mobile chargers moving together.

    ``assignment`` holds the target node per slot (``None`` when unassigned).
    The trajectory fields are derived by :func:`hybridcharge.mcs.rollout` and
    should not be edited by hand: ``location`` is where the fleet sits during
    each slot, ``tau`` the minute (from window start) it becomes available
    there, ``energy`` the aggregate kWh at slot start and ``delta`` the usable
    fraction of the slot.
    """

    id: int
    depot: int
    start_location: int
    start_energy: float
    start_ready: float = 0.0
    hired: bool = False  # already paid for before this window (operation loop)
    assignment: tuple[Optional[int], ...] = ()
    location: tuple[int, ...] = ()
    tau: tuple[float, ...] = ()
    energy: tuple[float, ...] = ()
    delta: tuple[float, ...] = ()
    recalls: tuple[Optional[int], ...] = ()  # depot node when recalled at slot start
    travel_km: tuple[float, ...] = ()
    recharged: float = 0.0
    delivered: float = 0.0
    final_location: Optional[int] = None
    final_energy: Optional[float] = None
    final_ready: float = 0.0

    @property
    def employed(self) -> bool:
        return self.hired or any(a is not None for a in self.assignment)

    def target(self, t: int) -> Optional[int]:
        return self.assignment[t] if t < len(self.assignment) else None

    def __hash__(self) -> int:
        # plans are dictionary keys in the search caches; hash once
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.id, self.start_location, self.start_energy, self.start_ready, self.hired,
                      self.assignment))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class ChargingPlan:
    stations: tuple[Station, ...] = ()
    mcs: tuple[MobileCharger, ...] = ()
    depots: tuple[Depot, ...] = ()

    def __post_init__(self):
        stations = tuple(sorted(self.stations, key=lambda s: s.node))
        nodes = [s.node for s in stations]
        if len(set(nodes)) != len(nodes):
            raise ValueError("at most one station per node")
        object.__setattr__(self, "stations", stations)
        object.__setattr__(self, "mcs", tuple(sorted(self.mcs, key=lambda m: m.id)))
        object.__setattr__(self, "depots", tuple(self.depots))

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.stations, self.mcs, self.depots))
            object.__setattr__(self, "_hash", h)
        return h

    def station_at(self, node: int) -> Optional[Station]:
        for s in self.stations:
            if s.node == node:
                return s
        return None

    @property
    def permanent(self) -> tuple[Station, ...]:
        return tuple(s for s in self.stations if not s.temporary)

    def with_station(self, station: Station) -> "ChargingPlan":
        others = tuple(s for s in self.stations if s.node != station.node)
        return replace(self, stations=others + (station,))

    def without_station(self, node: int) -> "ChargingPlan":
        return replace(self, stations=tuple(s for s in self.stations if s.node != node))

    def with_mc(self, mc: MobileCharger) -> "ChargingPlan":
        return replace(self, mcs=tuple(m for m in self.mcs if m.id != mc.id) + (mc,))


def budget_used(plan: ChargingPlan, cfg: ScenarioConfig) -> float:
    fees = [c.fee for c in cfg.charger_types]
    total = 0.0
    for s in plan.stations:
        total += sum(x * f for x, f in zip(s.chargers, fees))
    total += sum(cfg.mc_fee for m in plan.mcs if m.employed)
    return total


class InfeasibleTarget(ValueError):
    pass


@dataclass(frozen=True)
class ConfigTable:
    """Every charger-count vector with at most ``K`` chargers, ordered so that
    the first row meeting a capacity target is the preferred one."""

    configs: np.ndarray  # (rows, n) int
    capacity: np.ndarray
    fee: np.ndarray

    def cheapest(self, target_kw: float) -> tuple[int, ...]:
        ok = np.flatnonzero(self.capacity >= target_kw - 1e-9)
        if ok.size == 0:
            raise InfeasibleTarget(f"capacity {target_kw:.3f} kW exceeds the largest configuration "
                                   f"({self.capacity.max(initial=0.0):.3f} kW)")
        return tuple(int(v) for v in self.configs[ok[0]])

    @property
    def max_capacity(self) -> float:
        return float(self.capacity.max(initial=0.0))


@functools.lru_cache(maxsize=32)
def _table(types: tuple[ChargerType, ...], k: int) -> ConfigTable:
    n = len(types)
    rows = [x for x in itertools.product(range(k + 1), repeat=n) if sum(x) <= k]
    configs = np.array(rows, dtype=int).reshape(-1, n)
    powers = np.array([t.power_kw for t in types])
    fees = np.array([t.fee for t in types])
    cap = configs @ powers
    fee = configs @ fees
    # fee, then chargers used, then lexicographic x (np.lexsort: last key is primary)
    keys = [configs[:, j] for j in reversed(range(n))] + [configs.sum(axis=1), fee]
    order = np.lexsort(keys)
    return ConfigTable(configs[order], cap[order], fee[order])


def config_table(cfg: ScenarioConfig) -> ConfigTable:
    return _table(cfg.charger_types, cfg.max_chargers)


def cheapest_config(target_kw: float, cfg: ScenarioConfig) -> tuple[int, ...]:
    if target_kw < 0:
        raise ValueError("capacity target must be >= 0")
    return config_table(cfg).cheapest(target_kw)


def empty_plan(depots: Sequence[Depot], cfg: ScenarioConfig, horizon: Optional[int] = None) -> ChargingPlan:
    """Plan with no stations and every fleet parked, fully charged, at a depot."""
    horizon = cfg.horizon_slots if horizon is None else horizon
    mcs = []
    if depots:
        for i in range(cfg.n_mcs):
            home = depots[i % len(depots)].node
            mcs.append(MobileCharger(id=i, depot=home, start_location=home,
                                     start_energy=cfg.fleet_battery_kwh,
                                     assignment=(None,) * horizon,
                                     location=(home,) * horizon, tau=(0.0,) * horizon,
                                     energy=(cfg.fleet_battery_kwh,) * horizon, delta=(0.0,) * horizon,
                                     recalls=(None,) * horizon, travel_km=(0.0,) * horizon,
                                     final_location=home, final_energy=cfg.fleet_battery_kwh))
    return ChargingPlan(stations=(), mcs=tuple(mcs), depots=tuple(depots))


def sizing_config(peak_rate: float, cfg: ScenarioConfig) -> tuple[int, ...]:
    """Cheapest configuration whose service rate covers ``peak_rate`` EV/h.

    The target is floored at one of the smallest chargers (a new station with
    no chargers would serve nobody) and capped at the largest configuration.
    """
    table = config_table(cfg)
    target = max(cfg.ev_battery_kwh * peak_rate, float(cfg.powers().min()))
    return table.cheapest(min(target, table.max_capacity))
