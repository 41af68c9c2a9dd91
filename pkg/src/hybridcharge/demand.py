"""Per-node charging demand: storage, inverse-distance allocation and forecasting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .network import RoadNetwork

FORECASTER_KINDS = ("historical-average", "seasonal-naive", "exponential-smoothing", "oracle", "persistence")


@dataclass(frozen=True)
class DemandMatrix:
    """Demand rate in EV/h, one row per slot and one column per network node
    (in the network's node order)."""

    values: np.ndarray
    slot_minutes: float = 60.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ValueError(f"demand must be a slots x nodes matrix, got shape {v.shape}")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ValueError("demand entries must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_slots(self) -> int:
        return self.values.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.values.shape[1]

    def window(self, start: int, length: int) -> np.ndarray:
        if start < 0 or start + length > self.n_slots:
            raise IndexError(f"slots {start}..{start + length - 1} outside 0..{self.n_slots - 1}")
        return self.values[start:start + length]


def idw_weights(distances: np.ndarray, power: float = 1.0, eps_km: float = 0.1) -> np.ndarray:
    """Normalized inverse-distance weights; infinite distances get weight 0."""
    d = np.asarray(distances, dtype=float)
    w = np.zeros_like(d)
    finite = np.isfinite(d)
    w[finite] = 1.0 / np.maximum(d[finite], eps_km) ** power
    total = w.sum()
    if total == 0:
        raise ValueError("no node can reach the station")
    return w / total


def allocate_demand(station_series: Mapping[int, Sequence[float]], net: RoadNetwork,
                    power: float = 1.0, eps_km: float = 0.1, slot_minutes: float = 60.0) -> DemandMatrix:
    """Spread each station's per-slot demand over the nodes that can reach it."""
    if len(net) == 0:
        raise ValueError("cannot allocate demand on an empty network")
    series = {node: np.asarray(s, dtype=float) for node, s in station_series.items()}
    if not series:
        raise ValueError("no station series given")
    lengths = {len(s) for s in series.values()}
    if len(lengths) != 1:
        raise ValueError("station series must share one length")
    (n_slots,) = lengths
    dist = net.matrix()
    out = np.zeros((n_slots, len(net)))
    for node in sorted(series):
        s = series[node]
        if np.any(s < 0):
            raise ValueError(f"negative demand in series of station {node}")
        w = idw_weights(dist[:, net.index(node)], power, eps_km)
        out += np.outer(s, w)
    return DemandMatrix(out, slot_minutes)


@dataclass(frozen=True)
class Forecaster:
    """Baseline multi-step demand forecaster.

    ``history`` windows end at slot ``t`` inclusive; the forecast covers
    ``t+1 .. t+steps``. ``factors`` is accepted for interface parity with
    learned models and ignored by every baseline kind.
    """

    kind: str = "oracle"
    omega_hist: int = 3
    omega_pred: int = 3
    season: int = 24
    smoothing: float = 0.5

    def __post_init__(self):
        if self.kind not in FORECASTER_KINDS:
            raise ValueError(f"unknown forecaster kind {self.kind!r}")
        if self.omega_hist < 1 or self.omega_pred < 1 or self.season < 1:
            raise ValueError("omega_hist, omega_pred and season must be >= 1")
        if not 0 < self.smoothing <= 1:
            raise ValueError("smoothing must lie in (0, 1]")


class InsufficientHistory(ValueError):
    pass


def forecast(f: Forecaster, history: DemandMatrix | np.ndarray, t: int, *,
             truth: Optional[DemandMatrix | np.ndarray] = None, steps: Optional[int] = None,
             factors: Optional[np.ndarray] = None) -> np.ndarray:
    h = history.values if isinstance(history, DemandMatrix) else np.asarray(history, dtype=float)
    steps = f.omega_pred if steps is None else steps
    n_nodes = h.shape[1]
    if f.kind == "oracle":
        src = h if truth is None else (truth.values if isinstance(truth, DemandMatrix) else np.asarray(truth))
        if t + 1 + steps > src.shape[0]:
            raise InsufficientHistory(f"oracle needs slots up to {t + steps}, only {src.shape[0]} known")
        return np.array(src[t + 1:t + 1 + steps], dtype=float)
    if t >= h.shape[0]:
        raise InsufficientHistory(f"history ends at slot {h.shape[0] - 1}, asked for t={t}")
    if f.kind == "persistence":
        if t < 0:
            raise InsufficientHistory("persistence needs at least one observed slot")
        return np.tile(h[t], (steps, 1))
    if f.kind == "seasonal-naive":
        if t + 1 < f.season:
            raise InsufficientHistory(f"seasonal-naive needs {f.season} slots of history, got {t + 1}")
        out = np.empty((steps, n_nodes))
        for k in range(1, steps + 1):
            back = -(-k // f.season) * f.season  # smallest multiple of the season >= k
            out[k - 1] = h[t + k - back]
        return out
    if t + 1 < f.omega_hist:
        raise InsufficientHistory(f"{f.kind} needs {f.omega_hist} slots of history, got {t + 1}")
    recent = h[t - f.omega_hist + 1:t + 1]
    if f.kind == "historical-average":
        level = recent.mean(axis=0)
    else:
        level = recent[0].copy()
        for row in recent[1:]:
            level = f.smoothing * row + (1 - f.smoothing) * level
    return np.tile(np.maximum(level, 0.0), (steps, 1))
