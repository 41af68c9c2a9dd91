"""Comparison tables: absolute metrics per approach plus percentages of the
reference plan's values."""

from __future__ import annotations

import csv
import io as _io
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .utility import METRICS, UtilityBreakdown

REFERENCE = "reference"


def percent(value: float, ref: float) -> Optional[float]:
    """``100 * value / ref``; 100 when both are zero, undefined (None) when only the reference is."""
    if ref == 0:
        return 100.0 if value == 0 else None
    return 100.0 * (value / ref)


@dataclass
class MetricsReport:
    breakdowns: dict[str, UtilityBreakdown]
    metadata: dict[str, dict[str, Any]] = field(default_factory=dict)
    series: dict[str, list[dict[str, float]]] = field(default_factory=dict)  # per-slot breakdowns

    def __post_init__(self):
        if REFERENCE not in self.breakdowns:
            raise ValueError(f"a report needs a {REFERENCE!r} entry")

    def percentages(self, name: str) -> dict[str, Optional[float]]:
        ref = self.breakdowns[REFERENCE]
        b = self.breakdowns[name]
        return {m: percent(getattr(b, m), getattr(ref, m)) for m in METRICS}

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for name in self._order():
            out[name] = {
                "absolute": self.breakdowns[name].as_dict(),
                "percent_of_reference": self.percentages(name),
                "metadata": self.metadata.get(name, {}),
            }
            if name in self.series:
                out[name]["per_slot"] = self.series[name]
        return {"approaches": out}

    def _order(self) -> list[str]:
        return [REFERENCE] + sorted(n for n in self.breakdowns if n != REFERENCE)

    def table(self) -> str:
        """Fixed-width text table, one row per approach."""
        head = ["approach", "utility"] + [f"{m} %" for m in METRICS]
        rows = [head]
        for name in self._order():
            pct = self.percentages(name)
            cells = [name, f"{self.breakdowns[name].utility:.4f}"]
            cells += ["n/a" if pct[m] is None else f"{pct[m]:.1f}" for m in METRICS]
            rows.append(cells)
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows) + "\n"

    def csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["approach", "utility"] + list(METRICS) + [f"{m}_pct" for m in METRICS])
        for name in self._order():
            b = self.breakdowns[name]
            pct = self.percentages(name)
            w.writerow([name, repr(b.utility)] + [repr(getattr(b, m)) for m in METRICS]
                       + ["" if pct[m] is None else repr(pct[m]) for m in METRICS])
        return buf.getvalue()


def breakdown_from_dict(data: Mapping[str, float]) -> UtilityBreakdown:
    return UtilityBreakdown(**{k: float(v) for k, v in data.items()})
