"""Time series container shared by diagnostics and exports."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

__all__ = ["Series", "fmt", "write_csv"]


def fmt(value) -> str:
    """Format a number with 17 significant digits (round-trips float64)."""
    return format(float(value), ".17g")


def write_csv(handle, header, rows) -> None:
    writer = csv.writer(handle, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, int, np.floating, np.integer)) else v for v in row])


@dataclass(frozen=True)
class Series:
    t: np.ndarray
    values: np.ndarray
    name: str = "value"

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError(f"series arrays must be 1-D and aligned, got {t.shape} and {v.shape}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.t.size

    def at(self, t: float) -> float:
        """Value at the last sample time <= t."""
        k = int(np.searchsorted(self.t, t, side="right")) - 1
        if k < 0:
            raise ValueError(f"t={t} precedes the series start {self.t[0]}")
        return float(self.values[k])

    def window(self, t_lo: float, t_hi: float) -> "Series":
        mask = (self.t >= t_lo) & (self.t <= t_hi)
        return Series(self.t[mask], self.values[mask], self.name)

    def to_csv(self, handle=None) -> str | None:
        """Write ``t,value`` CSV; returns the text when no handle is given."""
        buf = handle if handle is not None else io.StringIO()
        write_csv(buf, ["t", "value"], zip(self.t, self.values))
        if handle is None:
            return buf.getvalue()
        return None
