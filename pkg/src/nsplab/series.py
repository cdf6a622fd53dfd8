"""Time-stamped records of named norms, with CSV round-tripping.

The CSV schema is the wire format between the solver/propagator runs and
all downstream analysis and plotting: header ``t,name,value``, decimal
full-precision values, '.' separator, '\n' line ends.
"""

from __future__ import annotations

import io
import math

import numpy as np

from .errors import DomainError

__all__ = ["NormSeries"]


class NormSeries:
    """Ordered (t, name, value) records; times strictly increase per name."""

    def __init__(self, meta: dict = None):
        self.entries = []
        self.meta = dict(meta or {})
        self._last_t = {}

    def add(self, t: float, name: str, value: float):
        t = float(t)
        value = float(value)
        if "," in name or "\n" in name:
            raise DomainError(f"series name {name!r} would break the CSV schema")
        if not math.isfinite(value) or value < 0:
            raise DomainError(f"norm value for {name!r} at t={t} must be finite and >= 0, got {value}")
        prev = self._last_t.get(name)
        if prev is not None and t <= prev:
            raise DomainError(f"times for {name!r} must strictly increase ({t} after {prev})")
        self._last_t[name] = t
        self.entries.append((t, name, value))

    @property
    def names(self) -> list:
        seen = []
        for _, name, _ in self.entries:
            if name not in seen:
                seen.append(name)
        return seen

    def times(self, name: str) -> np.ndarray:
        return np.array([t for t, n, _ in self.entries if n == name])

    def values(self, name: str) -> np.ndarray:
        return np.array([v for t, n, v in self.entries if n == name])

    def __len__(self) -> int:
        return len(self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,name,value\n")
        for t, name, value in self.entries:
            buf.write(f"{t!r},{name},{value!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "NormSeries":
        lines = text.splitlines()
        if not lines or lines[0].strip() != "t,name,value":
            raise DomainError("norm series CSV must start with header 't,name,value'")
        out = cls()
        for ln in lines[1:]:
            if not ln.strip():
                continue
            t_s, name, v_s = ln.split(",")
            out.add(float(t_s), name, float(v_s))
        return out
