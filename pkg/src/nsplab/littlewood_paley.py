"""Dyadic partition of unity, frequency blocks, Besov and space-time norms.

The radial profile chi is the standard smooth exponential step: chi = 1 for
r <= 3/4, chi = 0 for r >= 4/3, monotone in between, and phi(r) =
chi(r/2) - chi(r) so the telescoping identity sum_j phi(2^-j r) = 1 holds for
every r > 0 by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .spectral import Grid, SpectralField, grid_radius, lp_norm, require_mean_zero

__all__ = [
    "chi",
    "phi",
    "DyadicPartition",
    "build_partition",
    "BesovSpec",
    "dyadic_block",
    "low_cutoff",
    "besov_norm",
    "besov_norm_multi",
    "chemin_lerner_norm",
    "block_lp_table",
]

_R_LO = 0.75
_R_HI = 4.0 / 3.0


def _bump(x: np.ndarray) -> np.ndarray:
    """exp(-1/x) extended by 0 for x <= 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, strictly monotone between."""
    a = _bump(x)
    b = _bump(1.0 - x)
    return a / (a + b + np.finfo(float).tiny)


def chi(r) -> np.ndarray:
    """Radial low-pass profile: 1 on r <= 3/4, 0 on r >= 4/3, nonincreasing."""
    r = np.asarray(r, dtype=np.float64)
    return _smooth_step((_R_HI - r) / (_R_HI - _R_LO))


def phi(r) -> np.ndarray:
    """Band profile chi(r/2) - chi(r); support inside [3/4, 8/3]."""
    r = np.asarray(r, dtype=np.float64)
    return chi(r / 2.0) - chi(r)


class DyadicPartition:
    """Precomputed block weights phi(2^-j |xi|) and cutoffs on one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        r = grid_radius(grid)
        nz = r[r > 0]
        r_min = float(nz.min())
        r_max = float(nz.max())
        self.j_min = int(np.floor(np.log2(r_min))) - 2
        self.j_max = int(np.ceil(np.log2(r_max))) + 2
        self._weights = {}
        for j in range(self.j_min, self.j_max + 1):
            w = phi(r * 2.0 ** (-j))
            if np.any(w != 0.0):
                self._weights[j] = w
        self._radius = r

    @property
    def js(self) -> list:
        """Block indices with nonzero weight somewhere on the lattice."""
        return sorted(self._weights)

    def weight(self, j: int) -> np.ndarray:
        if j in self._weights:
            return self._weights[j]
        return np.zeros(self.grid.shape)

    def partition_error(self) -> float:
        """Max |sum_j phi_j - 1| over nonzero lattice radii."""
        total = np.zeros(self.grid.shape)
        for w in self._weights.values():
            total = total + w
        r = self._radius
        return float(np.max(np.abs(total[r > 0] - 1.0)))

    def block(self, field: SpectralField, j: int) -> SpectralField:
        return SpectralField(self.grid, field.coeffs * self.weight(j), mean_zero=True)

    def lowcut(self, field: SpectralField, j: int) -> SpectralField:
        w = chi(self._radius * 2.0 ** (-j))
        coeffs = field.coeffs * w
        coeffs.flat[0] = field.coeffs.flat[0]  # chi(0) = 1: the mean passes through
        return SpectralField(self.grid, coeffs, mean_zero=field.mean_zero)

    def block_lp(self, field: SpectralField, j: int, p: float) -> float:
        """L^p norm of one block; p = 2 goes through Parseval (no transform)."""
        w = self.weight(j)
        if p == 2:
            return float(np.sqrt(self.grid.volume * np.sum((w * np.abs(field.coeffs)) ** 2)))
        return lp_norm(self.block(field, j), p)


@lru_cache(maxsize=16)
def _partition_cached(d: int, n: int, L: float) -> DyadicPartition:
    return DyadicPartition(Grid(d, n, L))


def build_partition(grid: Grid) -> DyadicPartition:
    return _partition_cached(grid.d, grid.n, grid.L)


def dyadic_block(field: SpectralField, j: int, kind: str = "block") -> SpectralField:
    """Apply one dyadic multiplier: band-pass phi (kind='block') or low-pass
    chi (kind='lowcut') at scale 2^j."""
    part = build_partition(field.grid)
    if kind == "block":
        return part.block(field, j)
    if kind == "lowcut":
        return part.lowcut(field, j)
    raise DomainError(f"unknown dyadic multiplier kind {kind!r}")


def low_cutoff(field: SpectralField, j: int) -> SpectralField:
    return dyadic_block(field, j, kind="lowcut")


@dataclass(frozen=True)
class BesovSpec:
    """Besov norm parameters: regularity s, L^p index, summation index r,
    and the frequency restriction relative to the cutoff j0.

    restriction='low' sums blocks j <= j0; 'high' sums j >= j0 - 1 (one block
    of overlap); 'all' sums every block the grid carries.
    """

    s: float
    p: float
    r: float = 1.0
    restriction: str = "all"
    j0: int = 0

    def __post_init__(self):
        if self.r not in (1.0, 2.0, np.inf) and self.r not in (1, 2):
            raise DomainError(f"summation exponent r must be 1, 2 or inf, got {self.r}")
        if self.restriction not in ("all", "low", "high"):
            raise DomainError(f"unknown restriction {self.restriction!r}")
        if not (self.p >= 1):
            raise DomainError(f"Lebesgue exponent must satisfy p >= 1, got {self.p}")

    def selects(self, j: int) -> bool:
        if self.restriction == "low":
            return j <= self.j0
        if self.restriction == "high":
            return j >= self.j0 - 1
        return True


def _lr_sum(terms: np.ndarray, r: float) -> float:
    if len(terms) == 0:
        return 0.0
    if np.isinf(r):
        return float(np.max(terms))
    if r == 2:
        return float(np.sqrt(np.sum(terms ** 2)))
    return float(np.sum(terms))


def besov_norm(field: SpectralField, spec: BesovSpec) -> float:
    """Homogeneous Besov norm: l^r over j of 2^{js} ||block_j f||_{L^p}."""
    require_mean_zero(field, "besov_norm")
    part = build_partition(field.grid)
    terms = np.array([
        2.0 ** (j * spec.s) * part.block_lp(field, j, spec.p)
        for j in part.js if spec.selects(j)
    ])
    return _lr_sum(terms, spec.r)


def besov_norm_multi(fields: list, spec: BesovSpec) -> float:
    """Besov norm of a tuple of fields (sum of component norms)."""
    return float(sum(besov_norm(f, spec) for f in fields))


def block_lp_table(times, fields_per_time, p: float, partition: DyadicPartition):
    """Per-block L^p norms of a time series of field tuples.

    ``fields_per_time`` is a sequence (one entry per time) of lists of
    SpectralField. Returns {j: array over times} where each value is the sum
    of component block norms at that time.
    """
    times = np.asarray(times, dtype=np.float64)
    if len(times) != len(fields_per_time):
        raise DomainError("times and fields have different lengths")
    table = {j: np.zeros(len(times)) for j in partition.js}
    for it, fields in enumerate(fields_per_time):
        for f in fields:
            for j in partition.js:
                table[j][it] += partition.block_lp(f, j, p)
    return table


def chemin_lerner_norm(times, fields_per_time, theta: float, spec: BesovSpec) -> float:
    """Space-time norm with the time norm taken inside the block sum:
    l^r over j of 2^{js} || ||block_j f(t)||_{L^p} ||_{L^theta_t}.

    theta = inf takes the sup over samples; theta = 1 integrates the sample
    values with the trapezoid rule on the stored times.
    """
    if len(fields_per_time) == 0:
        raise DomainError("chemin_lerner_norm needs a nonempty time series")
    if theta not in (1, 1.0, np.inf):
        raise DomainError(f"time exponent theta must be 1 or inf, got {theta}")
    times = np.asarray(times, dtype=np.float64)
    if np.any(np.diff(times) <= 0):
        raise DomainError("time series must be strictly increasing")
    fields_seq = [[e] if isinstance(e, SpectralField) else list(e) for e in fields_per_time]
    grid = fields_seq[0][0].grid
    part = build_partition(grid)
    table = block_lp_table(times, fields_seq, spec.p, part)
    terms = []
    for j in part.js:
        if not spec.selects(j):
            continue
        series = table[j]
        if np.isinf(theta):
            tnorm = float(np.max(series))
        else:
            tnorm = float(np.trapezoid(series, times)) if len(times) > 1 else 0.0
        terms.append(2.0 ** (j * spec.s) * tnorm)
    return _lr_sum(np.array(terms), spec.r)
