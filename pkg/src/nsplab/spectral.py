"""Periodic-grid Fourier infrastructure.

Scalar fields on a d-dimensional torus are stored as complex Fourier-series
coefficients C[k] with f(x) = sum_k C[k] exp(i xi_k . x), xi_k = (2 pi / L) k.
Real-valued fields satisfy C[-k] = conj(C[k]); all operators here preserve
that symmetry. Operations are pure: fields are never mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, GridMismatchError

__all__ = [
    "Grid",
    "SpectralField",
    "Ball",
    "Annulus",
    "transform_roundtrip",
    "apply_multiplier",
    "grad",
    "div",
    "curl",
    "lambda_op",
    "inv_neg_laplacian",
    "leray_project",
    "leray_complement",
    "lp_norm",
    "lp_norm_multi",
    "random_field",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Periodic torus descriptor: dimension, points per axis, side length."""

    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (2, 3):
            raise DomainError(f"spatial dimension must be 2 or 3, got {self.d}")
        if self.n < 8 or not _is_power_of_two(self.n):
            raise DomainError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not (self.L > 0):
            raise DomainError(f"torus side length must be positive, got {self.L}")

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def volume(self) -> float:
        return self.L ** self.d

    @property
    def cell_volume(self) -> float:
        return (self.L / self.n) ** self.d

    @property
    def fundamental(self) -> float:
        """Smallest nonzero frequency magnitude, 2*pi/L."""
        return 2.0 * np.pi / self.L

    def index_1d(self) -> np.ndarray:
        """Integer lattice indices along one axis in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)

    def freq_components(self) -> list:
        """Frequency arrays, one per axis, broadcastable to ``shape``."""
        k = self.index_1d() * self.fundamental
        comps = []
        for axis in range(self.d):
            sh = [1] * self.d
            sh[axis] = self.n
            comps.append(k.reshape(sh))
        return comps

    def radius(self) -> np.ndarray:
        """|xi| on the full lattice, shape ``shape``."""
        r2 = np.zeros(self.shape)
        for c in self.freq_components():
            r2 = r2 + c * c
        return np.sqrt(r2)

    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: True where every |index| <= n/3 (Nyquist zeroed)."""
        keep = np.abs(self.index_1d()) <= self.n // 3
        mask = np.ones(self.shape, dtype=bool)
        for axis in range(self.d):
            sh = [1] * self.d
            sh[axis] = self.n
            mask &= keep.reshape(sh)
        return mask

    def coords(self) -> list:
        """Physical coordinates, one array per axis, broadcastable."""
        x = np.arange(self.n) * self.dx
        out = []
        for axis in range(self.d):
            sh = [1] * self.d
            sh[axis] = self.n
            out.append(x.reshape(sh))
        return out


@lru_cache(maxsize=32)
def _radius_cached(d: int, n: int, L: float) -> np.ndarray:
    return Grid(d, n, L).radius()


def grid_radius(grid: Grid) -> np.ndarray:
    return _radius_cached(grid.d, grid.n, grid.L)


class SpectralField:
    """One real scalar field stored as Fourier coefficients on a grid."""

    __slots__ = ("grid", "coeffs", "mean_zero")

    def __init__(self, grid: Grid, coeffs: np.ndarray, mean_zero: bool = False):
        if coeffs.shape != grid.shape:
            raise GridMismatchError(
                f"coefficient shape {coeffs.shape} does not match grid shape {grid.shape}"
            )
        self.grid = grid
        self.coeffs = np.asarray(coeffs, dtype=np.complex128)
        self.mean_zero = bool(mean_zero)
        if self.mean_zero:
            self.coeffs.flat[0] = 0.0

    @classmethod
    def from_physical(cls, grid: Grid, samples: np.ndarray, mean_zero: bool = False) -> "SpectralField":
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape != grid.shape:
            raise GridMismatchError(
                f"sample shape {samples.shape} does not match grid shape {grid.shape}"
            )
        coeffs = np.fft.fftn(samples) / samples.size
        return cls(grid, coeffs, mean_zero=mean_zero)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128), mean_zero=True)

    def to_physical(self) -> np.ndarray:
        out = np.fft.ifftn(self.coeffs * self.coeffs.size)
        return np.real(out)

    def physical_imag_residual(self) -> float:
        """Max |Im| of the reconstructed samples; a conjugate-symmetry audit."""
        out = np.fft.ifftn(self.coeffs * self.coeffs.size)
        return float(np.max(np.abs(out.imag)))

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), mean_zero=self.mean_zero)

    @property
    def dc(self) -> complex:
        return complex(self.coeffs.flat[0])

    def l2(self) -> float:
        """L2 norm via Parseval (volume-weighted)."""
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.coeffs) ** 2)))

    def conjugate_symmetry_error(self) -> float:
        flipped = self.coeffs
        for axis in range(self.grid.d):
            flipped = np.flip(np.roll(flipped, -1, axis=axis), axis=axis)
        return float(np.max(np.abs(self.coeffs - np.conj(flipped))))

    def _same_grid(self, other: "SpectralField"):
        if self.grid != other.grid:
            raise GridMismatchError("fields live on different grids")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._same_grid(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs,
                             mean_zero=self.mean_zero and other.mean_zero)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._same_grid(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs,
                             mean_zero=self.mean_zero and other.mean_zero)

    def __mul__(self, c) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs * c, mean_zero=self.mean_zero)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs, mean_zero=self.mean_zero)


def require_mean_zero(field: SpectralField, op: str):
    scale = max(1.0, float(np.max(np.abs(field.coeffs))))
    if not field.mean_zero and abs(field.dc) > 1e-13 * scale:
        raise DomainError(f"{op} requires a mean-zero field (DC = {field.dc})")


def transform_roundtrip(field: SpectralField) -> SpectralField:
    """Inverse then forward transform; exposes FFT roundtrip error for tests."""
    return SpectralField.from_physical(field.grid, field.to_physical(),
                                       mean_zero=field.mean_zero)


def apply_multiplier(field: SpectralField, symbol, at_zero=None) -> SpectralField:
    """Apply a Fourier multiplier symbol(|xi| or xi-components) -> complex.

    ``symbol`` is called with the |xi| lattice array. The value at xi = 0 is
    taken from ``at_zero`` when supplied; otherwise the field must be
    mean-zero if the symbol is singular there.
    """
    r = grid_radius(field.grid)
    out = np.empty(field.grid.shape, dtype=np.complex128)
    nz = r > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(symbol(r), dtype=np.complex128)
    out[nz] = field.coeffs[nz] * vals[nz]
    dc_sym = vals.flat[0]
    if at_zero is not None:
        out.flat[0] = field.coeffs.flat[0] * at_zero
    elif field.mean_zero or field.dc == 0:
        out.flat[0] = 0.0
    elif np.isfinite(dc_sym):
        out.flat[0] = field.coeffs.flat[0] * dc_sym
    else:
        raise DomainError("multiplier symbol is singular at xi = 0 on a non-mean-zero field")
    return SpectralField(field.grid, out, mean_zero=field.mean_zero and at_zero is None)


def grad(field: SpectralField) -> list:
    """Spectral gradient; returns d mean-zero component fields."""
    comps = field.grid.freq_components()
    return [SpectralField(field.grid, 1j * c * field.coeffs, mean_zero=True) for c in comps]


def div(fields: list) -> SpectralField:
    grid = fields[0].grid
    if len(fields) != grid.d:
        raise GridMismatchError(f"divergence expects {grid.d} components, got {len(fields)}")
    comps = grid.freq_components()
    out = np.zeros(grid.shape, dtype=np.complex128)
    for c, f in zip(comps, fields):
        if f.grid != grid:
            raise GridMismatchError("vector components live on different grids")
        out += 1j * c * f.coeffs
    return SpectralField(grid, out, mean_zero=True)


def curl(fields: list):
    """Curl of a vector field: scalar in d=2, 3 components in d=3."""
    grid = fields[0].grid
    comps = grid.freq_components()
    if grid.d == 2:
        out = 1j * comps[0] * fields[1].coeffs - 1j * comps[1] * fields[0].coeffs
        return SpectralField(grid, out, mean_zero=True)
    cx = 1j * comps[1] * fields[2].coeffs - 1j * comps[2] * fields[1].coeffs
    cy = 1j * comps[2] * fields[0].coeffs - 1j * comps[0] * fields[2].coeffs
    cz = 1j * comps[0] * fields[1].coeffs - 1j * comps[1] * fields[0].coeffs
    return [SpectralField(grid, c, mean_zero=True) for c in (cx, cy, cz)]


def lambda_op(field: SpectralField, s: float) -> SpectralField:
    """|xi|^s multiplier. Negative orders require a mean-zero field."""
    if s < 0:
        require_mean_zero(field, f"lambda({s})")
    r = grid_radius(field.grid)
    out = np.zeros(field.grid.shape, dtype=np.complex128)
    nz = r > 0
    out[nz] = field.coeffs[nz] * r[nz] ** s
    if s == 0:
        out.flat[0] = field.coeffs.flat[0]
    return SpectralField(field.grid, out, mean_zero=True if s != 0 else field.mean_zero)


def inv_neg_laplacian(field: SpectralField) -> SpectralField:
    """(-Delta)^{-1} with the zero mode sent to zero; needs mean-zero input."""
    require_mean_zero(field, "inv_neg_laplacian")
    return lambda_op(field, -2.0)


def _potential_coeffs(fields: list):
    grid = fields[0].grid
    comps = grid.freq_components()
    r = grid_radius(grid)
    r2 = r * r
    dot = np.zeros(grid.shape, dtype=np.complex128)
    for c, f in zip(comps, fields):
        dot += c * f.coeffs
    with np.errstate(divide="ignore", invalid="ignore"):
        scal = np.where(r2 > 0, dot / np.where(r2 > 0, r2, 1.0), 0.0)
    return [scal * c for c in comps]


def leray_complement(fields: list) -> list:
    """Q u: the curl-free (potential) part of a vector field."""
    grid = fields[0].grid
    return [SpectralField(grid, q, mean_zero=True) for q in _potential_coeffs(fields)]


def leray_project(fields: list) -> list:
    """P u: the divergence-free part; P + Q = Id away from the zero mode.

    The zero mode (spatial mean) is assigned to P so that P + Q = Id holds
    on the full lattice.
    """
    grid = fields[0].grid
    qs = _potential_coeffs(fields)
    out = []
    for f, q in zip(fields, qs):
        coeffs = f.coeffs - q
        out.append(SpectralField(grid, coeffs, mean_zero=f.mean_zero))
    return out


def lp_norm(field: SpectralField, p: float) -> float:
    """Rectangle-rule L^p norm over physical samples; p = inf gives max |f|."""
    if not (p >= 1):
        raise DomainError(f"L^p exponent must satisfy p >= 1, got {p}")
    f = field.to_physical()
    if np.isinf(p):
        return float(np.max(np.abs(f)))
    if p == 2:
        return float(np.sqrt(np.sum(f * f) * field.grid.cell_volume))
    return float((np.sum(np.abs(f) ** p) * field.grid.cell_volume) ** (1.0 / p))


def lp_norm_multi(fields: list, p: float) -> float:
    """Norm of a tuple of fields: the sum of component norms."""
    return float(sum(lp_norm(f, p) for f in fields))


@dataclass(frozen=True)
class Ball:
    """Frequency ball |xi| <= (4/3) * 2^j, matching the low-pass support."""

    j: int

    @property
    def r_max(self) -> float:
        return (4.0 / 3.0) * 2.0 ** self.j

    def contains(self, r: np.ndarray) -> np.ndarray:
        return (r > 0) & (r <= self.r_max)


@dataclass(frozen=True)
class Annulus:
    """Frequency annulus (3/4) * 2^j <= |xi| <= (8/3) * 2^j (band-pass support)."""

    j: int

    @property
    def r_min(self) -> float:
        return 0.75 * 2.0 ** self.j

    @property
    def r_max(self) -> float:
        return (8.0 / 3.0) * 2.0 ** self.j

    def contains(self, r: np.ndarray) -> np.ndarray:
        return (r >= self.r_min) & (r <= self.r_max)


def _conjugate_index(k: tuple, n: int) -> tuple:
    return tuple((-ki) % n for ki in k)


def random_field(grid: Grid, support, seed: int) -> SpectralField:
    """Deterministic real-valued mean-zero field with i.i.d. complex Gaussian
    spectrum on the given frequency support.

    Coefficients are drawn in a canonical order keyed to integer lattice
    vectors, so the same (support, seed) yields the same function on any grid
    resolving it; refinement scans then compare identical fields.
    """
    r = grid_radius(grid)
    idx = grid.index_1d()
    mask = support.contains(r)
    mask.flat[0] = False
    # exclude Nyquist planes: they have no conjugate partner
    for axis in range(grid.d):
        sh = [1] * grid.d
        sh[axis] = grid.n
        mask &= (np.abs(idx) != grid.n // 2).reshape(sh)
    if not mask.any():
        raise DomainError("random_field support contains no lattice frequencies")

    flat = np.flatnonzero(mask)
    tuples = np.array(np.unravel_index(flat, grid.shape)).T
    int_vecs = [tuple(int(idx[i]) for i in row) for row in tuples]
    # canonical representative of each +/- pair: lexicographically positive
    reps = []
    for pos, k in zip(flat, int_vecs):
        lead = next((c for c in k if c != 0), 0)
        if lead > 0:
            reps.append((k, pos))
    reps.sort(key=lambda item: item[0])

    rng = np.random.default_rng(seed)
    z = rng.standard_normal(2 * len(reps))
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    for (k, pos), re, im in zip(reps, z[0::2], z[1::2]):
        val = (re + 1j * im) / np.sqrt(2.0)
        coeffs.flat[pos] = val
        cpos = np.ravel_multi_index(_conjugate_index(np.unravel_index(pos, grid.shape), grid.n),
                                    grid.shape)
        coeffs.flat[cpos] = np.conj(val)
    return SpectralField(grid, coeffs, mean_zero=True)
