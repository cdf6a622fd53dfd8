"""Time-weighted functionals, decay-slope fits, and rate comparisons.

The parameter bundle ties together the framework exponents: Lebesgue index p
(2 <= p <= min(4, 2d/(d-2)), p != 4 if d = 2), the low-frequency regularity
s1 in (1 - d/2, s0] with s0 = 2d/p - d/2, the small epsilon, and the derived
high-frequency weight exponent alpha = s1 + d/2 + 1/2 - epsilon. Japanese
bracket <t> = sqrt(1 + t^2) throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from .errors import DomainError
from .littlewood_paley import BesovSpec, besov_norm_multi, build_partition
from .series import NormSeries
from .solver import FluidState, Tracker
from .spectral import grad, lambda_op

__all__ = [
    "DecayParams",
    "bracket",
    "weighted_norm_series",
    "DecayBundle",
    "bundle_from_states",
    "bundle_from_series",
    "block_table_trackers",
    "standard_trackers",
    "functional_D",
    "functional_E",
    "fit_decay_slope",
    "predicted_density_lp_exponent",
    "predicted_velocity_lp_exponent",
    "predicted_density_lr_exponent",
    "predicted_velocity_lr_exponent",
    "rate_report",
]


def bracket(t) -> np.ndarray:
    """Japanese bracket sqrt(1 + t^2)."""
    t = np.asarray(t, dtype=np.float64)
    return np.sqrt(1.0 + t * t)


def p_upper_bound(d: int) -> float:
    return 4.0 if d == 2 else min(4.0, 2.0 * d / (d - 2.0))


@dataclass(frozen=True)
class DecayParams:
    """Exponent bundle governing norms and rate predictions."""

    d: int
    p: float = 2.0
    s1: float = None
    epsilon: float = 0.01
    j0: int = 0
    s_samples: tuple = None

    def __post_init__(self):
        if self.d not in (2, 3):
            raise DomainError(f"dimension must be 2 or 3, got {self.d}")
        hi = p_upper_bound(self.d)
        if not (2.0 <= self.p <= hi) or (self.d == 2 and self.p == 4.0):
            raise DomainError(
                f"p = {self.p} rejected: need 2 <= p <= min(4, 2d/(d-2)), "
                f"and p != 4 if d = 2")
        if self.s1 is None:
            object.__setattr__(self, "s1", self.s0)
        if not (1.0 - self.d / 2.0 < self.s1 <= self.s0 + 1e-12):
            raise DomainError(
                f"s1 = {self.s1} rejected: need 1 - d/2 < s1 <= s0 = {self.s0} "
                f"(strict on the left)")
        if not (0.0 < self.epsilon <= 0.1):
            raise DomainError(f"epsilon must lie in (0, 0.1], got {self.epsilon}")
        lo = self.epsilon - self.s1
        hi_s = self.d / 2.0 + 1.0
        if self.s_samples is None:
            cands = [lo, 0.0, self.d / 2.0 - 1.0, self.d / 2.0, hi_s]
            samples = sorted({s for s in cands if lo - 1e-12 <= s <= hi_s + 1e-12})
            object.__setattr__(self, "s_samples", tuple(samples))
        else:
            bad = [s for s in self.s_samples if not (lo - 1e-12 <= s <= hi_s + 1e-12)]
            if bad:
                raise DomainError(
                    f"s_samples {bad} outside the admissible range "
                    f"[epsilon - s1, d/2 + 1] = [{lo}, {hi_s}]")

    @property
    def s0(self) -> float:
        return 2.0 * self.d / self.p - self.d / 2.0

    @property
    def alpha(self) -> float:
        return self.s1 + self.d / 2.0 + 0.5 - self.epsilon

    @property
    def s_range(self) -> tuple:
        return (self.epsilon - self.s1, self.d / 2.0 + 1.0)

    def low_spec(self, s: float) -> BesovSpec:
        return BesovSpec(s=s, p=2.0, r=1, restriction="low", j0=self.j0)

    def high_spec(self, s: float, p: float = None) -> BesovSpec:
        return BesovSpec(s=s, p=self.p if p is None else p, r=1,
                         restriction="high", j0=self.j0)


# field groups entering the functionals
_GROUPS = ("a", "u", "a_tilde", "grad_a", "grad_u")


def _fluctuation(f):
    """Mean-projected copy: homogeneous norms ignore the torus mean mode,
    which the velocity picks up at rounding-to-quadratic level."""
    c = f.coeffs.copy()
    c.flat[0] = 0.0
    from .spectral import SpectralField

    return SpectralField(f.grid, c, mean_zero=True)


def _group_fields(state: FluidState, group: str) -> list:
    if group == "a":
        return [state.a]
    if group == "u":
        return [_fluctuation(c) for c in state.u]
    if group == "a_tilde":
        return [lambda_op(state.a, -1.0)]
    if group == "grad_a":
        return grad(state.a)
    if group == "grad_u":
        out = []
        for comp in state.u:
            out.extend(grad(comp))
        return out
    raise DomainError(f"unknown field group {group!r}")


@dataclass
class DecayBundle:
    """Per-block L^p norm tables over a common time grid, one per
    (field group, Lebesgue exponent) pair: tables[(group, p)][j] -> array."""

    times: np.ndarray
    tables: dict
    params: DecayParams

    def norm(self, group: str, p: float, spec: BesovSpec) -> np.ndarray:
        table = self.tables[(group, p)]
        out = np.zeros(len(self.times))
        for j, vals in table.items():
            if spec.selects(j):
                out += 2.0 ** (j * spec.s) * vals
        return out

    def pair_norm(self, groups, p: float, spec: BesovSpec) -> np.ndarray:
        return sum(self.norm(g, p, spec) for g in groups)


def _needed_pairs(params: DecayParams) -> list:
    pairs = {("a", 2.0), ("u", 2.0), ("a_tilde", 2.0), ("grad_u", 2.0),
             ("a", params.p), ("u", params.p), ("grad_a", params.p),
             ("grad_u", params.p)}
    return sorted(pairs)


def bundle_from_states(times, states, params: DecayParams) -> DecayBundle:
    """Build the block tables by direct evaluation on a state sequence."""
    times = np.asarray(times, dtype=np.float64)
    if len(times) != len(states):
        raise DomainError("times and states differ in length")
    part = build_partition(states[0].grid)
    tables = {}
    for (group, p) in _needed_pairs(params):
        table = {j: np.zeros(len(times)) for j in part.js}
        for it, st in enumerate(states):
            for f in _group_fields(st, group):
                for j in part.js:
                    table[j][it] += part.block_lp(f, j, p)
        tables[(group, p)] = table
    return DecayBundle(times=times, tables=tables, params=params)


def _blk_name(group: str, p: float, j: int) -> str:
    return f"blk:{group}:p{p:g}:j{j}"


def block_table_trackers(params: DecayParams, grid) -> list:
    """Trackers recording every per-block norm the functionals need, so a
    NormSeries (hence norms.csv) carries the full bundle."""
    part = build_partition(grid)
    trackers = []
    for (group, p) in _needed_pairs(params):
        for j in part.js:
            def fn(state, group=group, p=p, j=j):
                pt = build_partition(state.grid)
                return sum(pt.block_lp(f, j, p) for f in _group_fields(state, group))
            trackers.append(Tracker(_blk_name(group, p, j), fn, guarded=False))
    return trackers


def bundle_from_series(series: NormSeries, params: DecayParams) -> DecayBundle:
    """Reassemble the block tables from a NormSeries written by the block
    trackers (the norms.csv wire format)."""
    tables = {}
    times = None
    for name in series.names:
        if not name.startswith("blk:"):
            continue
        _, group, p_s, j_s = name.split(":")
        p = float(p_s[1:])
        j = int(j_s[1:])
        if times is None:
            times = series.times(name)
        tables.setdefault((group, p), {})[j] = series.values(name)
    if times is None:
        raise DomainError("series carries no block-table records")
    return DecayBundle(times=times, tables=tables, params=params)


def standard_trackers(params: DecayParams, grid) -> list:
    """Human-readable norms tracked during runs: low-frequency Besov norms of
    (a_tilde, u) on the s-sample grid, the two high-frequency norms, and the
    critical norm of a."""
    trackers = []
    for s in params.s_samples:
        spec = params.low_spec(s)
        trackers.append(Tracker(
            f"lowB_s{s:+.2f}",
            lambda st, spec=spec: besov_norm_multi(
                _group_fields(st, "a_tilde") + _group_fields(st, "u"), spec)))
    hs1 = params.high_spec(params.d / params.p - 1.0)
    trackers.append(Tracker(
        "highB_grad_a_u",
        lambda st, spec=hs1: besov_norm_multi(
            _group_fields(st, "grad_a") + _group_fields(st, "u"), spec)))
    hs2 = params.high_spec(params.d / params.p)
    trackers.append(Tracker(
        "highB_grad_u",
        lambda st, spec=hs2: besov_norm_multi(
            [gc for comp in st.u for gc in grad(comp)], spec)))
    crit = BesovSpec(s=params.d / params.p, p=params.p, r=1)
    trackers.append(Tracker(
        "critB_a", lambda st, spec=crit: besov_norm_multi([st.a], spec)))
    return trackers


def weighted_norm_series(times, states, params: DecayParams, s: float) -> NormSeries:
    """Time-weighted norms: <t>^{(s1+s)/2} times the low-frequency
    Besov(s, 2, 1) norm of (a_tilde, u), plus the two high-frequency series
    <t>^alpha ||(grad a, u)||^h and t^alpha ||grad u||^h."""
    lo, hi = params.s_range
    if not (lo - 1e-12 <= s <= hi + 1e-12):
        raise DomainError(f"s = {s} outside the admissible range [{lo}, {hi}]")
    bundle = bundle_from_states(times, states, params)
    return weighted_series_from_bundle(bundle, s)


def weighted_series_from_bundle(bundle: DecayBundle, s: float) -> NormSeries:
    params = bundle.params
    t = bundle.times
    out = NormSeries()
    low = bundle.pair_norm(("a_tilde", "u"), 2.0, params.low_spec(s))
    w_low = bracket(t) ** ((params.s1 + s) / 2.0) * low
    h1 = bundle.pair_norm(("grad_a", "u"), params.p,
                          params.high_spec(params.d / params.p - 1.0))
    w_h1 = bracket(t) ** params.alpha * h1
    h2 = bundle.norm("grad_u", params.p, params.high_spec(params.d / params.p))
    w_h2 = np.asarray(t, dtype=float) ** params.alpha * h2
    for it, tt in enumerate(t):
        out.add(tt, f"low_weighted_s{s:+.2f}", w_low[it])
        out.add(tt, "high_weighted_grad_a_u", w_h1[it])
        out.add(tt, "high_weighted_grad_u", w_h2[it])
    return out


def _tilde_running(bundle: DecayBundle, group_weights, spec: BesovSpec,
                   weight: np.ndarray) -> np.ndarray:
    """Running Chemin-Lerner (theta = inf) norm of a weighted field tuple:
    per block, the running sup of weight * block norm; then the l^1 block sum."""
    t = bundle.times
    out = np.zeros(len(t))
    for group, p in group_weights:
        table = bundle.tables[(group, p)]
        for j, vals in table.items():
            if spec.selects(j):
                out += 2.0 ** (j * spec.s) * np.maximum.accumulate(weight * vals)
    return out


def functional_D(bundle: DecayBundle, params: DecayParams = None) -> NormSeries:
    """The time-weighted functional: running sup over the s-sample grid of the
    weighted low norms, plus the two weighted high-frequency tilde norms."""
    params = params or bundle.params
    t = bundle.times
    low_part = np.zeros(len(t))
    for s in params.s_samples:
        low = bundle.pair_norm(("a_tilde", "u"), 2.0, params.low_spec(s))
        w = bracket(t) ** ((params.s1 + s) / 2.0) * low
        low_part = np.maximum(low_part, np.maximum.accumulate(w))
    h1 = _tilde_running(
        bundle, (("grad_a", params.p), ("u", params.p)),
        params.high_spec(params.d / params.p - 1.0), bracket(t) ** params.alpha)
    h2 = _tilde_running(
        bundle, (("grad_u", params.p),),
        params.high_spec(params.d / params.p), np.asarray(t, dtype=float) ** params.alpha)
    out = NormSeries()
    total = low_part + h1 + h2
    for it, tt in enumerate(t):
        out.add(tt, "D_p", total[it])
        out.add(tt, "D_p_low", low_part[it])
        out.add(tt, "D_p_high", h1[it] + h2[it])
    return out


def _cumtrapz(vals: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros(len(t))
    if len(t) > 1:
        seg = 0.5 * (vals[1:] + vals[:-1]) * np.diff(t)
        out[1:] = np.cumsum(seg)
    return out


def functional_E(bundle: DecayBundle, params: DecayParams = None) -> NormSeries:
    """The bounded-energy functional: low tilde-sup norms of a and u, the
    running L^1-in-time of the low (a, grad u) norm, the high tilde-sup of
    (grad a, u), and the running L^1 of the high (a, grad u) norm."""
    params = params or bundle.params
    t = bundle.times
    d = params.d
    one = np.ones(len(t))
    e1 = _tilde_running(bundle, (("a", 2.0),), params.low_spec(d / 2.0 - 2.0), one)
    e2 = _tilde_running(bundle, (("u", 2.0),), params.low_spec(d / 2.0 - 1.0), one)
    e3 = _cumtrapz(bundle.pair_norm(("a", "grad_u"), 2.0, params.low_spec(d / 2.0)), t)
    e4 = _tilde_running(bundle, (("grad_a", params.p), ("u", params.p)),
                        params.high_spec(d / params.p - 1.0), one)
    e5 = _cumtrapz(bundle.pair_norm(("a", "grad_u"), params.p,
                                    params.high_spec(d / params.p)), t)
    out = NormSeries()
    total = e1 + e2 + e3 + e4 + e5
    for it, tt in enumerate(t):
        out.add(tt, "E_p", total[it])
    return out


def fit_decay_slope(series: NormSeries, name: str, window: tuple) -> tuple:
    """Least-squares slope of log(value) against log <t> inside the window.

    Returns (slope, stderr). Needs at least 10 positive samples in window.
    """
    t = series.times(name)
    v = series.values(name)
    sel = (t >= window[0]) & (t <= window[1])
    if np.count_nonzero(sel) < 10:
        raise DomainError(
            f"need at least 10 samples of {name!r} in window {window}, "
            f"got {int(np.count_nonzero(sel))}")
    if np.any(v[sel] <= 0):
        raise DomainError(f"nonpositive values of {name!r} in fit window")
    res = linregress(np.log(bracket(t[sel])), np.log(v[sel]))
    return float(res.slope), float(res.stderr)


# -- predicted exponents (linear-theory rate formulas) ----------------------

def predicted_density_lp_exponent(params: DecayParams, s: float) -> float:
    """Exponent of <t> for || |D|^s (rho - 1) ||_{L^p}: -(s1 + s + 1)/2,
    valid for -s1 - 1 < s <= d/p."""
    if not (-params.s1 - 1.0 < s <= params.d / params.p + 1e-12):
        raise DomainError(f"density derivative order s = {s} outside (-s1-1, d/p]")
    return -(params.s1 + s + 1.0) / 2.0


def predicted_velocity_lp_exponent(params: DecayParams, s: float) -> float:
    """Exponent of <t> for || |D|^s u ||_{L^p}: -(s1 + s)/2, valid for
    -s1 < s <= d/p + 1."""
    if not (-params.s1 < s <= params.d / params.p + 1.0 + 1e-12):
        raise DomainError(f"velocity derivative order s = {s} outside (-s1, d/p+1]")
    return -(params.s1 + s) / 2.0


def predicted_density_lr_exponent(params: DecayParams, r: float, l: float) -> float:
    """L^r-decay exponent of |D|^l (rho - 1) from the p = 2 framework:
    -s1/2 - (d/2)(1/2 - 1/r) - (l+1)/2."""
    d = params.d
    shift = l + d * (0.5 - 1.0 / r)
    if not (-params.s1 - 1.0 < shift <= d / 2.0 + 1e-12):
        raise DomainError(f"indices (r={r}, l={l}) violate -s1-1 < l + d(1/2-1/r) <= d/2")
    return -params.s1 / 2.0 - (d / 2.0) * (0.5 - 1.0 / r) - (l + 1.0) / 2.0


def predicted_velocity_lr_exponent(params: DecayParams, r: float, k: float) -> float:
    """L^r-decay exponent of |D|^k u from the p = 2 framework:
    -s1/2 - (d/2)(1/2 - 1/r) - k/2."""
    d = params.d
    shift = k + d * (0.5 - 1.0 / r)
    if not (-params.s1 < shift <= d / 2.0 + 1.0 + 1e-12):
        raise DomainError(f"indices (r={r}, k={k}) violate -s1 < k + d(1/2-1/r) <= d/2+1")
    return -params.s1 / 2.0 - (d / 2.0) * (0.5 - 1.0 / r) - k / 2.0


def rate_report(series: NormSeries, params: DecayParams, window: tuple,
                quantities: dict = None, tolerance: float = 0.05,
                poisson: bool = True) -> list:
    """Fitted-versus-predicted decay table.

    ``quantities`` maps series names to ('a' | 'u', s); the report carries one
    row per quantity plus the density-minus-velocity gap row (target -1/2 with
    the Poisson coupling on). Rows are dicts ready for JSON."""
    if quantities is None:
        quantities = {"a_L2": ("a", 0.0), "u_L2": ("u", 0.0)}
    rows = []
    fits = {}
    for name, (comp, s) in quantities.items():
        slope, stderr = fit_decay_slope(series, name, window)
        if comp == "a":
            pred = predicted_density_lp_exponent(params, s)
            if not poisson:
                pred += 0.5  # no coupling: density loses the extra half rate
        else:
            pred = predicted_velocity_lp_exponent(params, s)
        fits[name] = slope
        rows.append({
            "quantity": name,
            "predicted": pred,
            "fitted": slope,
            "stderr": stderr,
            "tolerance": tolerance,
            "pass": bool(abs(slope - pred) <= tolerance),
        })
    a_names = [n for n, (c, s) in quantities.items() if c == "a" and s == 0.0]
    u_names = [n for n, (c, s) in quantities.items() if c == "u" and s == 0.0]
    if a_names and u_names:
        gap = fits[a_names[0]] - fits[u_names[0]]
        target = -0.5 if poisson else 0.0
        rows.append({
            "quantity": "slope_gap_a_minus_u",
            "predicted": target,
            "fitted": gap,
            "stderr": 0.0,
            "tolerance": tolerance,
            "pass": bool(abs(gap - target) <= tolerance),
        })
    return rows
