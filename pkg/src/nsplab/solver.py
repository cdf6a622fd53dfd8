"""Time integration of the full perturbation system on the torus.

The unknowns are the density perturbation a (mean-zero) and velocity u. The
stiff linear part is advanced exactly per Fourier mode through the same
closed-form propagator the linear module uses; the nonlinear sources

    f = -div(a u)
    g = -u . grad u - a/(1+a) * A u - ((1+a)^{gamma-2} - 1) grad a  [+ hooks]

are evaluated pseudo-spectrally (products on the physical grid, derivatives
spectral) with 2/3-rule dealiasing on every product, and corrected with a
two-stage exponential trapezoidal update (second order in dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CflError, DivergenceError, DomainError, VacuumError
from .littlewood_paley import BesovSpec, besov_norm
from .propagator import PropagatorParams, _mode_exp_batch
from .series import NormSeries
from .spectral import Grid, SpectralField, grid_radius, lambda_op, require_mean_zero

__all__ = [
    "PhysicalParams",
    "FluidState",
    "compressible_scalar",
    "solenoidal_part",
    "density_antiderivative",
    "poisson_potential",
    "effective_velocity",
    "compute_nonlinearities",
    "cfl_limit",
    "step",
    "Integrator",
    "Tracker",
    "SimulationResult",
    "simulate",
]


@dataclass(frozen=True)
class PhysicalParams:
    """Viscosities (normalized so 2*mu_inf + lambda_inf = 1), pressure law
    exponent gamma with P(rho) = rho^gamma / gamma, and the Poisson toggle."""

    mu_inf: float = 0.25
    lambda_inf: float = 0.5
    gamma: float = 1.4
    poisson: bool = True
    viscosity_model: str = "constant"  # or "power-law"
    viscosity_exponent: float = 1.0    # mu(rho) = mu_inf rho^beta for the hook

    def __post_init__(self):
        if not (self.mu_inf > 0):
            raise DomainError(f"shear viscosity must be positive, got {self.mu_inf}")
        if abs(2.0 * self.mu_inf + self.lambda_inf - 1.0) > 1e-12:
            raise DomainError(
                f"viscosities must satisfy 2*mu_inf + lambda_inf = 1, got "
                f"{2.0 * self.mu_inf + self.lambda_inf}")
        if not (self.gamma > 1):
            raise DomainError(f"pressure exponent must satisfy gamma > 1, got {self.gamma}")
        if self.viscosity_model not in ("constant", "power-law"):
            raise DomainError(f"unknown viscosity model {self.viscosity_model!r}")

    def propagator(self) -> PropagatorParams:
        return PropagatorParams(mu_inf=self.mu_inf, poisson=self.poisson)


@dataclass
class FluidState:
    """Perturbation pair (a, u) at one time."""

    grid: Grid
    a: SpectralField
    u: list
    t: float = 0.0

    def __post_init__(self):
        require_mean_zero(self.a, "FluidState")
        if len(self.u) != self.grid.d:
            raise DomainError(f"velocity needs {self.grid.d} components, got {len(self.u)}")

    def copy(self) -> "FluidState":
        return FluidState(self.grid, self.a.copy(), [c.copy() for c in self.u], self.t)

    def density_floor(self) -> float:
        """min over the grid of 1 + a."""
        return float(1.0 + np.min(self.a.to_physical()))


def compressible_scalar(state: FluidState) -> SpectralField:
    """omega = |D|^{-1} div u, the scalar carrying the potential part of u."""
    grid = state.grid
    r = grid_radius(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_r = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), 0.0)
    out = np.zeros(grid.shape, dtype=np.complex128)
    for c, uf in zip(grid.freq_components(), state.u):
        out += 1j * c * uf.coeffs
    return SpectralField(grid, out * inv_r, mean_zero=True)


def solenoidal_part(state: FluidState) -> list:
    """The divergence-free content of u (the heat-flow channel)."""
    from .spectral import leray_project

    return leray_project(state.u)


def density_antiderivative(state: FluidState) -> SpectralField:
    """a_tilde = |D|^{-1} a, the variable the low-frequency pair evolves."""
    return lambda_op(state.a, -1.0)


def poisson_potential(a: SpectralField) -> SpectralField:
    """Electrostatic potential: psi = (-Delta)^{-1} a with zero mean."""
    require_mean_zero(a, "poisson_potential")
    r = grid_radius(a.grid)
    out = np.zeros(a.grid.shape, dtype=np.complex128)
    nz = r > 0
    out[nz] = a.coeffs[nz] / (r[nz] ** 2)
    return SpectralField(a.grid, out, mean_zero=True)


def effective_velocity(state: FluidState) -> list:
    """w = grad (-Delta)^{-1} (a - div u); a diagnostic, never fed back."""
    grid = state.grid
    comps = grid.freq_components()
    r = grid_radius(grid)
    div_u = np.zeros(grid.shape, dtype=np.complex128)
    for c, uf in zip(comps, state.u):
        div_u += 1j * c * uf.coeffs
    src = state.a.coeffs - div_u
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_r2 = np.where(r > 0, 1.0 / np.where(r > 0, r * r, 1.0), 0.0)
    return [SpectralField(grid, 1j * c * inv_r2 * src, mean_zero=True) for c in comps]


class _Workspace:
    """Cached lattice geometry for one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.r = grid_radius(grid)
        self.r2 = self.r * self.r
        self.comps = grid.freq_components()
        with np.errstate(divide="ignore", invalid="ignore"):
            self.inv_r = np.where(self.r > 0, 1.0 / np.where(self.r > 0, self.r, 1.0), 0.0)
            self.inv_r2 = self.inv_r * self.inv_r
        self.mask = grid.dealias_mask()
        self.size = float(np.prod(grid.shape))

    def fft(self, phys: np.ndarray) -> np.ndarray:
        return np.fft.fftn(phys) / self.size

    def ifft(self, coeffs: np.ndarray) -> np.ndarray:
        return np.real(np.fft.ifftn(coeffs * self.size))


def _nonlinearities_arrays(ws: _Workspace, a_hat, u_hats, params: PhysicalParams):
    """(f_hat, [g_hat components]) for spectra a_hat, u_hats; dealiased."""
    d = ws.grid.d
    a_phys = ws.ifft(a_hat)
    rho = 1.0 + a_phys
    if np.min(rho) <= 0.0:
        raise VacuumError(f"density floor reached min(1+a) = {np.min(rho):.3e}")
    u_phys = [ws.ifft(uh) for uh in u_hats]

    # f = -div(a u), assembled in divergence form so the mean is conserved
    f_hat = np.zeros(ws.grid.shape, dtype=np.complex128)
    for c, up in zip(ws.comps, u_phys):
        f_hat -= 1j * c * ws.fft(a_phys * up)
    f_hat[~ws.mask] = 0.0
    f_hat.flat[0] = 0.0

    # u . grad u
    grad_u = [[ws.ifft(1j * ws.comps[jax] * u_hats[iax]) for jax in range(d)]
              for iax in range(d)]
    adv = []
    for iax in range(d):
        acc = np.zeros(ws.grid.shape)
        for jax in range(d):
            acc += u_phys[jax] * grad_u[iax][jax]
        adv.append(acc)

    # A u = mu_inf Lap u + (mu_inf + lambda_inf) grad div u, spectrally exact
    div_u_hat = np.zeros(ws.grid.shape, dtype=np.complex128)
    for c, uh in zip(ws.comps, u_hats):
        div_u_hat += 1j * c * uh
    visc = params.mu_inf + params.lambda_inf
    Au_phys = [ws.ifft(-params.mu_inf * ws.r2 * u_hats[iax]
                       + 1j * ws.comps[iax] * visc * div_u_hat)
               for iax in range(d)]

    grad_a = [ws.ifft(1j * c * a_hat) for c in ws.comps]

    I_a = a_phys / rho
    k_a = rho ** (params.gamma - 2.0) - 1.0

    g_hats = []
    for iax in range(d):
        g_phys = -adv[iax] - I_a * Au_phys[iax] - k_a * grad_a[iax]
        g_hats.append(ws.fft(g_phys))

    if params.viscosity_model == "power-law":
        # mu(rho) = mu_inf rho^beta, lambda(rho) = lambda_inf rho^beta:
        # (1/rho) div(2 mu_tilde D(u) + lambda_tilde div u Id)
        beta = params.viscosity_exponent
        mu_t = params.mu_inf * (rho ** beta - 1.0)
        la_t = params.lambda_inf * (rho ** beta - 1.0)
        div_u_phys = ws.ifft(div_u_hat)
        stress = [[mu_t * (grad_u[iax][jax] + grad_u[jax][iax]) for jax in range(d)]
                  for iax in range(d)]
        for iax in range(d):
            stress[iax][iax] = stress[iax][iax] + la_t * div_u_phys
        for iax in range(d):
            div_stress = np.zeros(ws.grid.shape, dtype=np.complex128)
            for jax in range(d):
                div_stress += 1j * ws.comps[jax] * ws.fft(stress[iax][jax])
            g_hats[iax] = g_hats[iax] + ws.fft(ws.ifft(div_stress) / rho)

    for gh in g_hats:
        gh[~ws.mask] = 0.0
    return f_hat, g_hats


def compute_nonlinearities(state: FluidState, params: PhysicalParams):
    """Source pair (f, g) of the perturbation system at the given state."""
    ws = _Workspace(state.grid)
    f_hat, g_hats = _nonlinearities_arrays(ws, state.a.coeffs,
                                           [c.coeffs for c in state.u], params)
    f = SpectralField(state.grid, f_hat, mean_zero=True)
    g = [SpectralField(state.grid, gh) for gh in g_hats]
    return f, g


def cfl_limit(state: FluidState) -> float:
    """Advective step bound 0.5 dx / max(1, max |u|); viscosity is exact."""
    speed2 = np.zeros(state.grid.shape)
    for c in state.u:
        up = c.to_physical()
        speed2 += up * up
    umax = float(np.sqrt(np.max(speed2)))
    return 0.5 * state.grid.dx / max(1.0, umax)


def _phi_series(z: np.ndarray, shift: int) -> np.ndarray:
    """sum_k z^k / (k + shift)! for |z| small, complex-safe (Horner form)."""
    acc = np.ones_like(z)
    for k in range(18, 0, -1):
        acc = 1.0 + acc * z / (shift + k)
    return acc / math.factorial(shift)


def _phi1(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    out[small] = _phi_series(z[small], 1)
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0) / zb
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    out[small] = _phi_series(z[small], 2)
    zb = z[~small]
    out[~small] = (np.exp(zb) - 1.0 - zb) / (zb * zb)
    return out


def _dphi(z: np.ndarray, which: int) -> np.ndarray:
    """Derivative of phi_1 (which=1) or phi_2 (which=2)."""
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    small = np.abs(z) < 0.5
    zs = z[small]
    acc = np.zeros_like(zs)
    for m in range(18, -1, -1):
        acc = acc * zs + (m + 1.0) / math.factorial(m + which + 1)
    out[small] = acc
    zb = z[~small]
    if which == 1:
        out[~small] = ((zb - 1.0) * np.exp(zb) + 1.0) / (zb * zb)
    else:
        out[~small] = ((zb - 2.0) * np.exp(zb) + zb + 2.0) / (zb * zb * zb)
    return out


def _matrix_phi(ws: _Workspace, params: PhysicalParams, h: float, which: int):
    """Entries of h * phi(h M(r)) on the lattice, as four real arrays.

    phi(H) = A I + B (H - zbar I) with zbar = h*tr/2 and A, B the symmetric /
    divided-difference combinations of phi at the eigenvalues; near the
    eigenvalue collision B falls back to phi'(zbar).
    """
    r2 = ws.r2
    det = r2 + 1.0 if params.poisson else r2
    zbar = -0.5 * h * r2
    s2 = (0.25 * r2 * r2 - det) * h * h  # (h s)^2, signed
    w = np.sqrt(s2.astype(np.complex128))
    phi = _phi1 if which == 1 else _phi2
    zp = zbar + w
    zm = zbar - w
    pp = phi(zp)
    pm = phi(zm)
    A = 0.5 * (pp + pm)
    degen = np.abs(w) < 1e-4 * (1.0 + np.abs(zbar))
    with np.errstate(divide="ignore", invalid="ignore"):
        B = np.where(degen, 1.0, (pp - pm) / np.where(degen, 1.0, 2.0 * w))
    B = np.where(degen, _dphi(zbar.astype(np.complex128), which), B)
    A = np.real(A)
    B = np.real(B)
    # H - zbar I = h [[r^2/2, -1], [det, -r^2/2]]
    c11 = h * (A + B * h * 0.5 * r2)
    c12 = h * (B * h * (-1.0))
    c21 = h * (B * h * det)
    c22 = h * (A - B * h * 0.5 * r2)
    return c11, c12, c21, c22


class Integrator:
    """Second-order exponential integrator with a fixed step size.

    Works in the per-mode variables (|D|^{-1} a, |D|^{-1} div u, solenoidal u)
    where the linear flow is the closed-form 2x2 exponential plus scalar heat
    factors; the zero mode of u reduces to Heun's method.
    """

    def __init__(self, grid: Grid, params: PhysicalParams, dt: float):
        if not (dt > 0):
            raise DomainError(f"time step must be positive, got {dt}")
        self.grid = grid
        self.params = params
        self.dt = float(dt)
        self.ws = _Workspace(grid)
        ws = self.ws

        E = _mode_exp_batch(ws.r, self.dt, params.poisson)
        self.E = (E[..., 0, 0], E[..., 0, 1], E[..., 1, 0], E[..., 1, 1])
        self.P1 = _matrix_phi(ws, params, self.dt, 1)
        self.P2 = _matrix_phi(ws, params, self.dt, 2)
        zh = -params.mu_inf * ws.r2 * self.dt
        self.E_heat = np.exp(zh)
        self.P1_heat = self.dt * np.real(_phi1(zh))
        self.P2_heat = self.dt * np.real(_phi2(zh))

    # -- conversions between (a, u) spectra and diagonal variables ---------

    def to_diag(self, a_hat, u_hats):
        ws = self.ws
        at = a_hat * ws.inv_r
        om = np.zeros(self.grid.shape, dtype=np.complex128)
        for c, uh in zip(ws.comps, u_hats):
            om += 1j * c * uh
        om *= ws.inv_r
        sol = []
        for c, uh in zip(ws.comps, u_hats):
            sol.append(uh + 1j * c * ws.inv_r * om)
        return at, om, sol

    def from_diag(self, at, om, sol):
        ws = self.ws
        a_hat = at * ws.r
        a_hat.flat[0] = 0.0
        u_hats = []
        for c, sh in zip(ws.comps, sol):
            u_hats.append(-1j * c * ws.inv_r * om + sh)
        return a_hat, u_hats

    def _sources(self, at, om, sol):
        ws = self.ws
        a_hat, u_hats = self.from_diag(at, om, sol)
        f_hat, g_hats = _nonlinearities_arrays(ws, a_hat, u_hats, self.params)
        n_at = f_hat * ws.inv_r
        div_g = np.zeros(self.grid.shape, dtype=np.complex128)
        for c, gh in zip(ws.comps, g_hats):
            div_g += 1j * c * gh
        n_om = div_g * ws.inv_r
        n_sol = []
        for c, gh in zip(ws.comps, g_hats):
            n_sol.append(gh + 1j * c * ws.inv_r * n_om)
        return n_at, n_om, n_sol

    def _apply_pair(self, T, x, y):
        t11, t12, t21, t22 = T
        return t11 * x + t12 * y, t21 * x + t22 * y

    def step_arrays(self, at, om, sol, linear_only: bool = False):
        if linear_only:
            at1, om1 = self._apply_pair(self.E, at, om)
            sol1 = [self.E_heat * s for s in sol]
            return at1, om1, sol1
        n0 = self._sources(at, om, sol)
        atp, omp = self._apply_pair(self.E, at, om)
        d_at, d_om = self._apply_pair(self.P1, n0[0], n0[1])
        atp = atp + d_at
        omp = omp + d_om
        solp = [self.E_heat * s + self.P1_heat * ns for s, ns in zip(sol, n0[2])]
        n1 = self._sources(atp, omp, solp)
        c_at, c_om = self._apply_pair(self.P2, n1[0] - n0[0], n1[1] - n0[1])
        at1 = atp + c_at
        om1 = omp + c_om
        sol1 = [sp + self.P2_heat * (ns1 - ns0)
                for sp, ns1, ns0 in zip(solp, n1[2], n0[2])]
        return at1, om1, sol1

    def step(self, state: FluidState, linear_only: bool = False) -> FluidState:
        limit = cfl_limit(state)
        if self.dt > limit * (1.0 + 1e-9):
            raise CflError(f"dt = {self.dt} exceeds the CFL limit {limit}")
        # the state contract is band-limited spectra; enforce it so products
        # of caller-supplied data cannot alias
        mask = self.ws.mask
        at, om, sol = self.to_diag(state.a.coeffs * mask,
                                   [c.coeffs * mask for c in state.u])
        at, om, sol = self.step_arrays(at, om, sol, linear_only=linear_only)
        a_hat, u_hats = self.from_diag(at, om, sol)
        a = SpectralField(self.grid, a_hat, mean_zero=True)
        u = [SpectralField(self.grid, uh, mean_zero=bool(uh.flat[0] == 0))
             for uh in u_hats]
        new = FluidState(self.grid, a, u, state.t + self.dt)
        if new.density_floor() <= 0.0:
            raise VacuumError("density floor reached after step")
        return new


def step(state: FluidState, dt: float, params: PhysicalParams,
         linear_only: bool = False) -> FluidState:
    """Advance one step of size dt (builds a single-use integrator)."""
    return Integrator(state.grid, params, dt).step(state, linear_only=linear_only)


@dataclass
class Tracker:
    """A named scalar diagnostic of the state; guarded ones feed the
    divergence detector."""

    name: str
    fn: callable
    guarded: bool = True


def default_trackers(p: float = 2.0) -> list:
    """L^2 sizes, mass, and density floor.

    The velocity alone may grow transiently (the coupling rotates low-mode
    density content into it), so the divergence guard watches the pair
    (|D|^{-1} a, u) instead of u by itself.
    """
    return [
        Tracker("a_L2", lambda s: s.a.l2()),
        Tracker("u_L2", lambda s: float(sum(c.l2() for c in s.u)), guarded=False),
        Tracker("atu_L2", lambda s: float(lambda_op(s.a, -1.0).l2()
                                          + sum(c.l2() for c in s.u))),
        Tracker("mean_a", lambda s: abs(s.a.dc), guarded=False),
        Tracker("min_density", lambda s: s.density_floor(), guarded=False),
    ]


@dataclass
class SimulationResult:
    series: NormSeries
    checkpoints: list
    dt: float
    steps: int
    output_times: np.ndarray
    diverged: bool = False


def simulate(init: FluidState, horizon: float, cadence: float,
             params: PhysicalParams, trackers: list = None,
             dt: float = None, linear_only: bool = False,
             smallness: float = 0.05, besov_p: float = 2.0,
             checkpoint_stride: int = None, guard_factor: float = 10.0) -> SimulationResult:
    """Advance to the horizon, recording tracked norms on the cadence grid.

    Deterministic given (init, arguments): the step size is frozen up front
    (an integer number of steps per cadence interval) and only re-validated
    against the CFL limit as the run proceeds.
    """
    if horizon <= 0 or cadence <= 0 or cadence > horizon + 1e-12:
        raise DomainError("need 0 < cadence <= horizon")
    if smallness is not None:
        spec = BesovSpec(s=init.grid.d / besov_p, p=besov_p, r=1)
        a_size = besov_norm(init.a, spec)
        if a_size > smallness:
            raise DomainError(
                f"initial density perturbation too large: critical norm "
                f"{a_size:.4g} > smallness threshold {smallness}")
    if init.density_floor() <= 0.0:
        raise VacuumError("initial data carries vacuum: min(1+a) <= 0")

    dt_target = dt if dt is not None else cfl_limit(init)
    n_sub = max(1, int(np.ceil(cadence / dt_target - 1e-12)))
    dt_eff = cadence / n_sub
    n_out = int(round(horizon / cadence))
    if abs(n_out * cadence - horizon) > 1e-9 * max(1.0, horizon):
        raise DomainError("horizon must be an integer multiple of the cadence")
    if checkpoint_stride is None:
        checkpoint_stride = max(1, n_out // 10)

    integ = Integrator(init.grid, params, dt_eff)
    trackers = list(trackers) if trackers is not None else default_trackers()

    series = NormSeries()
    checkpoints = [init.copy()]
    state = init.copy()
    initial = {}
    for tr in trackers:
        v = float(tr.fn(state))
        initial[tr.name] = v
        series.add(state.t, tr.name, v)

    steps = 0
    out_times = [state.t]
    for k_out in range(1, n_out + 1):
        for _ in range(n_sub):
            state = integ.step(state, linear_only=linear_only)
            steps += 1
        # land exactly on the cadence point (guard against drift in t bookkeeping)
        state.t = init.t + k_out * cadence
        out_times.append(state.t)
        for tr in trackers:
            v = float(tr.fn(state))
            series.add(state.t, tr.name, v)
            if tr.guarded and initial[tr.name] > 1e-14 and v > guard_factor * initial[tr.name]:
                raise DivergenceError(
                    f"tracked norm {tr.name} = {v:.4g} exceeded {guard_factor}x its "
                    f"initial value {initial[tr.name]:.4g} at t = {state.t}")
        if k_out % checkpoint_stride == 0 or k_out == n_out:
            checkpoints.append(state.copy())
    return SimulationResult(series=series, checkpoints=checkpoints, dt=dt_eff,
                            steps=steps, output_times=np.array(out_times))
