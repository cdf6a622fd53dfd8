"""Experiment orchestration: `nsp-decay-lab <kind> --config <path>`.

Every run writes a manifest (the fully-resolved config plus environment and
timing), a norms.csv in the `t,name,value` schema, and a report.json; the
simulate pipeline can additionally write binary state checkpoints. Identical
(config, seed) pairs reproduce norms.csv byte for byte.

Exit codes: 0 success, 2 configuration, 3 numeric guard, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import os
import struct
import sys
import time

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config
from .decay import (DecayParams, block_table_trackers, bundle_from_series,
                    functional_D, rate_report, standard_trackers)
from .errors import (CflError, ConfigError, DivergenceError, DomainError,
                     VacuumError)
from .littlewood_paley import build_partition
from .propagator import RadialProfile, radial_decay_quadrature
from .series import NormSeries
from .solver import (FluidState, PhysicalParams, default_trackers, simulate)
from .spectral import Ball, Grid, SpectralField, lp_norm, random_field

__all__ = ["main", "run_experiment", "write_outputs", "write_checkpoint",
           "read_checkpoint"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_CHECKPOINT_MAGIC = b"NSPCHK01"


def _atomic_write(path: str, data: bytes):
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_outputs(out_dir: str, series: NormSeries = None, report: dict = None,
                  manifest: dict = None, extra_text: dict = None):
    """Write the standard artifact set atomically; re-runs overwrite."""
    os.makedirs(out_dir, exist_ok=True)
    if series is not None:
        _atomic_write(os.path.join(out_dir, "norms.csv"), series.to_csv().encode())
    if report is not None:
        _atomic_write(os.path.join(out_dir, "report.json"),
                      (json.dumps(report, indent=2, sort_keys=True) + "\n").encode())
    if manifest is not None:
        _atomic_write(os.path.join(out_dir, "manifest.json"),
                      (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode())
    for name, text in (extra_text or {}).items():
        _atomic_write(os.path.join(out_dir, name), text.encode())


def write_checkpoint(path: str, state: FluidState, params: PhysicalParams):
    """Versioned binary container: magic, length-prefixed JSON header, then
    raw little-endian complex128 coefficient planes (C order), a first."""
    header = {
        "grid": {"d": state.grid.d, "n": state.grid.n, "L": state.grid.L},
        "t": state.t,
        "fields": ["a"] + [f"u{i}" for i in range(state.grid.d)],
        "params": {"mu_inf": params.mu_inf, "lambda_inf": params.lambda_inf,
                   "gamma": params.gamma, "poisson": params.poisson},
    }
    head = json.dumps(header, sort_keys=True).encode()
    blob = bytearray()
    blob += _CHECKPOINT_MAGIC
    blob += struct.pack("<I", len(head))
    blob += head
    for f in [state.a] + list(state.u):
        blob += np.ascontiguousarray(f.coeffs, dtype="<c16").tobytes()
    _atomic_write(path, bytes(blob))


def read_checkpoint(path: str):
    """Inverse of write_checkpoint; returns (FluidState, header dict)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != _CHECKPOINT_MAGIC:
        raise DomainError(f"{path}: not a checkpoint file (bad magic)")
    (hlen,) = struct.unpack("<I", blob[8:12])
    header = json.loads(blob[12:12 + hlen].decode())
    g = header["grid"]
    grid = Grid(g["d"], g["n"], g["L"])
    count = grid.n ** grid.d
    offset = 12 + hlen
    fields = []
    for _ in header["fields"]:
        arr = np.frombuffer(blob, dtype="<c16", count=count, offset=offset)
        offset += count * 16
        fields.append(arr.astype(np.complex128).reshape(grid.shape))
    a = SpectralField(grid, fields[0], mean_zero=True)
    u = [SpectralField(grid, c) for c in fields[1:]]
    return FluidState(grid, a, u, header["t"]), header


def _environment() -> dict:
    import scipy

    return {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "tool": "nsp-decay-lab",
        "version": __version__,
    }


def _manifest(config: ExperimentConfig, seed, wall: float, notes: dict = None) -> dict:
    return {
        "config": config.as_dict(),
        "seed": seed,
        "environment": _environment(),
        "wall_time_s": wall,
        **(notes or {}),
    }


# -- pipelines ---------------------------------------------------------------

def _run_partition_check(config: ExperimentConfig, out_dir: str, seed: int) -> dict:
    g = config["grid"]
    grid = Grid(g["d"], g["n"], g["L"])
    part = build_partition(grid)
    perr = part.partition_error()

    probe = random_field(grid, Ball(max(part.js) - 2), seed or 7)
    recon = np.zeros(grid.shape, dtype=np.complex128)
    ortho = 0.0
    js = part.js
    for j in js:
        bj = part.block(probe, j)
        recon += bj.coeffs
        for k in js:
            if abs(j - k) >= 2:
                bk = part.block(bj, k)
                ortho = max(ortho, float(np.max(np.abs(bk.coeffs))))
    rerr = float(np.max(np.abs(recon - probe.coeffs)) /
                 np.max(np.abs(probe.coeffs)))
    report = {
        "kind": "partition-check",
        "max_partition_error": perr,
        "near_orthogonality": ortho,
        "reconstruction_error": rerr,
        "j_range": [min(js), max(js)],
        "pass": bool(perr < 1e-12 and rerr < 1e-10),
    }
    series = NormSeries()
    return {"series": series, "report": report,
            "ok": report["pass"], "failure_class": "partition"}


def _linear_profile(which: str):
    ind = lambda r: np.where(np.asarray(r) <= 1.0, 1.0, 0.0)
    zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))
    if which == "endpoint-velocity":
        return {"a0": zero, "u0_pot": ind, "u0_sol": zero, "r_max": 1.0}
    raise ConfigError(f"unknown linear profile {which!r}")


def _run_linear_decay(config: ExperimentConfig, out_dir: str, seed: int) -> dict:
    g = config["grid"]
    ph = config["physics"]
    dc = config["decay"]
    params = DecayParams(d=g["d"], p=dc["p"], s1=dc["s1"], epsilon=dc["epsilon"],
                         j0=dc["j0"], s_samples=tuple(dc["s_samples"]))
    prof_def = _linear_profile("endpoint-velocity")
    profile = RadialProfile(d=g["d"], **prof_def)
    window = tuple(dc["fit_window"])
    times = np.geomspace(window[0], window[1], dc["samples"])
    series = radial_decay_quadrature(profile, times, mu_inf=ph["mu_inf"],
                                     poisson=ph["poisson"])
    rows = rate_report(series, params, window, tolerance=dc["tolerance"],
                       poisson=ph["poisson"])
    report = {
        "kind": "linear-decay",
        "d": g["d"], "p": dc["p"], "s1": params.s1, "alpha": params.alpha,
        "poisson": ph["poisson"],
        "window": list(window),
        "rate_table": rows,
        "pass": bool(all(r["pass"] for r in rows)),
    }
    note = {"quadrature": {"rule": "adaptive Gauss-Kronrod panels",
                           "tail_bound": "cutoff where the damping factor is below 1e-32 of peak"}}
    return {"series": series, "report": report, "ok": report["pass"],
            "failure_class": "rate-mismatch", "notes": note}


def _bump_state(grid: Grid, amplitude: float, width: float, seed: int) -> FluidState:
    """Localized density/velocity bump, mean-projected and dealiased."""
    xs = grid.coords()
    center = [0.5 * grid.L] * grid.d
    r2 = np.zeros(grid.shape)
    for x, c in zip(xs, center):
        dxp = np.abs(x - c)
        dxp = np.minimum(dxp, grid.L - dxp)
        r2 = r2 + dxp * dxp
    bump = np.exp(-r2 / (2.0 * width * width))
    mask = grid.dealias_mask()

    def mk(phys, mean_zero):
        f = SpectralField.from_physical(grid, phys, mean_zero=mean_zero)
        c = np.where(mask, f.coeffs, 0.0)
        if mean_zero:
            c.flat[0] = 0.0
        return SpectralField(grid, c, mean_zero=mean_zero)

    rng = np.random.default_rng(seed)
    phases = rng.uniform(0, 2 * np.pi, size=grid.d)
    a = mk(amplitude * bump, True)
    u = []
    for i in range(grid.d):
        mod = np.cos(2.0 * np.pi * xs[i % grid.d] / grid.L + phases[i])
        u.append(mk(amplitude * bump * mod, True))
    return FluidState(grid, a, u, 0.0)


def _random_state(grid: Grid, amplitude: float, support_j: int, seed: int) -> FluidState:
    mask = grid.dealias_mask()

    def mk(s):
        f = random_field(grid, Ball(support_j), s)
        c = np.where(mask, f.coeffs, 0.0)
        f = SpectralField(grid, c, mean_zero=True)
        size = lp_norm(f, np.inf)
        return f * (amplitude / size if size > 0 else 0.0)

    return FluidState(grid, mk(seed), [mk(seed + 1 + i) for i in range(grid.d)], 0.0)


def _run_simulate(config: ExperimentConfig, out_dir: str, seed: int) -> dict:
    g = config["grid"]
    ph = config["physics"]
    dc = config["decay"]
    sm = config["simulate"]
    grid = Grid(g["d"], g["n"], g["L"])
    params = PhysicalParams(mu_inf=ph["mu_inf"], lambda_inf=ph["lambda_inf"],
                            gamma=ph["gamma"], poisson=ph["poisson"],
                            viscosity_model=ph["viscosity_model"],
                            viscosity_exponent=ph["viscosity_exponent"])
    dparams = DecayParams(d=g["d"], p=dc["p"], s1=dc["s1"], epsilon=dc["epsilon"],
                          j0=dc["j0"], s_samples=tuple(dc["s_samples"]))
    use_seed = seed if seed is not None else sm["seed"]
    if sm["init"] == "bump":
        init = _bump_state(grid, sm["amplitude"], sm["width"], use_seed)
    else:
        init = _random_state(grid, sm["amplitude"], sm["support_j"], use_seed)

    trackers = (default_trackers() + standard_trackers(dparams, grid)
                + block_table_trackers(dparams, grid))
    result = simulate(init, horizon=sm["horizon"], cadence=sm["cadence"],
                      params=params, trackers=trackers, dt=sm["dt"],
                      linear_only=sm["linear_only"], smallness=sm["smallness"])

    bundle = bundle_from_series(result.series, dparams)
    d_series = functional_D(bundle, dparams)
    merged = result.series
    for name in d_series.names:
        for t, v in zip(d_series.times(name), d_series.values(name)):
            merged.add(t, name, v)

    guard = {}
    guard_names = ["a_L2", "atu_L2", "critB_a"] + [
        n for n in merged.names if n.startswith(("lowB_", "highB_"))]
    for tr_name in guard_names:
        vals = merged.values(tr_name)
        if len(vals) and vals[0] > 0:
            guard[tr_name] = float(np.max(vals) / vals[0])
    horizon_rule = (grid.L / (2 * np.pi)) ** 2 / 10.0
    report = {
        "kind": "simulate",
        "dt": result.dt,
        "steps": result.steps,
        "mass_drift": float(np.max(merged.values("mean_a"))),
        "min_density": float(np.min(merged.values("min_density"))),
        "norm_growth_factors": guard,
        "D_p_final": float(merged.values("D_p")[-1]),
        "D_p_high_final": float(merged.values("D_p_high")[-1]),
        "torus_horizon_limit": horizon_rule,
        "horizon_within_rule": bool(sm["horizon"] <= horizon_rule),
        "pass": bool(max(guard.values(), default=0.0) <= 2.0),
    }
    ckpt_paths = []
    if sm["checkpoints"]:
        ck_dir = os.path.join(out_dir, "checkpoints")
        os.makedirs(ck_dir, exist_ok=True)
        for i, st in enumerate(result.checkpoints):
            p = os.path.join(ck_dir, f"state_{i:04d}.bin")
            write_checkpoint(p, st, params)
            ckpt_paths.append(os.path.basename(p))
    report["checkpoints"] = ckpt_paths
    notes = {"torus_rule_flag": {"limit": horizon_rule,
                                 "violated": bool(sm["horizon"] > horizon_rule)}}
    return {"series": merged, "report": report, "ok": report["pass"],
            "failure_class": "norm-growth", "notes": notes}


def _run_ineq(config: ExperimentConfig, out_dir: str, seed: int) -> dict:
    from . import inequalities as ineq

    iq = config["ineq"]
    ns = tuple(int(n) for n in iq["ns"])
    trials = iq["trials"]
    master = seed if seed is not None else iq["seed"]
    reports = []
    extra = {}
    for case in iq["cases"]:
        if case == "bernstein":
            reports.append(ineq.check_bernstein_derivative(ns=ns, trials=trials,
                                                           master_seed=master))
            reports.append(ineq.check_bernstein_multiplier(ns=ns, trials=trials,
                                                           master_seed=master + 1))
        elif case == "product":
            reports.append(ineq.check_product_algebra(ns=ns, trials=trials,
                                                      master_seed=master + 2))
            reports.append(ineq.check_product_two_indices(ns=ns, trials=trials,
                                                          master_seed=master + 3))
            reports.append(ineq.check_product_negative_index(ns=ns, trials=trials,
                                                             master_seed=master + 4))
        elif case == "nonclassical":
            reports.append(ineq.check_nonclassical_product(ns=ns, trials=trials,
                                                           master_seed=master + 5))
        elif case == "composition":
            reports.append(ineq.check_composition(ns=ns, trials=trials,
                                                  master_seed=master + 6))
        elif case == "commutator":
            reports.append(ineq.check_commutator(ns=ns, trials=max(6, trials // 2),
                                                 master_seed=master + 7))
        elif case == "embedding":
            reports.append(ineq.check_embedding(ns=ns, trials=trials,
                                                master_seed=master + 8))
            reports.append(ineq.check_interpolation(ns=ns, trials=trials,
                                                    master_seed=master + 9))
        elif case == "time-convolution":
            extra["time_convolution"] = ineq.check_time_convolution(1.0, 2.0, 0.0)

    summaries = {}
    for rep in reports:
        summaries[rep.case] = rep.summary()
        lines = ["case,n,trial,seed,lhs,rhs,ratio"]
        for row in rep.rows:
            lines.append(f"{rep.case},{row['n']},{row['trial']},{row['seed']},"
                         f"{row['lhs']!r},{row['rhs']!r},{row['ratio']!r}")
        extra[f"ineq_{rep.case}.csv"] = "\n".join(lines) + "\n"
    all_stable = all(s.get("grid_stable", True) for s in summaries.values())
    report = {
        "kind": "ineq",
        "cases": summaries,
        "time_convolution": extra.pop("time_convolution", None),
        "pass": bool(all_stable),
    }
    return {"series": NormSeries(), "report": report, "ok": report["pass"],
            "failure_class": "ratio-growth", "extra_text": extra}


_PIPELINES = {
    "partition-check": _run_partition_check,
    "linear-decay": _run_linear_decay,
    "simulate": _run_simulate,
    "ineq": _run_ineq,
}


def run_experiment(config: ExperimentConfig, out_dir: str, seed: int = None) -> int:
    """Execute the configured pipeline; returns the process exit code."""
    start = time.time()
    try:
        result = _PIPELINES[config.kind](config, out_dir, seed)
    except (VacuumError, CflError, DivergenceError, DomainError) as e:
        cls = {"VacuumError": "vacuum", "CflError": "cfl",
               "DivergenceError": "divergence", "DomainError": "domain"}[type(e).__name__]
        try:
            write_outputs(out_dir, report={"kind": config.kind, "pass": False,
                                           "failure_class": cls, "error": str(e)},
                          manifest=_manifest(config, seed, time.time() - start))
        except OSError:
            pass
        print(json.dumps({"failure_class": cls, "error": str(e)}), file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(json.dumps({"failure_class": "io", "error": str(e)}), file=sys.stderr)
        return EXIT_IO

    try:
        write_outputs(out_dir, series=result.get("series"),
                      report=result.get("report"),
                      manifest=_manifest(config, seed, time.time() - start,
                                         result.get("notes")),
                      extra_text=result.get("extra_text"))
    except OSError as e:
        print(json.dumps({"failure_class": "io", "error": str(e)}), file=sys.stderr)
        return EXIT_IO
    if not result["ok"]:
        print(json.dumps({"failure_class": result["failure_class"]}), file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nsp-decay-lab",
        description="Decay-rate and inequality experiments for the coupled "
                    "compressible-flow perturbation system.")
    parser.add_argument("kind", choices=list(_PIPELINES))
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the run seed")
    args = parser.parse_args(argv)

    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be a nonnegative integer")
        config = load_config(args.config)
        if config.kind != args.kind:
            raise ConfigError(
                f"config kind {config.kind!r} does not match requested {args.kind!r}")
    except ConfigError as e:
        print(json.dumps({"failure_class": "config", "error": str(e)}), file=sys.stderr)
        return EXIT_CONFIG
    out_dir = args.out or config["run"]["out"]
    seed = args.seed if args.seed is not None else config["run"]["seed"] or None
    return run_experiment(config, out_dir, seed)


if __name__ == "__main__":
    sys.exit(main())
