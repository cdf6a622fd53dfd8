"""Experiment configuration: a documented key-value text format plus schema
validation with constraint-citing errors.

Grammar (a strict subset of TOML, see README):

    # comment
    kind = "linear-decay"        # top-level scalar
    [section]                    # tables, one level deep
    key = value                  # value: string, number, boolean, or
    window = [10.0, 1000.0]      #        a flat array of numbers/strings

Unknown sections or keys are rejected; every default is filled in explicitly
so the manifest echoes the complete configuration.
"""

from __future__ import annotations

import math

from .errors import ConfigError

__all__ = ["parse_config_text", "load_config", "ExperimentConfig", "KINDS"]

KINDS = ("partition-check", "linear-decay", "simulate", "ineq")


def _parse_scalar(tok: str, path: str, lineno: int):
    tok = tok.strip()
    if tok.startswith('"') and tok.endswith('"') and len(tok) >= 2:
        return tok[1:-1]
    if tok == "true":
        return True
    if tok == "false":
        return False
    try:
        if any(c in tok for c in ".eE") and not tok.lstrip("+-").isdigit():
            return float(tok)
        return int(tok)
    except ValueError:
        raise ConfigError(f"{path}:{lineno}: cannot parse value {tok!r}") from None


def parse_config_text(text: str, path: str = "<config>") -> dict:
    """Parse the config grammar into nested dicts; duplicate keys rejected."""
    out = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{path}:{lineno}: malformed section header {line!r}")
            name = line[1:-1].strip()
            if not name.isidentifier():
                raise ConfigError(f"{path}:{lineno}: bad section name {name!r}")
            if name in out:
                raise ConfigError(f"{path}:{lineno}: duplicate section [{name}]")
            out[name] = {}
            section = name
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if not key.isidentifier():
            raise ConfigError(f"{path}:{lineno}: bad key {key!r}")
        if rhs.startswith("["):
            if not rhs.endswith("]"):
                raise ConfigError(f"{path}:{lineno}: malformed array for key {key!r}")
            body = rhs[1:-1].strip()
            value = [_parse_scalar(t, path, lineno) for t in body.split(",")] if body else []
        else:
            value = _parse_scalar(rhs, path, lineno)
        target = out if section is None else out[section]
        if key in target:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        target[key] = value
    return out


# schema: section -> key -> (default, type). "required" means no default.
_REQUIRED = object()

_SCHEMA = {
    None: {"kind": (_REQUIRED, str)},
    "grid": {"d": (2, int), "n": (64, int), "L": (2 * math.pi, float)},
    "physics": {
        "mu_inf": (0.25, float),
        "lambda_inf": (0.5, float),
        "gamma": (1.4, float),
        "poisson": (True, bool),
        "viscosity_model": ("constant", str),
        "viscosity_exponent": (1.0, float),
    },
    "decay": {
        "p": (2.0, float),
        "s1": (None, float),          # None -> endpoint s0
        "epsilon": (0.01, float),
        "j0": (0, int),
        "s_samples": (None, list),    # None -> default grid
        "fit_window": ([10.0, 1000.0], list),
        "samples": (400, int),
        "tolerance": (0.05, float),
    },
    "simulate": {
        "horizon": (100.0, float),
        "cadence": (1.0, float),
        "amplitude": (0.01, float),
        "width": (2.0, float),
        "init": ("bump", str),
        "support_j": (1, int),
        "dt": (None, float),
        "linear_only": (False, bool),
        "smallness": (0.05, float),
        "checkpoints": (True, bool),
        "seed": (1234, int),
    },
    "ineq": {
        "cases": (["bernstein", "product", "composition", "commutator",
                   "embedding", "time-convolution"], list),
        "ns": ([64, 128], list),
        "trials": (16, int),
        "seed": (2024, int),
    },
    "run": {"seed": (0, int), "out": ("out", str)},
}

_KIND_SECTIONS = {
    "partition-check": ("grid", "run"),
    "linear-decay": ("grid", "physics", "decay", "run"),
    "simulate": ("grid", "physics", "decay", "simulate", "run"),
    "ineq": ("ineq", "run"),
}


class ExperimentConfig:
    """Validated, fully-defaulted experiment description."""

    def __init__(self, data: dict):
        self.data = data

    @property
    def kind(self) -> str:
        return self.data["kind"]

    def __getitem__(self, section: str) -> dict:
        return self.data[section]

    def as_dict(self) -> dict:
        return self.data


def _coerce(value, typ, where: str):
    if typ is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if typ is not list and not isinstance(value, typ):
        raise ConfigError(f"{where}: expected {typ.__name__}, got {value!r}")
    if typ is list and not isinstance(value, list):
        raise ConfigError(f"{where}: expected an array, got {value!r}")
    return value


def validate_config(raw: dict, path: str = "<config>") -> ExperimentConfig:
    """Fill defaults, reject unknown keys, and check every cross-field
    constraint (the same ones the parameter types enforce)."""
    if "kind" not in raw:
        raise ConfigError(f"{path}: missing required top-level key 'kind'")
    kind = raw["kind"]
    if kind not in KINDS:
        raise ConfigError(f"{path}: unknown kind {kind!r}; expected one of {KINDS}")
    allowed = _KIND_SECTIONS[kind]
    for key in raw:
        if key == "kind":
            continue
        if key not in allowed:
            raise ConfigError(
                f"{path}: unknown or inapplicable section [{key}] for kind {kind!r}")
        extra = set(raw[key]) - set(_SCHEMA[key])
        if extra:
            raise ConfigError(f"{path}: unknown keys in [{key}]: {sorted(extra)}")

    data = {"kind": kind}
    for section in allowed:
        block = {}
        src = raw.get(section, {})
        for key, (default, typ) in _SCHEMA[section].items():
            if key in src:
                block[key] = _coerce(src[key], typ, f"{path}: [{section}] {key}")
            elif default is _REQUIRED:
                raise ConfigError(f"{path}: [{section}] {key} is required")
            else:
                block[key] = default
        data[section] = block

    _cross_validate(data, path)
    return ExperimentConfig(data)


def _cross_validate(data: dict, path: str):
    from .spectral import Grid
    from .decay import DecayParams
    from .solver import PhysicalParams
    from .errors import DomainError

    if "grid" in data:
        g = data["grid"]
        try:
            Grid(g["d"], g["n"], g["L"])
        except DomainError as e:
            raise ConfigError(f"{path}: [grid] {e}") from None
    if "physics" in data:
        ph = data["physics"]
        try:
            PhysicalParams(mu_inf=ph["mu_inf"], lambda_inf=ph["lambda_inf"],
                           gamma=ph["gamma"], poisson=ph["poisson"],
                           viscosity_model=ph["viscosity_model"],
                           viscosity_exponent=ph["viscosity_exponent"])
        except DomainError as e:
            raise ConfigError(f"{path}: [physics] {e}") from None
    if "decay" in data:
        dc = data["decay"]
        d = data["grid"]["d"] if "grid" in data else 3
        try:
            params = DecayParams(
                d=d, p=dc["p"], s1=dc["s1"], epsilon=dc["epsilon"], j0=dc["j0"],
                s_samples=tuple(dc["s_samples"]) if dc["s_samples"] else None)
        except DomainError as e:
            raise ConfigError(f"{path}: [decay] {e}") from None
        dc["s1"] = params.s1
        dc["s_samples"] = list(params.s_samples)
        w = dc["fit_window"]
        if len(w) != 2 or not (0 < w[0] < w[1]):
            raise ConfigError(f"{path}: [decay] fit_window must be [t_a, t_b] with 0 < t_a < t_b")
    if "simulate" in data:
        sm = data["simulate"]
        if sm["init"] not in ("bump", "random"):
            raise ConfigError(f"{path}: [simulate] init must be 'bump' or 'random'")
        if sm["horizon"] <= 0 or sm["cadence"] <= 0:
            raise ConfigError(f"{path}: [simulate] horizon and cadence must be positive")
    if "ineq" in data:
        known = {"bernstein", "product", "composition", "commutator",
                 "embedding", "time-convolution", "nonclassical"}
        bad = set(data["ineq"]["cases"]) - known
        if bad:
            raise ConfigError(f"{path}: [ineq] unknown cases {sorted(bad)}")


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a config file (UTF-8)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return validate_config(parse_config_text(text, path), path)
