"""
Experiment configuration: INI files layered over built-in per-experiment defaults.

Numeric lists accept a comma-separated list of numbers, the token
``delta_max`` for 1/(2 sqrt 2), or the shorthands ``log(a, b, k)`` and
``lin(a, b, k)`` for k geometric or linear points from a to b.
"""
from __future__ import annotations

import configparser
import hashlib
import io
import re
from dataclasses import dataclass

import numpy as np

from .curvature import DELTA_MAX
from .estimator.checks import ExponentSet, GridTooCoarseError, check_littman_grid, littman_grid
from .estimator.probes import DEFAULT_SEED
from .spectral import make_grid

__all__ = [
    "EXPERIMENTS",
    "ConfigError",
    "ExperimentConfig",
    "default_text",
    "load_config",
    "parse_config",
    "validate",
]

EXPERIMENTS = {
    "partition-check": "dyadic partition of unity and shell overlap on the frequency lattice",
    "symbol-invariants": "determinant and composition identities of the semigroup symbol",
    "shell-bounds": "per-shell spatial and symbol sup norms and their log2 slopes",
    "littman-scan": "sup-norm decay of the oscillatory integral with the damped phase",
    "corollary-scan": "L^p -> L^p' decay of the propagator over a probe family",
    "besov-scan": "Besov-norm ratios against the estimate's time profile",
    "lemma1-check": "lift of a per-shell bound to Besov norms",
    "interpolation-check": "measured L^p -> L^p' ratios against the Riesz-Thorin bound",
    "scaling-check": "dilation identity relating (delta, t) to (delta/t, 1)",
    "curvature-report": "Hessian rank, determinant and minors of the radial phase",
    "solve": "semilinear time stepping with energy diagnostics",
    "convergence-study": "self-convergence order of the time stepper",
}

_COMMON = {
    "experiment": {"name": None, "output": None, "seed": hex(DEFAULT_SEED)},
}

# section -> key -> default text; the key set of each experiment is closed
_DEFAULTS = {
    "partition-check": {
        "grid": {"n": "2", "N": "1024", "L": "8"},
        "parameters": {"J": "7"},
        "tolerances": {"partition": "1e-12", "overlap": "0"},
    },
    "symbol-invariants": {
        "parameters": {
            "radii": "log(1e-2, 10, 20)",
            "deltas": "log(1e-3, 1, 10)",
            "times": "log(1e-2, 10, 10)",
            "composition_fractions": "1, 0.37",
        },
        "tolerances": {"determinant": "1e-10", "composition": "1e-9"},
    },
    "shell-bounds": {
        "grid": {"n": "2", "N": "1024"},
        "parameters": {"deltas": "0, 0.015625", "shells": "1, 2, 3, 4, 5, 6, 7"},
        "tolerances": {"slope": "0.1"},
    },
    "littman-scan": {
        "grid": {"n": "2", "N": "2048"},
        "parameters": {"deltas": "0, 0.1, 0.2, 0.3, delta_max", "times": "log(10, 200, 12)"},
        "tolerances": {"slope": "0.1", "uniformity": "3"},
    },
    "corollary-scan": {
        "grid": {"n": "2", "N": "2048", "L": "320"},
        "parameters": {"deltas": "0, 0.01, 0.1, 0.3, 1", "p": "1.2", "times": "log(4, 128, 6)"},
        "tolerances": {"slope": "0.1", "intercept_spread": "5", "p2_rtol": "1e-12"},
    },
    "besov-scan": {
        "grid": {"n": "2", "N": "1024", "L": "192"},
        "parameters": {
            "deltas": "0, 0.001, 0.01, 0.1, 0.3, 1",
            "p": "1.2",
            "q": "2",
            "sigma": "1",
            "J": "3",
            "times": "1, 2, 4, 8, 16, 32, 64",
        },
        "tolerances": {"delta_spread": "5"},
    },
    "lemma1-check": {
        "grid": {"n": "2", "N": "1024", "L": "192"},
        "parameters": {"delta": "0.1", "t": "1", "p": "1.2", "q": "2", "sigma": "1", "J": "3"},
        "tolerances": {"rtol": "1e-12"},
    },
    "interpolation-check": {
        "grid": {"n": "2", "N": "512", "L": "48"},
        "parameters": {
            "deltas": "0, 0.01, 0.1, 0.3, 1",
            "times": "0.5, 1, 2, 4",
            "ps": "1, 1.2, 1.5, 2",
            "cutoff_J": "4",
        },
        "tolerances": {"slack": "0.01"},
    },
    "scaling-check": {
        "grid": {"n": "2"},
        "parameters": {"deltas": "0, 0.1, 0.5", "times": "0.5, 2, 8", "widths": "0.707, 1"},
        "tolerances": {"relative": "1e-6"},
    },
    "curvature-report": {
        "parameters": {
            "dims": "2, 3",
            "deltas": "0, 0.05, 0.2, 0.3525533906",
            "n_radii": "16",
            "n_dirs": "32",
        },
        "tolerances": {"finite_difference": "1e-6", "idempotency": "1e-12"},
    },
    "solve": {
        "grid": {"n": "2", "N": "64", "L": "20"},
        "parameters": {
            "delta": "0.1",
            "a": "0",
            "b": "-1",
            "r_exp": "3",
            "amplitude": "1.5",
            "width": "1",
            "tau": "0.01",
            "T": "10",
            "snapshot_every": "250",
        },
        "tolerances": {"monotone": "1e-8", "conservation": "1e-4"},
    },
    "convergence-study": {
        "grid": {"n": "2", "N": "64", "L": "20"},
        "parameters": {
            "delta": "0.1",
            "a": "0",
            "b": "-1",
            "r_exp": "3",
            "amplitude": "1.5",
            "width": "1",
            "T": "1",
            "divisions": "64, 128, 256, 512, 1024",
        },
        "tolerances": {"order": "2", "order_tol": "0.2"},
    },
}

_LIST_KEYS = {
    "radii", "deltas", "times", "composition_fractions", "shells", "ps", "widths", "dims", "divisions",
}
_INT_KEYS = {"n", "N", "J", "cutoff_J", "n_radii", "n_dirs", "snapshot_every", "seed"}
_RANGE = re.compile(r"^(log|lin)\(\s*([^,]+),\s*([^,]+),\s*(\d+)\s*\)$")


class ConfigError(ValueError):
    """The configuration cannot be run as written."""


def _number(tok: str) -> float:
    tok = tok.strip()
    if tok.lower() == "delta_max":
        return float(DELTA_MAX)
    try:
        return float(tok)
    except ValueError:
        raise ConfigError(f"not a number: {tok!r}") from None


def _number_list(text: str) -> tuple:
    text = text.strip()
    m = _RANGE.match(text)
    if m:
        kind, a, b, k = m.group(1), _number(m.group(2)), _number(m.group(3)), int(m.group(4))
        if k < 1:
            raise ConfigError(f"empty range {text!r}")
        pts = np.geomspace(a, b, k) if kind == "log" else np.linspace(a, b, k)
        return tuple(float(x) for x in pts)
    if not text:
        return ()
    return tuple(_number(tok) for tok in text.split(","))


def _integer(text: str) -> int:
    try:
        return int(text.strip(), 0)
    except ValueError:
        raise ConfigError(f"not an integer: {text!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    output: str
    seed: int
    grid: dict
    params: dict
    tolerances: dict
    text: str  # canonical INI text with defaults filled in, output omitted

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    def tol(self, key: str) -> float:
        return self.tolerances[key]


def _layered(name: str) -> dict:
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; see list-experiments")
    layers = {"experiment": dict(_COMMON["experiment"])}
    layers["experiment"]["name"] = name
    layers["experiment"]["output"] = f"runs/{name}"
    for sec, kv in _DEFAULTS[name].items():
        layers[sec] = dict(kv)
    return layers


def _render(layers: dict) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    for sec in ("experiment", "grid", "parameters", "tolerances"):
        if sec in layers:
            cp[sec] = layers[sec]
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def default_text(name: str) -> str:
    """Complete INI text of the built-in configuration for one experiment."""
    return _render(_layered(name))


def parse_config(text: str, output: str | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if not cp.has_option("experiment", "name"):
        raise ConfigError("missing [experiment] name")
    name = cp.get("experiment", "name").strip()
    layers = _layered(name)
    for sec in cp.sections():
        if sec not in layers:
            raise ConfigError(f"section [{sec}] does not apply to {name}")
        for key, val in cp.items(sec):
            if key not in layers[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}] for {name}")
            layers[sec][key] = val.strip()
    if output is not None:
        layers["experiment"]["output"] = output

    def convert(key, val):
        if key in _LIST_KEYS:
            out = _number_list(val)
            if not out:
                raise ConfigError(f"{key} must not be empty")
            return out
        if key in _INT_KEYS:
            return _integer(val)
        return _number(val)

    grid = {k: convert(k, v) for k, v in layers.get("grid", {}).items()}
    params = {k: convert(k, v) for k, v in layers.get("parameters", {}).items()}
    tols = {k: _number(v) for k, v in layers.get("tolerances", {}).items()}
    seed = _integer(layers["experiment"]["seed"])
    output_dir = layers["experiment"].pop("output")
    # the output location is not part of the experiment, so it stays out of the digest
    return ExperimentConfig(name, output_dir, seed, grid, params, tols, _render(layers))


def load_config(path, output: str | None = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, output)


# -- static validation ---------------------------------------------------------------


def _grid_problems(cfg: ExperimentConfig) -> list:
    g = cfg.grid
    out = []
    if "n" in g and g["n"] not in (1, 2, 3):
        out.append(f"dimension n={g['n']} must be 1, 2 or 3")
    if "N" in g and (g["N"] < 4 or g["N"] % 2):
        out.append(f"N={g['N']} must be an even integer >= 4")
    if "L" in g and not g["L"] > 0:
        out.append(f"L={g['L']} must be positive")
    return out


def _level_resolved(cfg: ExperimentConfig, J: int) -> str | None:
    g = cfg.grid
    nyq = np.pi * g["N"] / g["L"]
    if 2.0 ** (J + 1) > nyq:
        return f"J={J} needs Nyquist >= {2 ** (J + 1)}, grid gives {nyq:.3g}"
    return None


def validate(cfg: ExperimentConfig) -> list:
    """Static checks only; returns the list of problems (empty means accepted)."""
    problems = _grid_problems(cfg)
    if problems:
        return problems
    P = cfg.params
    name = cfg.name
    n = cfg.grid.get("n", 2)

    if name == "partition-check":
        msg = _level_resolved(cfg, P["J"])
        if msg:
            problems.append(msg)
    elif name == "symbol-invariants":
        for key in ("radii", "deltas", "times"):
            if min(P[key]) < 0:
                problems.append(f"{key} must be nonnegative")
    elif name == "shell-bounds":
        if min(P["shells"]) < 0:
            problems.append("shell indices must be nonnegative")
        if min(P["deltas"]) < 0:
            problems.append("delta must be nonnegative")
    elif name == "littman-scan":
        bad = [d for d in P["deltas"] if not 0 <= d <= DELTA_MAX + 1e-15]
        if bad:
            problems.append(f"delta {bad} outside the Littman interval [0, 1/(2 sqrt 2)] = [0, {DELTA_MAX:.5f}]")
        if min(P["times"]) <= 0:
            problems.append("times must be positive")
        if not problems:
            grid = littman_grid(n, max(P["times"]), cfg.grid.get("N"))
            for d in P["deltas"]:
                try:
                    check_littman_grid(grid, max(P["times"]), d)
                except GridTooCoarseError as exc:
                    problems.append(str(exc))
                    break
    elif name in ("corollary-scan", "besov-scan"):
        ex = ExponentSet(P["p"], n)
        if not ex.admissible():
            problems.append(f"p={P['p']:g} outside the admissible range [{ex.p_min:.4g}, 2] for n={n}")
        if n < 2:
            problems.append("the decay estimate needs n >= 2")
        if min(P["times"]) <= 0:
            problems.append("times must be positive")
        if min(P["deltas"]) < 0:
            problems.append("delta must be nonnegative")
        if name == "besov-scan":
            if not P["sigma"] > 0 or P["q"] < 1:
                problems.append("need sigma > 0 and q >= 1")
            msg = _level_resolved(cfg, P["J"])
            if msg:
                problems.append(msg)
    elif name == "lemma1-check":
        if not 1 <= P["p"] <= 2:
            problems.append(f"p={P['p']:g} must lie in [1, 2]")
        msg = _level_resolved(cfg, P["J"])
        if msg:
            problems.append(msg)
    elif name == "interpolation-check":
        bad = [p for p in P["ps"] if not 1 <= p <= 2]
        if bad:
            problems.append(f"p values {bad} must lie in [1, 2]")
        msg = _level_resolved(cfg, P["cutoff_J"])
        if msg:
            problems.append(msg)
    elif name == "scaling-check":
        if min(P["times"]) <= 0 or min(P["widths"]) <= 0:
            problems.append("times and widths must be positive")
    elif name == "curvature-report":
        if any(d not in (1, 2, 3) for d in P["dims"]):
            problems.append("dims must be 1, 2 or 3")
        bad = [d for d in P["deltas"] if not 0 <= d <= DELTA_MAX]
        if bad:
            problems.append(f"delta {bad} outside [0, 1/(2 sqrt 2)]")
    elif name in ("solve", "convergence-study"):
        if P["r_exp"] < 1:
            problems.append("r_exp must be >= 1")
        if P["delta"] < 0:
            problems.append("delta must be nonnegative")
        if name == "solve":
            m = P["T"] / P["tau"]
            if not P["tau"] > 0 or abs(m - round(m)) > 1e-9 * m:
                problems.append(f"T={P['T']} is not a positive multiple of tau={P['tau']}")
        elif len(P["divisions"]) < 3:
            problems.append("need at least three step counts")
    if name != "scaling-check" and "N" in cfg.grid and "L" in cfg.grid:
        try:
            make_grid(n, cfg.grid["N"], cfg.grid["L"])
        except ValueError as exc:
            problems.append(str(exc))
    return problems
