"""Experiment configuration: JSON file merged over built-in defaults."""

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, ParameterError
from ..multipliers import RegularPolynomial

ENV_OUT = "SPHSEMIGROUP_OUT"

# the equivalence and saturation laws are statements as t -> 0+; the grids
# reach far enough down that every suite member is in its asymptotic regime
_SMALL_T = {"t_min": 1e-7, "t_max": 1.0, "points": 57}

DEFAULTS = {
    "d": 3,
    "N": 64,
    "seed": 20240611,
    "output": "sphsemigroup-out",
    "operators": [
        {"type": "abel_poisson", "gamma": 0.5},
        {"type": "abel_poisson", "gamma": 0.75},
        {"type": "abel_poisson", "gamma": 1.0},
        {"type": "weierstrass", "kappa": 0.5},
        {"type": "weierstrass", "kappa": 1.0},
    ],
    "r": [1, 2, 3],
    "suite": {
        "eigen": [1, 2, 4, 8, 16, 32],
        "random": {"count": 4, "N": 32},
        "smooth": ["geometric", "power4"],
    },
    "kernel": {
        "t": [0.05, 0.2, 1.0],
        "poisson_u": [0.3, 0.5, 0.8],
        "funk_hecke": {"count": 20, "N": 12, "t": 0.5},
        "lam_extra": [1.0, 1.5],
    },
    "semigroup": {
        "polynomials": [[0, 1], [0, 1, 1]],
        "gammas": [0.5, 1.0],
        "t_pairs": {"t_min": 0.01, "t_max": 1.0, "points": 10},
    },
    "bernstein": {"t_grid": {"t_min": 1e-4, "t_max": 10.0, "points": 41}},
    # dense enough that ratio bands are stable when the grid is doubled
    "equivalence": {"t_grid": {**_SMALL_T, "points": 253}, "alphas": [1.0, 2.0, 3.0]},
    "saturation": {"t_grid": dict(_SMALL_T), "slow_decay": 1.0},
    "class_equiv": {"t_grid": {"t_min": 1e-4, "t_max": 1.0, "points": 41}, "suite_count": 8},
    "integral_rep": {
        "operators": [
            {"type": "abel_poisson", "gamma": 0.5},
            {"type": "abel_poisson", "gamma": 1.0},
            {"type": "weierstrass", "kappa": 0.5},
        ],
        "t": [0.0, 0.1, 0.5, 1.0],
        "N": 32,
        "nodes_per_panel": 16,
    },
}


@dataclass(frozen=True)
class Operator:
    """A regular exponential-type semigroup: polynomial p and exponent gamma."""

    name: str
    p: RegularPolynomial
    gamma: float

    def exponent(self, k):
        return self.p(np.asarray(k, dtype=float)) ** self.gamma

    def modulus_order(self, r):
        """(alpha, scale map) with ||f - boolean_r T(t) f|| ~ omega^alpha(f, scale(t))."""
        deg = self.p.degree
        return r * deg * self.gamma, (lambda t: t ** (1.0 / (deg * self.gamma)))


def build_operator(spec, lam):
    kind = spec.get("type")
    try:
        if kind == "abel_poisson":
            g = float(spec["gamma"])
            return Operator(f"V[gamma={g}]", RegularPolynomial((0.0, 1.0)), g)
        if kind == "weierstrass":
            g = float(spec["kappa"])
            return Operator(f"W[kappa={g}]", RegularPolynomial((0.0, 2.0 * lam, 1.0)), g)
        if kind == "semigroup":
            g = float(spec["gamma"])
            p = RegularPolynomial(tuple(spec["p"]))
            return Operator(f"T[p={list(p.coeffs)},gamma={g}]", p, g)
    except KeyError as exc:
        raise ConfigError(f"operator {spec!r} lacks field {exc}") from exc
    except ParameterError as exc:
        raise ConfigError(f"operator {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown operator type {kind!r}")


def t_grid(spec):
    try:
        lo, hi, n = float(spec["t_min"]), float(spec["t_max"]), int(spec["points"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad t-grid {spec!r}") from exc
    if not (0 < lo < hi) or n < 2:
        raise ConfigError(f"t-grid needs 0 < t_min < t_max and at least 2 points, got {spec!r}")
    return np.geomspace(lo, hi, n)


def doubled(spec):
    """Same endpoints, twice the density (every old point is kept)."""
    return {**spec, "points": 2 * int(spec["points"]) - 1}


def _merge(base, over, path=""):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(val, dict) and key not in ("t_grid", "t_pairs"):
            out[key] = _merge(base[key], val, f"{path}{key}.")
        else:
            out[key] = val
    return out


def load_config(path=None):
    """Defaults, overridden by the JSON object at ``path`` (if given)."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {str(p)!r} not found")
        try:
            user = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {str(p)!r} is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _merge(cfg, user)
    validate(cfg)
    return cfg


def validate(cfg):
    d = cfg["d"]
    if not isinstance(d, int) or d < 3:
        raise ConfigError(f"d must be an integer >= 3, got {d!r}")
    if not isinstance(cfg["N"], int) or cfg["N"] < 1:
        raise ConfigError(f"N must be a positive integer, got {cfg['N']!r}")
    if not isinstance(cfg["seed"], int):
        raise ConfigError(f"seed must be an integer, got {cfg['seed']!r}")
    if not cfg["r"] or any(not isinstance(r, int) or r < 1 for r in cfg["r"]):
        raise ConfigError(f"r must be a list of positive integers, got {cfg['r']!r}")
    lam = lam_of(cfg)
    for spec in cfg["operators"] + cfg["integral_rep"]["operators"]:
        op = build_operator(spec, lam)
        if op.gamma > 1:
            raise ConfigError(f"{op.name}: gamma > 1 has no positive kernel")
    if any(j < 1 or j > cfg["N"] for j in cfg["suite"]["eigen"]):
        raise ConfigError("eigenfunction degrees must lie in 1..N")
    for name in ("bernstein", "equivalence", "saturation", "class_equiv"):
        t_grid(cfg[name]["t_grid"])
    t_grid(cfg["semigroup"]["t_pairs"])
    unknown = set(cfg["suite"]["smooth"]) - set(SMOOTH_PROFILES)
    if unknown:
        raise ConfigError(f"unknown smooth profiles {sorted(unknown)}")


def lam_of(cfg):
    return (cfg["d"] - 2) / 2.0


SMOOTH_PROFILES = {
    "geometric": lambda k: 2.0 ** (-k),
    "power4": lambda k: (1.0 + k) ** (-4.0),
}
