"""Diagonal operators on Laplace series: multiplier sequences and their algebra.

A :class:`MultiplierSequence` is a vectorised rule k -> m(k).  Operators
act on a series by scaling each degree block, so every operator identity
used here (semigroup law, Booleans, generator limits) is a pointwise
identity between sequences.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import binom, gammaln

from .errors import ParameterError
from .gegenbauer import gap_table
from .laplace_series import LaplaceCoefficients

__all__ = [
    "MultiplierSequence",
    "RegularPolynomial",
    "identity",
    "delta",
    "apply",
    "boolean",
    "boolean_defect",
    "compose",
    "subtract_identity",
    "semigroup_multiplier",
    "generator_multiplier",
    "abel_poisson",
    "weierstrass",
    "translation_multiplier",
    "frac_difference_multiplier",
    "binomial_difference_series",
    "cesaro_weights",
    "cesaro_mean",
    "gen_binomial",
    "from_spec",
]

# positivity of p(k) is validated on 1..P_CHECK
P_CHECK = 4096


@dataclass(frozen=True, eq=False)
class MultiplierSequence:
    rule: Callable[[np.ndarray], np.ndarray]
    tag: str
    params: dict = field(default_factory=dict)

    def __call__(self, k):
        k = np.asarray(k)
        return np.broadcast_to(np.asarray(self.rule(k.astype(float)), dtype=float), k.shape)

    def values(self, n):
        """m(0), ..., m(n)."""
        return np.array(self(np.arange(n + 1)))


@dataclass(frozen=True)
class RegularPolynomial:
    """p(x) = sum_i coeffs[i] x^i with p(0) = 0, lowest nonzero coefficient > 0, p(k) > 0 on k >= 1."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        while len(c) > 1 and c[-1] == 0.0:
            c = c[:-1]
        if len(c) < 2:
            raise ParameterError("regular polynomial needs degree >= 1")
        if c[0] != 0.0:
            raise ParameterError("regular polynomial needs p(0) = 0")
        first = next(v for v in c[1:] if v != 0.0)
        if first <= 0:
            raise ParameterError("lowest-order nonzero coefficient must be positive")
        if np.any(self(np.arange(1, P_CHECK + 1)) <= 0):
            raise ParameterError(f"p(k) must be positive for k = 1..{P_CHECK}")

    @property
    def degree(self):
        return max(i for i, v in enumerate(self.coeffs) if v != 0.0)

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coeffs)


def _poly(p):
    return p if isinstance(p, RegularPolynomial) else RegularPolynomial(tuple(p))


def identity():
    return MultiplierSequence(lambda k: np.ones_like(k), "identity")


def delta(j):
    """m(k) = 1 if k == j else 0."""
    return MultiplierSequence(lambda k: (k == j).astype(float), f"delta[{j}]", {"j": j})


def apply(m, f: LaplaceCoefficients):
    """Y_k(Tf) = m(k) Y_k(f)."""
    return f.scale_degrees(m.values(f.N))


def compose(m1, m2):
    return MultiplierSequence(lambda k: m1(k) * m2(k), f"({m1.tag})*({m2.tag})")


def subtract_identity(m):
    return MultiplierSequence(lambda k: m(k) - 1.0, f"({m.tag})-I")


def scale(m, factor):
    return MultiplierSequence(lambda k: factor * m(k), f"{factor}*({m.tag})")


def boolean(m, r):
    """r-th Boolean I - (I - T)^r, as the sequence 1 - (1 - m(k))^r."""
    if int(r) != r or r < 1:
        raise ParameterError(f"Boolean order must be a positive integer, got {r!r}")
    r = int(r)
    params = {key: v for key, v in m.params.items() if not key.startswith("_")}
    params["r"] = r
    if r == 1:
        return MultiplierSequence(m.rule, f"boolean1({m.tag})", params)
    return MultiplierSequence(lambda k: 1.0 - _one_minus(m, k) ** r, f"boolean{r}({m.tag})", params)


def boolean_defect(m, r):
    """(1 - m(k))^r, the multiplier of I - boolean(m, r); computed without cancellation."""
    r = int(r)
    params = {key: v for key, v in m.params.items() if not key.startswith("_")}
    params["r"] = r
    return MultiplierSequence(lambda k: _one_minus(m, k) ** r, f"defect{r}({m.tag})", params)


def _one_minus(m, k):
    # 1 - e^{-x} for semigroup multipliers keeps full precision through expm1
    expo = m.params.get("_exponent")
    if expo is not None:
        return -np.expm1(-expo(k))
    return 1.0 - m(k)


def _check_gamma(gamma, permissive):
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma!r}")
    if gamma > 1 and not permissive:
        raise ParameterError("gamma > 1 needs permissive=True (no kernel positivity is claimed there)")


def semigroup_multiplier(p, gamma, t, permissive=False):
    """k -> exp(-(p(k))^gamma t); identity at t = 0."""
    p = _poly(p)
    _check_gamma(gamma, permissive)
    if not t >= 0:
        raise ParameterError(f"t must be nonnegative, got {t!r}")

    def exponent(k):
        return p(k) ** gamma * t

    return MultiplierSequence(
        lambda k: np.exp(-exponent(k)),
        f"semigroup(p={list(p.coeffs)},gamma={gamma},t={t})",
        {"p": p.coeffs, "gamma": gamma, "t": t, "_exponent": exponent},
    )


def generator_multiplier(p, gamma, r=1, permissive=False):
    """k -> (-(p(k))^gamma)^r, stored as (-1)^r p(k)^(r gamma)."""
    p = _poly(p)
    _check_gamma(gamma, permissive)
    if int(r) != r or r < 1:
        raise ParameterError(f"generator power must be a positive integer, got {r!r}")
    sign = -1.0 if int(r) % 2 else 1.0
    return MultiplierSequence(
        lambda k: sign * p(k) ** (r * gamma),
        f"generator(p={list(p.coeffs)},gamma={gamma})^{int(r)}",
        {"p": p.coeffs, "gamma": gamma, "r": int(r)},
    )


def abel_poisson(gamma, t):
    """V_t^gamma: p(x) = x."""
    return semigroup_multiplier((0.0, 1.0), gamma, t)


def weierstrass(kappa, t, lam=0.5):
    """W_t^kappa: p(x) = x (x + 2 lam)."""
    return semigroup_multiplier((0.0, 2.0 * lam, 1.0), kappa, t)


def _check_angle(theta):
    if not 0 <= theta <= np.pi:
        raise ParameterError(f"step angle must lie in (0, pi], got {theta!r}")


def _gap(theta, lam, k):
    k = np.asarray(k, dtype=int)
    if k.size == 0:
        return np.zeros(k.shape)
    table = gap_table(int(k.max()), lam, theta)
    return np.maximum(table[k], 0.0)


def translation_multiplier(theta, lam):
    """Circle-mean S_theta: k -> P_k^lam(cos theta) / P_k^lam(1).  theta = 0 gives the identity."""
    _check_angle(theta)
    if theta == 0:
        return MultiplierSequence(lambda k: np.ones_like(k), "translation(0)", {"theta": 0.0, "lam": lam})
    return MultiplierSequence(
        lambda k: 1.0 - _gap(theta, lam, k),
        f"translation({theta})",
        {"theta": theta, "lam": lam},
    )


def frac_difference_multiplier(alpha, theta, lam):
    """(I - S_theta)^(alpha/2): k -> (1 - P_k^lam(cos theta)/P_k^lam(1))^(alpha/2)."""
    if not alpha > 0:
        raise ParameterError(f"difference order must be positive, got {alpha!r}")
    _check_angle(theta)
    return MultiplierSequence(
        lambda k: _gap(theta, lam, k) ** (alpha / 2.0),
        f"difference(alpha={alpha},theta={theta})",
        {"alpha": alpha, "theta": theta, "lam": lam},
    )


def gen_binomial(a, i):
    """a (a-1) ... (a-i+1) / i!"""
    return binom(a, i)


def binomial_difference_series(alpha, theta, lam, terms):
    """Partial sum  sum_{i < terms} (-1)^i binom(alpha/2, i) S_theta^i  as a multiplier."""
    if int(terms) != terms or terms < 1:
        raise ParameterError(f"terms must be a positive integer, got {terms!r}")
    s = translation_multiplier(theta, lam)
    coef = np.array([(-1.0) ** i * gen_binomial(alpha / 2.0, i) for i in range(int(terms))])

    def rule(k):
        return np.polynomial.polynomial.polyval(s(k), coef)

    return MultiplierSequence(rule, f"binomial_difference(alpha={alpha},theta={theta},terms={terms})",
                              {"alpha": alpha, "theta": theta, "lam": lam, "terms": int(terms)})


def _log_a(k, alpha):
    return gammaln(k + alpha + 1.0) - gammaln(alpha + 1.0) - gammaln(k + 1.0)


def cesaro_weights(K, alpha):
    """A_{K-k}^alpha / A_K^alpha for k <= K, zero beyond."""
    if not alpha >= 0:
        raise ParameterError(f"Cesaro order must be nonnegative, got {alpha!r}")

    def rule(k):
        inside = k <= K
        kk = np.where(inside, k, 0.0)
        return np.where(inside, np.exp(_log_a(K - kk, alpha) - _log_a(K, alpha)), 0.0)

    return MultiplierSequence(rule, f"cesaro(K={K},alpha={alpha})", {"K": K, "alpha": alpha})


def cesaro_mean(f, K, alpha):
    """sigma_K^alpha(f) = (1/A_K^alpha) sum_{j <= K} A_{K-j}^alpha Y_j f."""
    if int(K) != K or K < 0:
        raise ParameterError(f"K must be a nonnegative integer, got {K!r}")
    return apply(cesaro_weights(int(K), alpha), f)


def from_spec(spec, lam=0.5):
    """Build a multiplier from a config record, e.g.
    ``{"type": "semigroup", "p": [0, 1], "gamma": 1.0, "t": 0.25, "r": 2}``.

    Types: semigroup, abel_poisson, weierstrass (``gamma`` or ``kappa``, ``t``,
    optional Boolean order ``r``), generator (``p``, ``gamma``, ``r``),
    translation (``theta``), difference (``alpha``, ``theta``),
    cesaro (``K``, ``alpha``).
    """
    kind = spec.get("type")
    try:
        if kind in ("semigroup", "abel_poisson", "weierstrass"):
            gamma = spec.get("gamma", spec.get("kappa", 1.0))
            if kind == "semigroup":
                m = semigroup_multiplier(spec["p"], gamma, spec["t"], spec.get("permissive", False))
            elif kind == "abel_poisson":
                m = abel_poisson(gamma, spec["t"])
            else:
                m = weierstrass(gamma, spec["t"], lam)
            r = spec.get("r")
            return m if r is None else boolean(m, r)
        if kind == "generator":
            return generator_multiplier(spec["p"], spec.get("gamma", 1.0), spec.get("r", 1),
                                        spec.get("permissive", False))
        if kind == "translation":
            return translation_multiplier(spec["theta"], lam)
        if kind == "difference":
            return frac_difference_multiplier(spec["alpha"], spec["theta"], lam)
        if kind == "cesaro":
            return cesaro_weights(spec["K"], spec.get("alpha", 0.0))
    except KeyError as exc:
        raise ParameterError(f"multiplier spec {spec!r} lacks field {exc}") from exc
    raise ParameterError(f"unknown multiplier type {kind!r}")
