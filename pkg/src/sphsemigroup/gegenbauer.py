"""Ultraspherical (Gegenbauer) polynomials P_k^nu and their normalisation constants.

Everything is evaluated through the three-term recurrence

    k P_k = 2 (k + nu - 1) x P_{k-1} - (k + 2 nu - 2) P_{k-2},

which is forward-stable on [-1, 1] for nu > 0. Gamma ratios go through
``gammaln`` so that degrees beyond ~170 do not overflow.
"""

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError

__all__ = [
    "eval_gegenbauer",
    "gegenbauer_table",
    "gegenbauer_at_one",
    "log_gegenbauer_at_one",
    "norm_constant",
    "ratio_table",
    "gap_table",
]


def _check(k, nu):
    if int(k) != k or k < 0:
        raise ParameterError(f"degree must be a nonnegative integer, got {k!r}")
    if not nu > 0:
        raise ParameterError(f"Gegenbauer parameter must be positive, got {nu!r}")


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-14):
        raise ParameterError("argument must lie in [-1, 1]")
    return x


def gegenbauer_table(n_max, nu, x):
    """Return P_0^nu(x), ..., P_{n_max}^nu(x) stacked along axis 0."""
    _check(n_max, nu)
    x = _check_x(x)
    out = np.empty((int(n_max) + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 * nu * x
    for k in range(2, int(n_max) + 1):
        out[k] = (2.0 * (k + nu - 1.0) * x * out[k - 1] - (k + 2.0 * nu - 2.0) * out[k - 2]) / k
    return out


def eval_gegenbauer(k, nu, x):
    """P_k^nu(x) by forward recurrence; scalar in, float out."""
    _check(k, nu)
    x = _check_x(x)
    p_prev, p = np.ones_like(x), 2.0 * nu * x
    if k == 0:
        return float(p_prev) if p_prev.ndim == 0 else p_prev
    for j in range(2, int(k) + 1):
        p_prev, p = p, (2.0 * (j + nu - 1.0) * x * p - (j + 2.0 * nu - 2.0) * p_prev) / j
    return float(p) if p.ndim == 0 else p


def log_gegenbauer_at_one(k, nu):
    k = np.asarray(k, dtype=float)
    return gammaln(k + 2.0 * nu) - gammaln(2.0 * nu) - gammaln(k + 1.0)


def gegenbauer_at_one(k, nu):
    """P_k^nu(1) = Gamma(k + 2 nu) / (Gamma(2 nu) k!)."""
    if np.ndim(k) == 0:
        _check(k, nu)
        return float(np.exp(log_gegenbauer_at_one(k, nu)))
    if not nu > 0:
        raise ParameterError(f"Gegenbauer parameter must be positive, got {nu!r}")
    return np.exp(log_gegenbauer_at_one(k, nu))


def norm_constant(k, nu):
    """c(k, nu) with  int_0^pi P_k^nu(cos t)^2 sin(t)^(2 nu) dt = 1 / c(k, nu)."""
    if np.ndim(k) == 0:
        _check(k, nu)
    elif not nu > 0:
        raise ParameterError(f"Gegenbauer parameter must be positive, got {nu!r}")
    k = np.asarray(k, dtype=float)
    log_c = (
        (2.0 * nu - 1.0) * np.log(2.0)
        + 2.0 * gammaln(nu)
        + np.log(k + nu)
        + gammaln(k + 1.0)
        - np.log(np.pi)
        - gammaln(k + 2.0 * nu)
    )
    c = np.exp(log_c)
    return float(c) if c.ndim == 0 else c


def _ratio_coefficients(n_max, nu):
    # R_k = a_k x R_{k-1} - b_k R_{k-2} for R_k = P_k(x) / P_k(1); a_k - b_k = 1.
    k = np.arange(int(n_max) + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = 2.0 * (k + nu - 1.0) / (k + 2.0 * nu - 1.0)
        b = (k - 1.0) / (k + 2.0 * nu - 1.0)
    return a, b


def ratio_table(n_max, nu, theta):
    """P_k^nu(cos theta) / P_k^nu(1) for k = 0..n_max (rows)."""
    return 1.0 - gap_table(n_max, nu, theta)


def gap_table(n_max, nu, theta):
    """1 - P_k^nu(cos theta) / P_k^nu(1) for k = 0..n_max, without cancellation.

    The gap D_k obeys D_k = a_k u + a_k x D_{k-1} - b_k D_{k-2} with
    u = 1 - cos theta = 2 sin^2(theta/2), so tiny steps theta keep full
    relative accuracy (cos theta rounds to 1 long before D_k underflows).
    """
    _check(n_max, nu)
    theta = np.asarray(theta, dtype=float)
    x = np.cos(theta)
    u = 2.0 * np.sin(0.5 * theta) ** 2
    a, b = _ratio_coefficients(n_max, nu)
    out = np.empty((int(n_max) + 1,) + theta.shape)
    out[0] = 0.0
    if n_max >= 1:
        out[1] = u
    for k in range(2, int(n_max) + 1):
        out[k] = a[k] * u + a[k] * x * out[k - 1] - b[k] * out[k - 2]
    return out
