"""Moduli of smoothness, K-functionals and equivalence ratios.

L^2 quantities are exact in coefficient space.  For other norms the
modulus is evaluated on a grid and K-functionals are only bounded from
above through explicit realisations.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from .errors import DataError, ParameterError
from .gegenbauer import gap_table
from .laplace_series import lp_norm
from .multipliers import MultiplierSequence, RegularPolynomial

__all__ = [
    "ModulusRequest",
    "KFunctionalRequest",
    "RatioBand",
    "modulus",
    "modulus_curve",
    "difference_norm",
    "kfunctional_l2_exact",
    "kfunctional_l2_curve",
    "kfunctional_objective",
    "kfunctional_realization_upper",
    "equivalence_ratio",
    "loglog_slope",
]

THETA_POINTS = 256
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ModulusRequest:
    f: object  # LaplaceCoefficients
    alpha: float
    t: float
    norm: float = 2.0  # exponent p in [1, inf]; 2 is exact
    points: int = THETA_POINTS

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"modulus order must be positive, got {self.alpha!r}")
        if not 0 < self.t <= np.pi:
            raise ParameterError(f"modulus scale must lie in (0, pi], got {self.t!r}")


@dataclass(frozen=True)
class KFunctionalRequest:
    f: object
    a: object  # MultiplierSequence or array of a(k), k = 0..N
    t: float

    def __post_init__(self):
        if not self.t >= 0:
            raise ParameterError(f"K-functional scale must be nonnegative, got {self.t!r}")


def difference_norm(f, alpha, theta, norm=2.0):
    """||(I - S_theta)^(alpha/2) f|| for one or many step angles ``theta``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    gaps = np.maximum(gap_table(f.N, f.lam, theta), 0.0) ** (alpha / 2.0)  # (k, theta)
    if norm == 2:
        dn = f.degree_norms()
        return np.sqrt(np.einsum("kt,k->t", gaps**2, dn**2))
    return np.array([lp_norm(f.scale_degrees(gaps[:, i]), norm) for i in range(theta.size)])


def _theta_grid(t, points):
    geo = t * np.geomspace(1e-6, 1.0, points)
    uni = np.linspace(t / points, t, points)
    return np.unique(np.concatenate([geo, uni]))


def _sup(f, alpha, t, norm, points):
    grid = _theta_grid(t, points)
    vals = difference_norm(f, alpha, grid, norm)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        fine = np.linspace(lo, hi, 33 if norm == 2 else 9)
        best = max(best, float(np.max(difference_norm(f, alpha, fine, norm))))
    return best


def modulus(req, rtol=1e-6, max_points=1 << 14):
    """omega^alpha(f, t) = sup_{0 < theta <= t} ||Delta_theta^alpha f||.

    The sup runs over a geometric-plus-uniform theta grid with one refinement
    pass around the maximiser; the grid is doubled until the sup moves by
    less than ``rtol`` (relative).
    """
    f, alpha, t = req.f, req.alpha, req.t
    points = req.points
    best = _sup(f, alpha, t, req.norm, points)
    while points < max_points:
        points *= 2
        nxt = _sup(f, alpha, t, req.norm, points)
        if abs(nxt - best) <= rtol * max(abs(nxt), 1e-300):
            return max(best, nxt)
        best = max(best, nxt)
    return best


def modulus_curve(f, alpha, ts, rtol=1e-6, density=64, max_density=1 << 12):
    """L^2 modulus omega^alpha(f, t) for every t in ``ts`` (ascending) from one shared theta grid.

    The grid holds every t, a geometric part reaching six decades below
    min(ts) and a uniform part on [0, max(ts)]; its density is doubled until
    the whole curve moves by less than ``rtol`` (relative).
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(np.diff(ts) <= 0) or ts[0] <= 0 or ts[-1] > np.pi:
        raise ParameterError("modulus scales must be ascending and lie in (0, pi]")
    if not alpha > 0:
        raise ParameterError(f"modulus order must be positive, got {alpha!r}")
    lo, hi = ts[0] * 1e-6, ts[-1]
    decades = np.log10(hi / lo)

    def curve(dens):
        theta = np.unique(np.concatenate([
            np.geomspace(lo, hi, int(np.ceil(decades * dens)) + 1),
            np.linspace(0.0, hi, 16 * dens + 1)[1:],
            ts,
        ]))
        vals = difference_norm(f, alpha, theta)
        # refine between the neighbours of every interior local maximum
        peak = np.flatnonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:])) + 1
        if peak.size:
            fine = np.linspace(theta[peak - 1], theta[peak + 1], 33).ravel()
            theta = np.concatenate([theta, fine])
            vals = np.concatenate([vals, difference_norm(f, alpha, fine)])
            order = np.argsort(theta, kind="stable")
            theta, vals = theta[order], vals[order]
        running = np.maximum.accumulate(vals)
        return running[np.searchsorted(theta, ts, side="right") - 1]

    cur = curve(density)
    while density < max_density:
        density *= 2
        nxt = curve(density)
        if np.all(np.abs(nxt - cur) <= rtol * np.maximum(np.abs(nxt), 1e-300)):
            return np.maximum(cur, nxt)
        cur = np.maximum(cur, nxt)
    return cur


def _multiplier_values(a, n):
    if isinstance(a, MultiplierSequence):
        return a.values(n)
    a = np.asarray(a, dtype=float)
    if a.shape != (n + 1,):
        raise ParameterError(f"need {n + 1} multiplier values, got shape {a.shape}")
    return a


def kfunctional_objective(degree_norms, a, t, s):
    """||f - g|| + t ||A g|| for g = s * f degreewise (s may be stacked along leading axes)."""
    s = np.asarray(s, dtype=float)
    err = np.sqrt(np.sum(((1.0 - s) * degree_norms) ** 2, axis=-1))
    smooth = np.sqrt(np.sum((s * a * degree_norms) ** 2, axis=-1))
    return err + t * smooth


def kfunctional_l2_exact(req, tol=1e-10):
    """Exact L^2 K-functional inf_g ||f - g||_2 + t ||A g||_2 for a finite series f.

    The minimiser lies on the ridge path g_k = f_k / (1 + mu a(k)^2): a log-mu
    scan brackets the best point, golden-section refines it to ``tol``, and the
    endpoints g = f (mu = 0), g = P_ker(A) f (mu -> inf) and g = 0 are compared.
    Returns (value, mu).
    """
    a = _multiplier_values(req.a, req.f.N)
    values, mus = _kfunctional_batch(req.f.degree_norms(), a, np.array([req.t], dtype=float), tol)
    return float(values[0]), float(mus[0])


def kfunctional_l2_curve(f, a, ts, tol=1e-10):
    """kfunctional_l2_exact for every scale in ``ts`` at once; returns (values, mus)."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0):
        raise ParameterError("K-functional scales must be nonnegative")
    return _kfunctional_batch(f.degree_norms(), _multiplier_values(a, f.N), ts, tol)


def _kfunctional_batch(dn, a, ts, tol):
    a2 = a * a
    ones = np.ones_like(dn)
    # endpoint candidates: g = f, g = kernel part of f, g = 0
    ends = np.stack([
        kfunctional_objective(dn, a, ts, ones),
        kfunctional_objective(dn, a, ts, (a2 == 0).astype(float)),
        kfunctional_objective(dn, a, ts, 0.0 * ones),
    ])
    best = ends.min(axis=0)
    mus = np.where(ends.argmin(axis=0) == 0, 0.0, np.inf)
    active = a2[(a2 > 0) & (dn > 0)]
    live = ts > 0
    if not active.size or not np.any(live):
        return best, mus
    tl = ts[live]

    def obj(log_mu):
        s = 1.0 / (1.0 + np.exp(log_mu)[:, None] * a2)
        return kfunctional_objective(dn, a, tl, s)

    grid = np.linspace(np.log(1e-8 / active.max()), np.log(1e8 / active.min()), 801)
    scan = kfunctional_objective(dn, a, tl[:, None], 1.0 / (1.0 + np.exp(grid)[:, None] * a2))
    i = scan.argmin(axis=1)
    left, right = grid[np.maximum(i - 1, 0)], grid[np.minimum(i + 1, grid.size - 1)]
    x1 = right - GOLDEN * (right - left)
    x2 = left + GOLDEN * (right - left)
    f1, f2 = obj(x1), obj(x2)
    while np.any(right - left > tol * np.maximum(1.0, np.abs(left))):
        move_left = f1 <= f2
        right = np.where(move_left, x2, right)
        left = np.where(move_left, left, x1)
        nx1 = np.where(move_left, right - GOLDEN * (right - left), x2)
        nx2 = np.where(move_left, x1, left + GOLDEN * (right - left))
        nf1 = np.where(move_left, obj(nx1), f2)
        nf2 = np.where(move_left, f1, obj(nx2))
        x1, x2, f1, f2 = nx1, nx2, nf1, nf2
    cand = np.stack([f1, f2, scan[np.arange(i.size), i]])
    where = np.stack([x1, x2, grid[i]])
    j = cand.argmin(axis=0)
    inner = cand[j, np.arange(j.size)]
    inner_mu = np.exp(where[j, np.arange(j.size)])
    sub_best, sub_mu = best[live], mus[live]
    better = inner < sub_best
    best[live] = np.where(better, inner, sub_best)
    mus[live] = np.where(better, inner_mu, sub_mu)
    return best, mus


def kfunctional_realization_upper(f, p, gamma, r, t, bernstein_constant=np.exp(-1.0)):
    """Upper bound for K_{A^r}(f, t^r) from the explicit realisation

        g = -sum_{k=1}^r (-1)^k binom(r, k) T(k m t) f,   m = r (N + 2),

    where N is the Bernstein constant of the semigroup (1/e in L^2).
    Returns ||f - g||_2 + t^r ||A^r g||_2.
    """
    p = p if isinstance(p, RegularPolynomial) else RegularPolynomial(tuple(p))
    r = int(r)
    if r < 1:
        raise ParameterError(f"r must be a positive integer, got {r!r}")
    dn = f.degree_norms()
    k = np.arange(f.N + 1, dtype=float)
    expo = p(k) ** gamma
    step = r * (bernstein_constant + 2.0) * t
    g = np.zeros_like(dn)
    for i in range(1, r + 1):
        g -= (-1.0) ** i * binom(r, i) * np.exp(-i * step * expo)
    err = np.sqrt(np.sum(((1.0 - g) * dn) ** 2))
    smooth = np.sqrt(np.sum((expo ** r * g * dn) ** 2))
    return float(err + t ** r * smooth)


@dataclass(frozen=True)
class RatioBand:
    max_ratio: float
    min_ratio: float
    slope_lhs: float
    slope_rhs: float
    skipped: int  # pairs where both sides vanish

    @property
    def width(self):
        return self.max_ratio / self.min_ratio


def loglog_slope(t, values):
    """Least-squares slope of log(values) against log(t); returns (slope, rms residual)."""
    lt, lv = np.log(np.asarray(t, float)), np.log(np.asarray(values, float))
    design = np.vstack([lt, np.ones_like(lt)]).T
    coef, *_ = np.linalg.lstsq(design, lv, rcond=None)
    resid = lv - design @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


def equivalence_ratio(lhs, rhs, t=None):
    """Ratio band lhs/rhs plus log-log slopes of both sides against t."""
    lhs, rhs = np.asarray(lhs, dtype=float), np.asarray(rhs, dtype=float)
    if lhs.shape != rhs.shape:
        raise DataError(f"sequence shapes differ: {lhs.shape} vs {rhs.shape}")
    if np.any(lhs < 0) or np.any(rhs < 0):
        raise DataError("equivalence ratios need nonnegative entries")
    both_zero = (lhs == 0) & (rhs == 0)
    if np.any((lhs == 0) != (rhs == 0)):
        raise DataError("one side vanishes where the other does not")
    keep = ~both_zero
    if not np.any(keep):
        raise DataError("all pairs vanish")
    ratio = lhs[keep] / rhs[keep]
    slope_l = slope_r = float("nan")
    if t is not None and np.count_nonzero(keep) >= 2:
        tt = np.asarray(t, dtype=float)[keep]
        slope_l, _ = loglog_slope(tt, lhs[keep])
        slope_r, _ = loglog_slope(tt, rhs[keep])
    return RatioBand(float(ratio.max()), float(ratio.min()), slope_l, slope_r, int(both_zero.sum()))
