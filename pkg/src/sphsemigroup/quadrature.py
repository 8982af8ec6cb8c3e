"""Gauss rules for the weight sin(theta)^(2 lam) on [0, pi], zonal norms, sphere areas."""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.special import gammaln

from .errors import ParameterError, QuadratureError

__all__ = [
    "ThetaQuadrature",
    "SphereMeasure",
    "build_theta_quadrature",
    "weight_mass",
    "sphere_area",
    "surface_measure",
    "equator_measure",
    "zonal_lp_norm",
    "sup_on_interval",
]

SUP_GRID = 4096
# above this size only eigenvalues are computed; weights come from the Christoffel sum
_VECTOR_LIMIT = 256


def sphere_area(ambient):
    """Area of the unit sphere in R^ambient; ambient may be any real > 1."""
    return float(np.exp(np.log(2.0) + 0.5 * ambient * np.log(np.pi) - gammaln(0.5 * ambient)))


def surface_measure(d):
    """|S^{d-1}| = 2 pi^{d/2} / Gamma(d/2) for the unit sphere in R^d, d >= 3."""
    if int(d) != d or d < 3:
        raise ParameterError(f"ambient dimension must be an integer >= 3, got {d!r}")
    return sphere_area(d)


def equator_measure(lam):
    """|S^{d-2}| for d = 2 lam + 2: the prefactor of zonal integrals."""
    return sphere_area(2.0 * lam + 1.0)


def weight_mass(lam):
    """int_0^pi sin(theta)^(2 lam) dtheta = sqrt(pi) Gamma(lam + 1/2) / Gamma(lam + 1)."""
    return float(np.exp(0.5 * np.log(np.pi) + gammaln(lam + 0.5) - gammaln(lam + 1.0)))


@dataclass(frozen=True)
class SphereMeasure:
    d: int

    def __post_init__(self):
        surface_measure(self.d)

    @property
    def lam(self):
        return (self.d - 2) / 2.0

    @property
    def area(self):
        return surface_measure(self.d)


@dataclass(frozen=True, eq=False)
class ThetaQuadrature:
    """Gauss rule in theta; integrates g(cos t) sin(t)^(2 lam) exactly for deg g <= degree."""

    lam: float
    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def x(self):
        return np.cos(self.nodes)

    def integrate(self, values):
        """Quadrature of samples taken at the nodes (sums over the last axis)."""
        return np.asarray(values) @ self.weights


def _christoffel_weights(x, beta, lam):
    # w_i = 1 / sum_k phat_k(x_i)^2 over the orthonormal polynomials of the weight
    sb = np.sqrt(beta)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / np.sqrt(weight_mass(lam)))
    total = p * p
    for k in range(x.size - 1):
        p_next = (x * p - (sb[k - 1] if k else 0.0) * p_prev) / sb[k]
        p_prev, p = p, p_next
        total += p * p
    return 1.0 / total


def build_theta_quadrature(lam, n_nodes):
    """Golub-Welsch rule for (1 - x^2)^(lam - 1/2) on [-1, 1], mapped to theta = arccos x."""
    if not lam > 0:
        raise ParameterError(f"lam must be positive, got {lam!r}")
    if int(n_nodes) != n_nodes or n_nodes < 1:
        raise ParameterError(f"n_nodes must be a positive integer, got {n_nodes!r}")
    n = int(n_nodes)
    k = np.arange(1, n, dtype=float)
    # monic Gegenbauer recurrence: x p_k = p_{k+1} + beta_k p_{k-1}
    beta = k * (k + 2.0 * lam - 1.0) / (4.0 * (k + lam) * (k + lam - 1.0))
    try:
        if n <= _VECTOR_LIMIT:
            x, vecs = eigh_tridiagonal(np.zeros(n), np.sqrt(beta))
            w = weight_mass(lam) * vecs[0] ** 2
        else:
            x = eigvalsh_tridiagonal(np.zeros(n), np.sqrt(beta))
            w = _christoffel_weights(x, beta, lam)
    except LinAlgError as exc:
        raise QuadratureError(f"tridiagonal eigensolve failed for lam={lam}, n={n}: {exc}") from exc
    if not (np.all(np.isfinite(x)) and np.all(w > 0)):
        raise QuadratureError(f"degenerate Gauss rule for lam={lam}, n={n}: min weight {w.min()!r}")
    order = np.argsort(-x)  # increasing theta
    theta = np.arccos(np.clip(x[order], -1.0, 1.0))
    return ThetaQuadrature(float(lam), theta, w[order], 2 * n - 1)


def sup_on_interval(func, a, b, n=SUP_GRID, refine=64):
    """max |func| on a uniform grid over [a, b] plus one refinement pass at the maximiser."""
    grid = np.linspace(a, b, n)
    vals = np.abs(np.broadcast_to(np.asarray(func(grid), dtype=float), grid.shape))
    i = int(np.argmax(vals))
    best = vals[i]
    if refine:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
        fine = np.linspace(lo, hi, refine)
        best = max(best, float(np.max(np.abs(func(fine)))))
    return float(best)


def zonal_lp_norm(phi, p, q, d=None):
    """L^p norm of a zonal function: (|S^{d-2}| int_0^pi |phi(cos t)|^p sin(t)^(2 lam) dt)^(1/p).

    ``phi`` is either a callable of x = cos(theta) or an array of samples at the
    nodes of ``q``.  For p = inf the sup is taken over a dense uniform theta
    grid (only the node samples are available when ``phi`` is an array).
    """
    lam = q.lam
    if d is not None and abs((d - 2) / 2.0 - lam) > 1e-12:
        raise ParameterError(f"dimension d={d} does not match lam={lam}")
    if not (p >= 1):
        raise ParameterError(f"norm exponent must be >= 1, got {p!r}")
    if np.isinf(p):
        if callable(phi):
            return sup_on_interval(lambda th: phi(np.cos(th)), 0.0, np.pi)
        return float(np.max(np.abs(phi)))
    vals = phi(q.x) if callable(phi) else phi
    vals = np.broadcast_to(np.asarray(vals, dtype=float), q.nodes.shape)
    integral = equator_measure(lam) * q.integrate(np.abs(vals) ** p)
    return float(integral ** (1.0 / p))
