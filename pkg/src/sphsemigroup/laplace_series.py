"""Laplace-series coefficients: zonal expansions for any lam > 0, general functions on S^2.

Zonal coefficients b_k refer to the basis P_k^lam(cos theta) scaled to unit
L^2 norm on S^{d-1}, d = 2 lam + 2.  On S^2 the coefficients f_{k,m} refer to
real orthonormal spherical harmonics; both bases are orthonormal, so the
Laplace projection Y_k f is just the degree-k block and Parseval is the
plain Euclidean norm of the coefficient array.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import ParameterError, ResolutionError
from .gegenbauer import gegenbauer_table, norm_constant
from .quadrature import build_theta_quadrature, equator_measure, sup_on_interval

__all__ = [
    "LaplaceCoefficients",
    "SphereGridS2",
    "sphere_grid",
    "zonal_basis",
    "real_harmonic_table",
    "analyze_zonal",
    "synth_zonal",
    "analyze_s2",
    "analyze_s2_values",
    "synth_s2",
    "synth_s2_points",
    "project_degree",
    "parseval_l2_norm",
    "lp_norm",
    "zonal_to_s2",
    "random_band_limited",
    "to_csv",
    "from_csv",
]

ZONAL = "zonal"
S2 = "s2"


@dataclass(frozen=True, eq=False)
class LaplaceCoefficients:
    """Finite Laplace series.

    ``coeffs`` has shape (N+1,) for zonal series and (N+1, 2N+1) for S^2
    series, where column ``m + N`` holds order m (entries with |m| > k are 0).
    """

    lam: float
    kind: str
    coeffs: np.ndarray

    def __post_init__(self):
        if self.kind not in (ZONAL, S2):
            raise ParameterError(f"unknown coefficient kind {self.kind!r}")
        if not self.lam > 0:
            raise ParameterError(f"lam must be positive, got {self.lam!r}")
        c = np.array(self.coeffs, dtype=float)
        if self.kind == S2:
            if self.lam != 0.5:
                raise ParameterError("general (non-zonal) series are supported on S^2 only")
            n = c.shape[0] - 1
            if c.ndim != 2 or c.shape[1] != 2 * n + 1:
                raise ParameterError(f"S^2 coefficients need shape (N+1, 2N+1), got {c.shape}")
            c[_outside_mask(n)] = 0.0
        elif c.ndim != 1:
            raise ParameterError(f"zonal coefficients must be 1-D, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zonal(cls, b, lam=0.5):
        return cls(float(lam), ZONAL, np.asarray(b, dtype=float))

    @classmethod
    def s2(cls, f):
        return cls(0.5, S2, np.asarray(f, dtype=float))

    @classmethod
    def zeros(cls, n, kind=ZONAL, lam=0.5):
        shape = (n + 1,) if kind == ZONAL else (n + 1, 2 * n + 1)
        return cls(float(lam), kind, np.zeros(shape))

    @property
    def N(self):
        return self.coeffs.shape[0] - 1

    def degree_norms(self):
        """||Y_k f||_2 for k = 0..N."""
        if self.kind == ZONAL:
            return np.abs(self.coeffs)
        return np.sqrt(np.sum(self.coeffs**2, axis=1))

    def scale_degrees(self, factors):
        """Multiply every degree-k block by factors[k]."""
        factors = np.asarray(factors, dtype=float)
        if factors.shape != (self.N + 1,):
            raise ParameterError(f"need {self.N + 1} degree factors, got shape {factors.shape}")
        scaled = self.coeffs * (factors if self.kind == ZONAL else factors[:, None])
        return LaplaceCoefficients(self.lam, self.kind, scaled)

    def like(self, coeffs):
        return LaplaceCoefficients(self.lam, self.kind, coeffs)

    def _compatible(self, other):
        if (self.kind, self.lam, self.coeffs.shape) != (other.kind, other.lam, other.coeffs.shape):
            raise ParameterError("coefficient sets differ in kind, lam or band limit")

    def __add__(self, other):
        self._compatible(other)
        return self.like(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._compatible(other)
        return self.like(self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return self.like(self.coeffs * float(scalar))

    __rmul__ = __mul__


def _outside_mask(n):
    k = np.arange(n + 1)[:, None]
    m = np.arange(-n, n + 1)[None, :]
    return np.abs(m) > k


# ---------------------------------------------------------------- zonal


def zonal_basis(n, lam, x):
    """Orthonormal zonal basis e_k(x) = P_k^lam(x) sqrt(c(k, lam) / |S^{d-2}|), k = 0..n."""
    scale = np.sqrt(norm_constant(np.arange(n + 1), lam) / equator_measure(lam))
    table = gegenbauer_table(n, lam, x)
    return table * scale.reshape((-1,) + (1,) * (table.ndim - 1))


def analyze_zonal(phi, lam, n, q=None):
    """Coefficients of phi(cos theta) against the orthonormal zonal basis up to degree n."""
    if q is None:
        q = build_theta_quadrature(lam, n + 1)
    elif q.lam != lam:
        raise ParameterError(f"quadrature built for lam={q.lam}, asked for lam={lam}")
    x = q.x
    vals = np.broadcast_to(np.asarray(phi(x), dtype=float), x.shape)
    basis = zonal_basis(n, lam, x)
    b = equator_measure(lam) * (basis * vals) @ q.weights
    return LaplaceCoefficients.zonal(b, lam)


def synth_zonal(c, theta):
    """sum_k b_k e_k(cos theta) at the given angle(s)."""
    if c.kind != ZONAL:
        raise ParameterError("synth_zonal needs zonal coefficients")
    theta = np.asarray(theta, dtype=float)
    basis = zonal_basis(c.N, c.lam, np.cos(theta))
    return np.tensordot(c.coeffs, basis, axes=(0, 0))


# ---------------------------------------------------------------- S^2


@dataclass(frozen=True, eq=False)
class SphereGridS2:
    """Gauss-Legendre colatitudes times equispaced longitudes."""

    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray  # shape (n_theta, n_phi), sums to 4 pi

    @property
    def degree(self):
        """Largest total degree integrated exactly."""
        return min(2 * self.theta.size - 1, self.phi.size - 1)

    @property
    def points(self):
        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        st = np.sin(th)
        return st * np.cos(ph), st * np.sin(ph), np.cos(th)

    def integrate(self, values):
        return float(np.sum(np.asarray(values) * self.weights))


def sphere_grid(n, n_theta=None, n_phi=None):
    """Grid exact for products of harmonics of degree <= n (degree 2n)."""
    n_theta = n + 1 if n_theta is None else n_theta
    n_phi = 2 * n + 2 if n_phi is None else n_phi
    z, w = roots_legendre(n_theta)
    order = np.argsort(-z)
    theta = np.arccos(z[order])
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    weights = np.outer(w[order], np.full(n_phi, 2.0 * np.pi / n_phi))
    return SphereGridS2(theta, phi, weights)


def real_harmonic_table(n, theta):
    """Normalised associated Legendre factors.

    Returns L with L[k, m] (m >= 0) such that the real orthonormal harmonics are
    L[k,0], sqrt2 L[k,m] cos(m phi) and sqrt2 L[k,m] sin(m phi).
    """
    theta = np.asarray(theta, dtype=float)
    x, s = np.cos(theta), np.sin(theta)
    out = np.zeros((n + 1, n + 1) + theta.shape)
    out[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, n + 1):
        out[m, m] = np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * out[m - 1, m - 1]
    for m in range(0, n):
        out[m + 1, m] = np.sqrt(2.0 * m + 3.0) * x * out[m, m]
        for k in range(m + 2, n + 1):
            a = np.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            a_prev = np.sqrt((4.0 * (k - 1) ** 2 - 1.0) / ((k - 1) ** 2 - m * m))
            out[k, m] = a * (x * out[k - 1, m] - out[k - 2, m] / a_prev)
    return out


def _fourier_tables(n, phi):
    m = np.arange(n + 1)[:, None]
    return np.cos(m * phi[None, :]), np.sin(m * phi[None, :])


def analyze_s2_values(values, n, grid):
    """Coefficients from samples on ``grid`` (shape (n_theta, n_phi))."""
    if grid.degree < 2 * n:
        raise ResolutionError(f"grid integrates degree {grid.degree} exactly, need {2 * n}")
    values = np.asarray(values, dtype=float)
    leg = real_harmonic_table(n, grid.theta)  # (k, m, i)
    cos_t, sin_t = _fourier_tables(n, grid.phi)  # (m, j)
    wv = values * grid.weights
    a = wv @ cos_t.T  # (i, m)
    b = wv @ sin_t.T
    out = np.zeros((n + 1, 2 * n + 1))
    cos_part = np.einsum("kmi,im->km", leg, a)
    sin_part = np.einsum("kmi,im->km", leg, b)
    out[:, n] = cos_part[:, 0]
    root2 = np.sqrt(2.0)
    out[:, n + 1 :] = root2 * cos_part[:, 1:]
    out[:, n - 1 :: -1][:, : n] = root2 * sin_part[:, 1:]
    return LaplaceCoefficients.s2(out)


def analyze_s2(f, n, grid=None):
    """Real orthonormal harmonic coefficients of f(x, y, z) up to degree n."""
    grid = sphere_grid(n) if grid is None else grid
    x, y, z = grid.points
    values = np.broadcast_to(np.asarray(f(x, y, z), dtype=float), x.shape)
    return analyze_s2_values(values, n, grid)


def _synth(c, theta, phi, outer):
    n = c.N
    leg = real_harmonic_table(n, theta)
    root2 = np.sqrt(2.0)
    cos_c = c.coeffs[:, n:].copy()
    cos_c[:, 1:] *= root2
    sin_c = np.zeros_like(cos_c)
    sin_c[:, 1:] = root2 * c.coeffs[:, n - 1 :: -1][:, :n]
    amp_c = np.einsum("km,km...->m...", cos_c, leg)
    amp_s = np.einsum("km,km...->m...", sin_c, leg)
    m = np.arange(n + 1)
    if outer:
        cm, sm = np.cos(np.outer(m, phi)), np.sin(np.outer(m, phi))
        return amp_c.T @ cm + amp_s.T @ sm
    ang = m.reshape((-1,) + (1,) * np.ndim(phi)) * phi
    return np.sum(amp_c * np.cos(ang) + amp_s * np.sin(ang), axis=0)


def synth_s2(c, grid):
    """Values of an S^2 series on a grid, shape (n_theta, n_phi)."""
    if c.kind != S2:
        raise ParameterError("synth_s2 needs S^2 coefficients")
    return _synth(c, grid.theta, grid.phi, outer=True)


def synth_s2_points(c, theta, phi):
    """Values of an S^2 series at scattered points (theta, phi broadcast together)."""
    if c.kind != S2:
        raise ParameterError("synth_s2_points needs S^2 coefficients")
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    return _synth(c, theta, phi, outer=False)


def zonal_to_s2(c):
    """Embed a zonal series on S^2 (pole = north pole) as an S^2 series."""
    if c.kind != ZONAL or c.lam != 0.5:
        raise ParameterError("only zonal series with lam = 1/2 live on S^2")
    out = np.zeros((c.N + 1, 2 * c.N + 1))
    out[:, c.N] = c.coeffs
    return LaplaceCoefficients.s2(out)


# ---------------------------------------------------------------- projections and norms


def project_degree(c, k):
    """Keep only the degree-k block; k beyond the band limit gives zero."""
    if int(k) != k or k < 0:
        raise ParameterError(f"degree must be a nonnegative integer, got {k!r}")
    factors = np.zeros(c.N + 1)
    if k <= c.N:
        factors[int(k)] = 1.0
    return c.scale_degrees(factors)


def parseval_l2_norm(c):
    return float(np.sqrt(np.sum(c.coeffs**2)))


def lp_norm(c, p, resolution=None):
    """L^p(S^{d-1}) norm of a finite series, p in [1, inf].

    p = 2 is exact (Parseval).  Other p use quadrature of |f|^p on a grid
    ``resolution`` times finer than the band limit (default 4), and p = inf
    takes the maximum over that grid (uniform theta grid for zonal series).
    """
    if not p >= 1:
        raise ParameterError(f"norm exponent must be >= 1, got {p!r}")
    if p == 2:
        return parseval_l2_norm(c)
    r = 4 if resolution is None else resolution
    if c.kind == ZONAL:
        if np.isinf(p):
            return sup_on_interval(lambda th: synth_zonal(c, th), 0.0, np.pi)
        q = build_theta_quadrature(c.lam, r * (c.N + 1) + 16)
        vals = synth_zonal(c, q.nodes)
        return float((equator_measure(c.lam) * q.integrate(np.abs(vals) ** p)) ** (1.0 / p))
    grid = sphere_grid(r * (c.N + 1) + 8)
    vals = synth_s2(c, grid)
    if np.isinf(p):
        return float(np.max(np.abs(vals)))
    return float(grid.integrate(np.abs(vals) ** p) ** (1.0 / p))


def random_band_limited(n, rng, kind=ZONAL, lam=0.5, decay=0.0):
    """Gaussian coefficients with per-degree scale (1 + k)^(-decay)."""
    scale = (1.0 + np.arange(n + 1)) ** (-float(decay))
    if kind == ZONAL:
        return LaplaceCoefficients.zonal(rng.standard_normal(n + 1) * scale, lam)
    return LaplaceCoefficients.s2(rng.standard_normal((n + 1, 2 * n + 1)) * scale[:, None])


# ---------------------------------------------------------------- CSV


def to_csv(c):
    """CSV text: first row ``kind,lambda,N`` (values), then ``k,value`` or ``k,m,value`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([c.kind, repr(float(c.lam)), c.N])
    if c.kind == ZONAL:
        for k, v in enumerate(c.coeffs):
            w.writerow([k, repr(float(v))])
    else:
        for k in range(c.N + 1):
            for m in range(-k, k + 1):
                w.writerow([k, m, repr(float(c.coeffs[k, m + c.N]))])
    return buf.getvalue()


def from_csv(text):
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ParameterError("empty coefficient CSV")
    kind, lam, n = rows[0][0], float(rows[0][1]), int(rows[0][2])
    if kind == ZONAL:
        b = np.zeros(n + 1)
        for k, v in rows[1:]:
            b[int(k)] = float(v)
        return LaplaceCoefficients.zonal(b, lam)
    if kind != S2:
        raise ParameterError(f"unknown coefficient kind {kind!r}")
    f = np.zeros((n + 1, 2 * n + 1))
    for k, m, v in rows[1:]:
        f[int(k), int(m) + n] = float(v)
    return LaplaceCoefficients.s2(f)
