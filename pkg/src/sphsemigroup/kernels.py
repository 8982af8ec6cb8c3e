"""Zonal kernels of multiplier operators: synthesis, positivity, normalisation, convolution.

The kernel of a multiplier m on S^{d-1} is

    phi(cos theta) = |S^{d-1}|^{-1} sum_k m(k) (k + lam)/lam P_k^lam(cos theta),

truncated at a degree N chosen so that the analytic tail bound (from
|P_k^lam| <= P_k^lam(1)) falls below ``tol`` times the kernel scale.
"""

import io
from dataclasses import dataclass

import numpy as np
from .errors import ParameterError, ResolutionError, TruncationError
from .gegenbauer import _ratio_coefficients, log_gegenbauer_at_one, norm_constant
from .laplace_series import LaplaceCoefficients, analyze_s2_values, sphere_grid, synth_s2, zonal_to_s2
from .quadrature import build_theta_quadrature, equator_measure, sphere_area

__all__ = [
    "ZonalKernel",
    "PositivityReport",
    "YoungReport",
    "synthesize_kernel",
    "kernel_series_terms",
    "closed_form_poisson",
    "positivity_report",
    "l1_normalization",
    "kernel_l1_norm",
    "funk_hecke_factor",
    "convolve_s2",
    "young_check",
    "kernel_csv",
]

DENSE_GRID = 8192
TAIL_TOL = 1e-12
N_CAP = 1 << 20
NORM_DEGREE = 1 << 13
_BLOCK = 1 << 16


def _dims(lam, d):
    if not lam > 0:
        raise ParameterError(f"lam must be positive, got {lam!r}")
    if d is None:
        d = 2.0 * lam + 2.0
    elif abs((d - 2) / 2.0 - lam) > 1e-12:
        raise ParameterError(f"dimension d={d} does not match lam={lam}")
    return d


def kernel_series_terms(m, lam, d, k):
    """|S^{d-1}|^{-1} m(k) (k+lam)/lam P_k^lam(1): the coefficient of P_k/P_k(1) in the kernel."""
    k = np.asarray(k, dtype=float)
    log_w = np.log((k + lam) / lam) + log_gegenbauer_at_one(k, lam) - np.log(sphere_area(d))
    return m(k) * np.exp(log_w)


def _tail_profile(m, lam, d, n_cap):
    """Absolute kernel terms for k = 0..K, with K large enough that the rest is negligible."""
    chunks = []
    total = 0.0
    start = 0
    limit = 64 * n_cap
    while start <= limit:
        k = np.arange(start, start + _BLOCK)
        a = np.abs(kernel_series_terms(m, lam, d, k))
        if not np.all(np.isfinite(a)):
            raise TruncationError(f"kernel terms of {m.tag} are not finite")
        chunks.append(a)
        block = float(a.sum())
        total += block
        start += _BLOCK
        if block <= 1e-17 * total or total == 0.0:
            return np.concatenate(chunks)
        # terms must at least be decaying across the block for the series to converge
        if start > n_cap and a[-1] >= a[0]:
            break
    raise TruncationError(f"kernel series of {m.tag} does not converge within {limit} terms")


@dataclass(frozen=True, eq=False)
class ZonalKernel:
    """Truncated kernel series plus samples on a theta grid."""

    lam: float
    d: float
    N: int
    coefficients: np.ndarray  # c_k multiplying P_k(x)/P_k(1), k = 0..N
    theta: np.ndarray
    values: np.ndarray
    tail_bound: float
    tag: str
    m0: float

    def __call__(self, x):
        """Evaluate the truncated series at x = cos(theta)."""
        return _ratio_series(self.coefficients, self.lam, np.asarray(x, dtype=float))

    @property
    def scale(self):
        return float(np.sum(np.abs(self.coefficients)))


def _ratio_series(c, lam, x):
    """sum_k c_k R_k(x) with R_k = P_k^lam(x) / P_k^lam(1), forward recurrence."""
    n = c.size - 1
    a, b = _ratio_coefficients(n, lam)
    r_prev = np.ones_like(x)
    total = c[0] * r_prev
    if n == 0:
        return total
    r = x.copy()
    total = total + c[1] * r
    tmp = np.empty_like(x)
    for k in range(2, n + 1):
        np.multiply(x, r, out=tmp)
        tmp *= a[k]
        tmp -= b[k] * r_prev
        r_prev, r, tmp = r, tmp, r_prev
        if c[k] != 0.0:
            total += c[k] * r
    return total


def synthesize_kernel(m, lam=0.5, d=None, N=64, theta=None, tol=TAIL_TOL, n_cap=N_CAP):
    """Kernel samples of multiplier ``m`` on ``theta`` (default: 8192 uniform points on [0, pi]).

    N is raised to the smallest degree whose tail bound is below ``tol`` times
    the kernel scale; TruncationError if that degree exceeds ``n_cap``.
    """
    d = _dims(lam, d)
    terms = _tail_profile(m, lam, d, n_cap)
    scale = float(terms.sum())
    tails = np.concatenate([np.cumsum(terms[::-1])[::-1][1:], [0.0]])  # tails[n] = sum_{k>n}
    ok = np.nonzero(tails <= tol * scale)[0]
    n_need = int(ok[0]) if ok.size else terms.size
    n = max(int(N), n_need)
    if n > n_cap:
        raise TruncationError(
            f"{m.tag}: tail bound below {tol:g} x scale needs degree {n_need} > cap {n_cap}"
        )
    tail = float(tails[n]) if n < tails.size else 0.0
    coef = kernel_series_terms(m, lam, d, np.arange(n + 1))
    if theta is None:
        theta = np.linspace(0.0, np.pi, DENSE_GRID)
    theta = np.asarray(theta, dtype=float)
    values = _ratio_series(coef, lam, np.cos(theta))
    return ZonalKernel(float(lam), float(d), n, coef, theta, values, tail, m.tag, float(m(0)))


def closed_form_poisson(u, x, lam=0.5, d=None):
    """|S^{d-1}|^{-1} (1 - u^2) / (1 - 2 u x + u^2)^(lam + 1), the classical Abel-Poisson kernel."""
    d = _dims(lam, d)
    if not 0 <= u < 1:
        raise ParameterError(f"u must lie in [0, 1), got {u!r}")
    x = np.asarray(x, dtype=float)
    return (1.0 - u * u) / (1.0 - 2.0 * u * x + u * u) ** (lam + 1.0) / sphere_area(d)


@dataclass(frozen=True)
class PositivityReport:
    min_value: float
    argmin_theta: float
    max_value: float
    tail_bound: float
    margin: float  # min - tail
    positive: bool


def positivity_report(kern, dense_grid=None, rel_tol=1e-8):
    """Minimum of the sampled kernel against its tail bound.

    Verdict positive when min - tail >= -rel_tol * max.
    """
    if dense_grid is None:
        theta, vals = kern.theta, kern.values
    else:
        theta = np.asarray(dense_grid, dtype=float)
        vals = kern(np.cos(theta))
    i = int(np.argmin(vals))
    vmin, vmax = float(vals[i]), float(np.max(np.abs(vals)))
    margin = vmin - kern.tail_bound
    return PositivityReport(vmin, float(theta[i]), vmax, kern.tail_bound, margin, margin >= -rel_tol * vmax)


def l1_normalization(kern, q=None, max_degree=NORM_DEGREE):
    """|S^{d-2}| int_0^pi phi(cos t) sin(t)^(2 lam) dt; equals m(0).

    The integral is taken with a rule exact to the series degree.  Degrees
    above ``max_degree`` integrate to zero analytically (orthogonality) and
    are dropped instead of evaluated, which keeps the cost bounded for
    kernels whose truncation degree runs into the hundreds of thousands.
    """
    n = min(kern.N, int(max_degree))
    if q is None:
        q = build_theta_quadrature(kern.lam, n // 2 + 1)
    if q.lam != kern.lam:
        raise ParameterError(f"rule built for lam={q.lam}, kernel has lam={kern.lam}")
    if q.degree < n:
        raise ResolutionError(f"rule exact to degree {q.degree}, kernel series has degree {n}")
    vals = _ratio_series(kern.coefficients[: n + 1], kern.lam, q.x)
    return float(equator_measure(kern.lam) * q.integrate(vals))


def kernel_l1_norm(kern, n_nodes=None):
    """||phi||_{L^1_lam}: quadrature of |phi| (not a polynomial, so use many nodes)."""
    n_nodes = max(4 * kern.N, 512) if n_nodes is None else n_nodes
    q = build_theta_quadrature(kern.lam, n_nodes)
    return float(equator_measure(kern.lam) * q.integrate(np.abs(kern(q.x))))


def funk_hecke_factor(k, lam=0.5, d=None):
    """Scalar by which convolution with the synthesised kernel of m multiplies m(k) on degree k.

    Funk-Hecke gives  f * phi = sum_k mu_k Y_k f  with
    mu_k = |S^{d-2}| int phi(cos t) P_k(cos t)/P_k(1) sin^{2 lam} t dt,
    and the kernel normalisation (k+lam)/lam, 1/|S^{d-1}| makes
    mu_k / m(k) = |S^{d-2}| / |S^{d-1}| * (k+lam)/lam / (c(k,lam) P_k^lam(1)),
    which is identically 1.
    """
    d = _dims(lam, d)
    k = np.asarray(k, dtype=float)
    log_val = (
        np.log(equator_measure(lam)) - np.log(sphere_area(d)) + np.log((k + lam) / lam)
        - np.log(norm_constant(k, lam)) - log_gegenbauer_at_one(k, lam)
    )
    return np.exp(log_val)


def convolve_s2(f, kern, grid=None):
    """Physical-space quadrature of (f * phi)(x) = int f(y) phi(x . y) dw(y) on S^2.

    The grid must integrate f(y) phi(x . y) exactly, i.e. degree f.N + kern.N;
    a coarser grid raises ResolutionError.  The result is re-analysed up to f.N
    (convolution cannot create new degrees).
    """
    if kern.lam != 0.5:
        raise ParameterError("physical-space convolution is implemented on S^2 (d = 3) only")
    if f.kind == "zonal":
        f = zonal_to_s2(f)
    need = max(f.N + kern.N, 2 * f.N)
    if grid is None:
        grid = sphere_grid(max((need + 1) // 2, 1))
    if grid.degree < need:
        raise ResolutionError(f"grid exact to degree {grid.degree}, convolution needs {need}")
    vals = synth_s2(f, grid)
    n_phi = grid.phi.size
    ct, st = np.cos(grid.theta), np.sin(grid.theta)
    dphi = grid.phi - grid.phi[0]
    # x . y depends only on (theta_i, theta_j, phi_a - phi_b): kernel on that lattice
    cosg = ct[:, None, None] * ct[None, :, None] + st[:, None, None] * st[None, :, None] * np.cos(dphi)
    kvals = kern(np.clip(cosg, -1.0, 1.0))
    # circular convolution in longitude
    fw = np.fft.rfft(vals * grid.weights, axis=1)  # (j, freq)
    kf = np.fft.rfft(kvals, axis=2)  # (i, j, freq)
    out = np.fft.irfft(np.einsum("jf,ijf->if", fw, kf), n=n_phi, axis=1)
    return analyze_s2_values(out, f.N, grid)


@dataclass(frozen=True)
class YoungReport:
    lhs: float  # ||f * phi||_2
    kernel_l1: float
    f_norm: float
    bound: float
    holds: bool


def young_check(f, kern, grid=None, slack=1e-12):
    """||f * phi||_2 <= ||phi||_{L^1_lam} ||f||_2."""
    g = convolve_s2(f, kern, grid)
    lhs = float(np.sqrt(np.sum(g.coeffs**2)))
    k1 = kernel_l1_norm(kern)
    fn = float(np.sqrt(np.sum(f.coeffs**2)))
    bound = k1 * fn
    return YoungReport(lhs, k1, fn, bound, lhs <= bound * (1.0 + slack) + slack)


def kernel_csv(kern):
    """``theta,value`` rows preceded by a comment header with tag, N and tail bound."""
    buf = io.StringIO()
    buf.write(f"# multiplier={kern.tag} N={kern.N} tail_bound={kern.tail_bound!r} lam={kern.lam!r}\n")
    buf.write("theta,value\n")
    for th, v in zip(kern.theta, kern.values):
        buf.write(f"{th!r},{v!r}\n")
    return buf.getvalue()
