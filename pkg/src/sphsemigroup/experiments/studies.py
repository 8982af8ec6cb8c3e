"""One function per experiment; each returns an ExperimentReport."""

import math
import re
import time

import numpy as np
from scipy.special import roots_legendre

from .. import kernels as K
from .. import multipliers as M
from ..laplace_series import LaplaceCoefficients, lp_norm, parseval_l2_norm, random_band_limited
from ..smoothness import (
    equivalence_ratio,
    kfunctional_l2_curve,
    loglog_slope,
    modulus_curve,
)
from .config import SMOOTH_PROFILES, Operator, build_operator, doubled, lam_of, t_grid
from .report import ExperimentReport

SLOPE_TOL = 0.05
BAND_DRIFT = 0.05
EQ45_WIDTH = 50.0
INV_E = math.exp(-1.0)


# ---------------------------------------------------------------- suites


def eigen_suite(cfg):
    lam = lam_of(cfg)
    out = []
    for j in cfg["suite"]["eigen"]:
        b = np.zeros(j + 1)
        b[j] = 1.0
        out.append((f"Y{j}", LaplaceCoefficients.zonal(b, lam)))
    return out


def random_suite(cfg, count=None, n=None):
    lam = lam_of(cfg)
    count = cfg["suite"]["random"]["count"] if count is None else count
    n = cfg["suite"]["random"]["N"] if n is None else n
    kind = "s2" if lam == 0.5 else "zonal"
    out = []
    for i in range(count):
        rng = np.random.default_rng([cfg["seed"], i])
        out.append((f"random{i}", random_band_limited(n, rng, kind, lam)))
    return out


def smooth_suite(cfg):
    lam = lam_of(cfg)
    k = np.arange(cfg["N"] + 1, dtype=float)
    return [(name, LaplaceCoefficients.zonal(SMOOTH_PROFILES[name](k), lam)) for name in cfg["suite"]["smooth"]]


def constant(cfg):
    return LaplaceCoefficients.zonal([1.0], lam_of(cfg))


def operators(cfg, key=None):
    specs = cfg["operators"] if key is None else cfg[key]["operators"]
    return [build_operator(s, lam_of(cfg)) for s in specs]


def _slug(text):
    return re.sub(r"[^A-Za-z0-9.=_-]+", "_", text).strip("_")


# ---------------------------------------------------------------- shared measurements


def boolean_error(op, r, f, t):
    """||f - boolean_r T(t) f||_2 through the defect multiplier (1 - m)^r."""
    m = M.semigroup_multiplier(op.p, op.gamma, t)
    return parseval_l2_norm(M.apply(M.boolean_defect(m, r), f))


def boolean_error_curve(op, r, f, ts):
    """boolean_error for every t in ``ts``, from (1 - e^{-p(k)^gamma t})^r degreewise."""
    x = np.outer(np.asarray(ts, dtype=float), op.exponent(np.arange(f.N + 1)))
    return np.sqrt(np.sum(((-np.expm1(-x)) ** r * f.degree_norms()) ** 2, axis=1))


def _decade(ts):
    return ts <= ts[0] * 10.0 * (1.0 + 1e-12)


def _band(lhs, rhs):
    band = equivalence_ratio(np.ravel(lhs), np.ravel(rhs))
    return band.max_ratio, band.min_ratio


def _drift(fine, coarse):
    return max(abs(fine[0] / coarse[0] - 1.0), abs(fine[1] / coarse[1] - 1.0))


def _timed(fn):
    def run(cfg):
        t0 = time.perf_counter()
        rep = fn(cfg)
        rep.wall_seconds = time.perf_counter() - t0
        return rep

    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# ---------------------------------------------------------------- kernels


@_timed
def run_kernel_checks(cfg):
    """Kernel positivity, normalisation, closed-form Poisson oracle, Funk-Hecke and Young checks."""
    lam, d = lam_of(cfg), cfg["d"]
    kc = cfg["kernel"]
    rep = ExperimentReport("kernel", params={"t": kc["t"], "u": kc["poisson_u"], "lam": lam})

    def kernel_case(m, lam_, label, positive=True):
        kern = K.synthesize_kernel(m, lam_)
        pos = K.positivity_report(kern)
        norm = K.l1_normalization(kern)
        if positive:
            rep.check("kernel-positivity", f"{label}: min - tail vs -1e-8 max", pos.margin,
                      -1e-8 * pos.max_value, pos.positive)
        rep.at_most("kernel-normalization", f"{label}: |integral - 1|", abs(norm - 1.0), 1e-9)
        rep.metrics[label] = {"N": kern.N, "min": pos.min_value, "argmin": pos.argmin_theta,
                              "tail": kern.tail_bound, "integral": norm}
        rep.files[f"kernels/{_slug(label)}.csv"] = K.kernel_csv(kern)

    for op in operators(cfg):
        for t in kc["t"]:
            kernel_case(M.semigroup_multiplier(op.p, op.gamma, t), lam, f"{op.name} t={t}")
    op = build_operator({"type": "abel_poisson", "gamma": 1.0}, lam)
    kernel_case(M.boolean(M.semigroup_multiplier(op.p, 1.0, 0.2), 3), lam, "boolean3 V[gamma=1.0] t=0.2",
                positive=False)  # Booleans need not have positive kernels
    for lam_x in kc["lam_extra"]:
        for spec in ({"type": "abel_poisson", "gamma": 1.0}, {"type": "weierstrass", "kappa": 1.0}):
            opx = build_operator(spec, lam_x)
            kernel_case(M.semigroup_multiplier(opx.p, opx.gamma, 0.2), lam_x, f"{opx.name} t=0.2 lam={lam_x}")

    for u in kc["poisson_u"]:
        kern = K.synthesize_kernel(M.abel_poisson(1.0, -math.log(u)), lam, d)
        err = float(np.max(np.abs(kern.values - K.closed_form_poisson(u, np.cos(kern.theta), lam, d))))
        rep.at_most("poisson-closed-form", f"u={u}: max |series - closed form|", err, 1e-8)

    if lam == 0.5:
        fh = kc["funk_hecke"]
        m = M.abel_poisson(1.0, fh["t"])
        kern = K.synthesize_kernel(m, lam)
        factors = m.values(fh["N"]) * K.funk_hecke_factor(np.arange(fh["N"] + 1), lam)
        worst, young_gap = 0.0, -math.inf
        for _, f in random_suite(cfg, fh["count"], fh["N"]):
            conv = K.convolve_s2(f, kern)
            worst = max(worst, float(np.max(np.abs(conv.coeffs - f.scale_degrees(factors).coeffs))))
            y = K.young_check(f, kern)
            young_gap = max(young_gap, y.lhs - y.bound)
        rep.at_most("funk-hecke", f"{fh['count']} random S^2 functions: max coefficient error", worst, 1e-7)
        rep.at_most("young", "max ||f*phi|| - ||phi||_1 ||f||", young_gap, 1e-12)
    return rep


# ---------------------------------------------------------------- semigroup axioms


@_timed
def run_semigroup_checks(cfg):
    """Semigroup law, t = 0 identity, contraction (L^2 exact, C on a grid), strong continuity."""
    lam = lam_of(cfg)
    sc = cfg["semigroup"]
    rep = ExperimentReport("semigroup", params=dict(sc))
    ts = t_grid(sc["t_pairs"])
    k = np.arange(cfg["N"] + 1)
    polys = [M.RegularPolynomial(tuple(p)) for p in sc["polynomials"]]
    ops = operators(cfg) + [Operator(f"T[p={list(p.coeffs)},gamma={g}]", p, g) for p in polys for g in sc["gammas"]]

    t0 = time.perf_counter()
    worst = 0.0
    for op in ops:
        for t1 in ts:
            for t2 in ts:
                m12 = M.compose(M.semigroup_multiplier(op.p, op.gamma, t1), M.semigroup_multiplier(op.p, op.gamma, t2))
                worst = max(worst, float(np.max(np.abs(m12(k) - M.semigroup_multiplier(op.p, op.gamma, t1 + t2)(k)))))
    elapsed = time.perf_counter() - t0
    rep.at_most("semigroup-law", f"max |m(t1) m(t2) - m(t1+t2)|, k <= {cfg['N']}, 10x10 grid", worst, 1e-13)
    rep.at_most("semigroup-law-runtime", "seconds per operator", elapsed / len(ops), 1.0)

    ident = max(float(np.max(np.abs(M.semigroup_multiplier(op.p, op.gamma, 0.0)(k) - 1.0))) for op in ops)
    rep.at_most("identity-at-zero", "max |m(0)(k) - 1|", ident, 0.0)

    suite = eigen_suite(cfg) + random_suite(cfg) + smooth_suite(cfg)
    excess = -math.inf
    for p in polys:
        for g in sc["gammas"]:
            for name, f in suite:
                fn = parseval_l2_norm(f)
                for t in ts:
                    tn = parseval_l2_norm(M.apply(M.semigroup_multiplier(p, g, t), f))
                    excess = max(excess, tn - fn)
                    rep.row(f"contraction/p={list(p.coeffs)}/gamma={g}/{name}", t, tn, fn)
    rep.at_most("contraction-l2", "max ||T(t)f|| - ||f||", excess, 1e-12)

    # sup-norm contraction of positive normalised kernels, grid surrogate for the sup
    sup_excess = -math.inf
    zonal = [random_band_limited(16, np.random.default_rng([cfg["seed"], 100 + i]), "zonal", lam) for i in range(3)]
    for op in operators(cfg):
        for f in zonal:
            fs = lp_norm(f, math.inf)
            for t in (0.05, 0.2, 1.0):
                ts_ = lp_norm(M.apply(M.semigroup_multiplier(op.p, op.gamma, t), f), math.inf)
                sup_excess = max(sup_excess, ts_ / fs - 1.0)
    rep.at_most("contraction-sup", "max ||T(t)f||_C / ||f||_C - 1 (grid sup)", sup_excess, 1e-6)

    # strong continuity along t = 2^-j: monotone, and below 1e-6 ||f|| once 2^-j ||A f|| <= 1e-6 ||f||
    bad, last = 0, 0.0
    for op in operators(cfg):
        for name, f in random_suite(cfg) + smooth_suite(cfg):
            fn = parseval_l2_norm(f)
            af = parseval_l2_norm(f.scale_degrees(op.exponent(np.arange(f.N + 1))))
            j_end = max(20, math.ceil(math.log2(max(af / (1e-6 * fn), 1.0))))
            errs = [boolean_error(op, 1, f, 2.0 ** -j) for j in range(j_end + 1)]
            bad += int(np.any(np.diff(errs) >= 0))
            last = max(last, errs[-1] / fn)
    rep.check("strong-continuity", "non-monotone sequences", bad, 0, bad == 0)
    rep.at_most("strong-continuity", "max final ||T(t)f - f|| / ||f||", last, 1e-6)
    return rep


# ---------------------------------------------------------------- Bernstein


@_timed
def run_bernstein_study(cfg):
    """t ||A T(t) f|| / ||f|| against 1/e in L^2; grid-sup constant reported."""
    lam = lam_of(cfg)
    ts = t_grid(cfg["bernstein"]["t_grid"])
    rep = ExperimentReport("bernstein", params={"t_grid": cfg["bernstein"]["t_grid"]})
    suite = eigen_suite(cfg) + random_suite(cfg) + smooth_suite(cfg) + [("constant", constant(cfg))]
    worst, const_max, attained = 0.0, 0.0, 0.0
    sup_const = 0.0
    zonal = [random_band_limited(16, np.random.default_rng([cfg["seed"], 200 + i]), "zonal", lam) for i in range(2)]
    for op in operators(cfg):
        gen = M.generator_multiplier(op.p, op.gamma)
        for name, f in suite:
            fn = parseval_l2_norm(f)
            for t in ts:
                val = t * parseval_l2_norm(M.apply(M.compose(gen, M.semigroup_multiplier(op.p, op.gamma, t)), f))
                if name == "constant":
                    const_max = max(const_max, val)
                    continue
                worst = max(worst, val / fn)
                rep.row(f"{op.name}/{name}", t, val, fn)
        for name, f in eigen_suite(cfg):
            j = f.N
            t_star = 1.0 / float(op.exponent(j))
            val = t_star * parseval_l2_norm(M.apply(M.compose(gen, M.semigroup_multiplier(op.p, op.gamma, t_star)), f))
            attained = max(attained, abs(val - INV_E))
        for f in zonal:
            fs = lp_norm(f, math.inf)
            for t in ts[::4]:
                val = t * lp_norm(M.apply(M.compose(gen, M.semigroup_multiplier(op.p, op.gamma, t)), f), math.inf)
                sup_const = max(sup_const, val / fs)
    rep.at_most("bernstein-l2", "sup t ||A T(t) f|| / ||f||", worst, INV_E + 1e-10)
    rep.at_most("bernstein-maximiser", "max |value at t = 1/p(j)^gamma - 1/e|", attained, 1e-10)
    rep.at_most("bernstein-constant", "t ||A T(t) 1||", const_max, 0.0)
    rep.metrics["empirical_sup_norm_constant"] = sup_const
    return rep


# ---------------------------------------------------------------- equivalences


def _relation(rep, label, ts_fine, members, lhs_fn, rhs_fn, width_cap=None):
    """Slopes on the smallest decade, ratio band and its drift under t-grid doubling.

    ``lhs_fn`` and ``rhs_fn`` map (f, ts) to the whole curve.
    """
    lhs = np.array([lhs_fn(f, ts_fine) for _, f in members])
    rhs = np.array([rhs_fn(f, ts_fine) for _, f in members])
    coarse = slice(None, None, 2)
    ts = ts_fine[coarse]
    dec = _decade(ts)
    worst_slope = 0.0
    for i, (name, _) in enumerate(members):
        sl, _ = loglog_slope(ts[dec], lhs[i, coarse][dec])
        sr, _ = loglog_slope(ts[dec], rhs[i, coarse][dec])
        worst_slope = max(worst_slope, abs(sl - sr))
        for t, a, b in zip(ts, lhs[i, coarse], rhs[i, coarse]):
            rep.row(f"{label}/{name}", t, a, b)
    band_c = _band(lhs[:, coarse], rhs[:, coarse])
    band_f = _band(lhs, rhs)
    rep.at_most("equivalence-slope", f"{label}: max |slope lhs - slope rhs| on [{ts[0]:g}, {10 * ts[0]:g}]",
                worst_slope, SLOPE_TOL)
    rep.at_most("equivalence-band-drift", f"{label}: band change under t-grid doubling", _drift(band_f, band_c),
                BAND_DRIFT)
    width = band_c[0] / band_c[1]
    if width_cap is None:
        rep.check("equivalence-band", f"{label}: band max/min finite", width, math.inf, math.isfinite(width))
    else:
        rep.at_most("equivalence-band", f"{label}: band max/min", width, width_cap)
    rep.metrics[label] = {"band": band_c, "width": width, "max_slope_gap": worst_slope}


@_timed
def run_equivalence_study(cfg):
    """Boolean error vs modulus, Boolean error vs exact K-functional, modulus vs K-functional."""
    lam = lam_of(cfg)
    ec = cfg["equivalence"]
    ts_fine = t_grid(doubled(ec["t_grid"]))
    rep = ExperimentReport("equivalence", params={"t_grid": ec["t_grid"], "r": cfg["r"], "alphas": ec["alphas"]})
    members = eigen_suite(cfg) + random_suite(cfg)

    # eigenfunction closed form for the Boolean error
    worst = 0.0
    for op in operators(cfg):
        for r in cfg["r"]:
            for _, f in eigen_suite(cfg):
                j = f.N
                for t in ts_fine[::8]:
                    exact = (-math.expm1(-float(op.exponent(j)) * t)) ** r
                    worst = max(worst, abs(boolean_error(op, r, f, t) - exact))
    rep.at_most("eigen-error-law", "max |error - (1 - exp(-p(j)^gamma t))^r|", worst, 1e-14)

    for op in operators(cfg):
        for r in cfg["r"]:
            alpha, scale = op.modulus_order(r)

            def err(f, ts, op=op, r=r):
                return boolean_error_curve(op, r, f, ts)

            def mod(f, ts, alpha=alpha, scale=scale):
                return modulus_curve(f, alpha, np.minimum(scale(ts), math.pi))

            def kfun(f, ts, op=op, r=r):
                return kfunctional_l2_curve(f, op.exponent(np.arange(f.N + 1)) ** r, ts**r)[0]

            _relation(rep, f"{op.name}/r={r}/modulus", ts_fine, members, err, mod)
            _relation(rep, f"{op.name}/r={r}/K", ts_fine, members, err, kfun)

    for alpha in ec["alphas"]:
        def mod_a(f, ts, alpha=alpha):
            return modulus_curve(f, alpha, np.minimum(ts, math.pi))

        def k_a(f, ts, alpha=alpha):
            k = np.arange(f.N + 1, dtype=float)
            return kfunctional_l2_curve(f, (k * (k + 2 * lam)) ** (alpha / 2), ts**alpha)[0]

        _relation(rep, f"modulus-vs-K/alpha={alpha}", ts_fine, members, mod_a, k_a, EQ45_WIDTH)
    return rep


# ---------------------------------------------------------------- saturation


@_timed
def run_saturation_study(cfg):
    """Order t^r saturation: slopes, constants, lower bounds on error / t^r, class members."""
    lam = lam_of(cfg)
    sc = cfg["saturation"]
    ts = t_grid(sc["t_grid"])
    dec = _decade(ts)
    rep = ExperimentReport("saturation", params={"t_grid": sc["t_grid"], "r": cfg["r"]})
    smooth = smooth_suite(cfg)
    nonconst = eigen_suite(cfg) + random_suite(cfg) + smooth
    k_all = np.arange(cfg["N"] + 1, dtype=float)
    slow = LaplaceCoefficients.zonal((1.0 + k_all) ** (-sc["slow_decay"]), lam)
    worst_slope, const_err, worst_floor, h1_excess, eig_lim = 0.0, 0.0, math.inf, -math.inf, -math.inf
    slow_slopes = {}
    for op in operators(cfg):
        for r in cfg["r"]:
            tag = f"{op.name}/r={r}"
            const_err = max(const_err, max(boolean_error(op, r, constant(cfg), t) for t in ts))
            for name, f in nonconst:
                errs = np.array([boolean_error(op, r, f, t) for t in ts])
                for t, e in zip(ts, errs):
                    rep.row(f"{tag}/{name}", t, e, t**r)
                limit = parseval_l2_norm(f.scale_degrees(op.exponent(np.arange(f.N + 1)) ** r))
                # bounded away from zero: at least half the t -> 0 limit ||A^r f||
                worst_floor = min(worst_floor, float(np.min(errs[dec] / ts[dec] ** r)) / limit)
                if any(name == s for s, _ in smooth):
                    sl, _ = loglog_slope(ts[dec], errs[dec])
                    worst_slope = max(worst_slope, abs(sl - r))
                if name.startswith("Y"):
                    x = float(op.exponent(f.N)) * ts[0]
                    # 1 - ((1 - e^-x)/x)^r <= r x / 2
                    eig_lim = max(eig_lim, (1.0 - errs[0] / ts[0] ** r / limit) - r * x / 2.0)
            # class member built from g: A^r f = g, so error <= t^r ||g||
            g = random_suite(cfg, 1)[0][1]
            a = op.exponent(np.arange(g.N + 1)) ** r
            inv = np.where(a > 0, 1.0 / np.where(a > 0, a, 1.0), 0.0)
            f = g.scale_degrees(inv)
            gn = parseval_l2_norm(g.scale_degrees((a > 0).astype(float)))
            h1_excess = max(h1_excess, max(boolean_error(op, r, f, t) / t**r for t in ts) - gn)
            mid = (ts >= 1e-2) & (ts <= 1.0)
            if np.count_nonzero(mid) >= 2:
                slow_slopes[tag] = loglog_slope(ts[mid], [boolean_error(op, r, slow, t) for t in ts[mid]])[0]
    rep.at_most("saturation-slope", f"smooth suite: max |slope - r| on [{ts[0]:g}, {10 * ts[0]:g}]", worst_slope,
                SLOPE_TOL)
    rep.at_most("saturation-constant", "max error for constant f", const_err, 0.0)
    rep.check("saturation-lower", "min over small-t decade of (error / t^r) / ||A^r f||", worst_floor, 0.5,
              worst_floor >= 0.5)
    rep.at_most("saturation-eigen-limit", "eigenfunction error / t^r vs p(j)^(r gamma), excess over r x / 2",
                eig_lim, 1e-12)
    rep.at_most("saturation-class", "max error / t^r - ||g|| for f = A^-r g", h1_excess, 1e-12)
    rep.metrics["slow_decay_slopes_t_in_[1e-2,1]"] = slow_slopes
    return rep


# ---------------------------------------------------------------- class equivalence


@_timed
def run_class_equivalence(cfg):
    """Exact L^2 K-functionals for a(k) = k^2 and b(k) = k(k + 2 lam): ratio band and its suite stability."""
    lam = lam_of(cfg)
    cc = cfg["class_equiv"]
    ts = t_grid(cc["t_grid"])
    rep = ExperimentReport("class_equiv", params={"t_grid": cc["t_grid"], "suite_count": cc["suite_count"]})
    n = cc["suite_count"]
    suite = random_suite(cfg, 2 * n) + eigen_suite(cfg)

    def kk(f, which):
        k = np.arange(f.N + 1, dtype=float)
        a = k * k if which == "a" else k * (k + 2.0 * lam)
        return kfunctional_l2_curve(f, a, ts)[0]

    lhs, rhs = [], []
    for name, f in suite:
        la = kk(f, "a")
        lb = kk(f, "b")
        for t, x, y in zip(ts, la, lb):
            rep.row(name, t, x, y)
        lhs.append(la)
        rhs.append(lb)
    lhs, rhs = np.array(lhs), np.array(rhs)
    base = list(range(n)) + list(range(2 * n, len(suite)))
    band_small = _band(lhs[base], rhs[base])
    band_full = _band(lhs, rhs)
    width = band_full[0] / band_full[1]
    rep.check("class-band", "K_a / K_b band max/min finite", width, math.inf, math.isfinite(width))
    rep.at_most("class-band-drift", f"band change from {n} to {2 * n} random functions", _drift(band_full, band_small),
                BAND_DRIFT)
    rep.metrics["band"] = band_full
    rep.metrics["band_half_suite"] = band_small
    return rep


# ---------------------------------------------------------------- integral representation


def _panel_rule(t, panels, nodes):
    x, w = roots_legendre(nodes)
    edges = np.linspace(0.0, t, panels + 1)
    h = np.diff(edges) / 2.0
    u = (edges[:-1, None] + h[:, None] * (x[None, :] + 1.0)).ravel()
    return u, (h[:, None] * w[None, :]).ravel()


@_timed
def run_integral_representation_check(cfg):
    """(T(t) - I)^r f against the r-fold integral of T(u_1 + ... + u_r) A^r f."""
    ic = cfg["integral_rep"]
    rep = ExperimentReport("integral_rep", params=dict(ic))
    (_, f), = random_suite(cfg, 1, ic["N"])
    k = np.arange(f.N + 1)
    worst = 0.0
    for op in operators(cfg, "integral_rep"):
        a = op.exponent(k)
        for r in (1, 2):
            g = M.apply(M.generator_multiplier(op.p, op.gamma, r), f)
            for t in ic["t"]:
                m = M.semigroup_multiplier(op.p, op.gamma, t)
                step = M.subtract_identity(m)
                lhs = f
                for _ in range(r):
                    lhs = M.apply(step, lhs)
                panels = max(1, math.ceil(float(a.max()) * t))
                u, w = _panel_rule(t, panels, ic["nodes_per_panel"])
                s, wt = u, w
                for _ in range(r - 1):
                    s = (s[:, None] + u[None, :]).ravel()
                    wt = (wt[:, None] * w[None, :]).ravel()
                factors = np.exp(-np.outer(a, s)) @ wt if t > 0 else np.zeros(k.size)
                rhs = g.scale_degrees(factors)
                err = float(np.max(np.abs(lhs.coeffs - rhs.coeffs)))
                worst = max(worst, err)
                rep.row(f"{op.name}/r={r}", t, parseval_l2_norm(lhs), parseval_l2_norm(rhs))
    rep.at_most("integral-representation", "max coefficient error, r in {1, 2}", worst, 1e-10)
    return rep


EXPERIMENTS = {
    "kernel": run_kernel_checks,
    "semigroup": run_semigroup_checks,
    "bernstein": run_bernstein_study,
    "equivalence": run_equivalence_study,
    "saturation": run_saturation_study,
    "class-equiv": run_class_equivalence,
    "integral-rep": run_integral_representation_check,
}
