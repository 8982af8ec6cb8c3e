"""Acceptance criteria 1-13, one recorded pass/fail line each (see the terminal summary)."""

import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import integrate
from scipy.special import eval_legendre

from sphsemigroup import kernels as K
from sphsemigroup import multipliers as M
from sphsemigroup.experiments import load_config
from sphsemigroup.experiments.config import build_operator
from sphsemigroup.experiments.studies import (
    run_class_equivalence,
    run_equivalence_study,
    run_integral_representation_check,
    run_saturation_study,
)
from sphsemigroup.laplace_series import LaplaceCoefficients, parseval_l2_norm, random_band_limited
from sphsemigroup.smoothness import (
    KFunctionalRequest,
    kfunctional_l2_curve,
    kfunctional_l2_exact,
    modulus_curve,
)

V = [{"type": "abel_poisson", "gamma": g} for g in (0.5, 0.75, 1.0)]
W = [{"type": "weierstrass", "kappa": k} for k in (0.5, 1.0)]
INV_E = math.exp(-1.0)


def ops(lam=0.5):
    return [build_operator(s, lam) for s in V + W]


def unit(j, lam=0.5):
    b = np.zeros(j + 1)
    b[j] = 1.0
    return LaplaceCoefficients.zonal(b, lam)


def verdicts_pass(rep, criteria):
    chosen = [v for v in rep.verdicts if v.criterion in criteria]
    assert chosen, f"no verdicts named {criteria}"
    bad = [f"{v.detail} = {v.value:.3e} (tol {v.tolerance:.3e})" for v in chosen if not v.passed]
    assert not bad, bad
    return len(chosen)


def test_c01_semigroup_law(criterion):
    with criterion(1, "semigroup law to 1e-13, k <= 64, 10x10 grid, < 1 s") as c:
        k = np.arange(65)
        ts = np.geomspace(1e-3, 1.0, 10)
        polys = [M.RegularPolynomial((0.0, 1.0)), M.RegularPolynomial((0.0, 1.0, 1.0))]
        cases = [(op.p, op.gamma) for op in ops()] + [(p, g) for p in polys for g in (0.5, 1.0)]
        start = time.perf_counter()
        worst = 0.0
        for p, g in cases:
            for t1 in ts:
                for t2 in ts:
                    lhs = M.compose(M.semigroup_multiplier(p, g, t1), M.semigroup_multiplier(p, g, t2))(k)
                    rhs = M.semigroup_multiplier(p, g, t1 + t2)(k)
                    worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        elapsed = time.perf_counter() - start
        c.detail = f"max error {worst:.1e}, {elapsed:.3f} s for {len(cases)} operators"
        assert worst <= 1e-13
        assert elapsed < 1.0


def test_c02_contraction(criterion):
    with criterion(2, "L2 contraction for p in {x, x(x+1)}, gamma in {0.5, 1}, slack 1e-12") as c:
        suite = [random_band_limited(32, np.random.default_rng([7, i]), "s2") for i in range(6)]
        suite += [random_band_limited(32, np.random.default_rng([8, i]), "zonal", 0.5, 1.0) for i in range(4)]
        worst = -math.inf
        for coeffs in ((0.0, 1.0), (0.0, 1.0, 1.0)):
            p = M.RegularPolynomial(coeffs)
            for g in (0.5, 1.0):
                for t in np.concatenate([[0.0], np.geomspace(1e-4, 10.0, 25)]):
                    m = M.semigroup_multiplier(p, g, t)
                    for f in suite:
                        worst = max(worst, parseval_l2_norm(M.apply(m, f)) - parseval_l2_norm(f))
        c.detail = f"max ||T f|| - ||f|| = {worst:.1e}"
        assert worst <= 1e-12


def test_c03_kernel_positivity_and_normalization(criterion):
    with criterion(3, "kernel min - tail >= -1e-8 max and integral 1 +- 1e-9") as c:
        cases = [(op, t, 0.5) for op in ops() for t in (0.05, 0.2, 1.0)]
        for lam in (1.0, 1.5):
            cases += [(build_operator(s, lam), 0.2, lam) for s in (V[-1], W[-1])]
        worst_margin, worst_norm = math.inf, 0.0
        for op, t, lam in cases:
            kern = K.synthesize_kernel(M.semigroup_multiplier(op.p, op.gamma, t), lam)
            pos = K.positivity_report(kern)
            assert pos.margin >= -1e-8 * pos.max_value, f"{op.name} t={t} lam={lam}"
            worst_margin = min(worst_margin, pos.margin / pos.max_value)
            worst_norm = max(worst_norm, abs(K.l1_normalization(kern) - 1.0))
        c.detail = f"{len(cases)} kernels, min relative margin {worst_margin:.1e}, max |integral - 1| {worst_norm:.1e}"
        assert worst_norm <= 1e-9


def test_c04_poisson_closed_form(criterion):
    with criterion(4, "Abel-Poisson series vs closed form <= 1e-8") as c:
        worst = 0.0
        for u in (0.3, 0.5, 0.8):
            kern = K.synthesize_kernel(M.abel_poisson(1.0, -math.log(u)), 0.5)
            exact = K.closed_form_poisson(u, np.cos(kern.theta), 0.5)
            worst = max(worst, float(np.max(np.abs(kern.values - exact))))
        c.detail = f"max error {worst:.1e}"
        assert worst <= 1e-8


def test_c05_funk_hecke(criterion):
    with criterion(5, "physical convolution vs coefficient action <= 1e-7, 20 S2 functions") as c:
        n = 12
        m = M.abel_poisson(1.0, 0.5)
        kern = K.synthesize_kernel(m, 0.5)
        factors = m.values(n) * K.funk_hecke_factor(np.arange(n + 1), 0.5)
        worst = 0.0
        for i in range(20):
            f = random_band_limited(n, np.random.default_rng([9, i]), "s2")
            conv = K.convolve_s2(f, kern)
            worst = max(worst, float(np.max(np.abs(conv.coeffs - f.scale_degrees(factors).coeffs))))
        c.detail = f"max coefficient error {worst:.1e}"
        assert worst <= 1e-7


def test_c06_bernstein(criterion):
    with criterion(6, "t ||A T(t) f|| / ||f|| <= 1/e + 1e-10, single mode attains 1/e +- 1e-10") as c:
        suite = [unit(j) for j in (1, 2, 4, 8, 16, 32)]
        suite += [random_band_limited(32, np.random.default_rng([10, i]), "s2") for i in range(4)]
        ts = np.geomspace(1e-4, 10.0, 41)
        worst, attained = 0.0, 0.0
        for op in ops():
            gen = M.generator_multiplier(op.p, op.gamma)
            for f in suite:
                for t in ts:
                    at = M.compose(gen, M.semigroup_multiplier(op.p, op.gamma, t))
                    worst = max(worst, t * parseval_l2_norm(M.apply(at, f)) / parseval_l2_norm(f))
            for j in (1, 4, 32):
                t_star = 1.0 / float(op.exponent(j))
                at = M.compose(gen, M.semigroup_multiplier(op.p, op.gamma, t_star))
                attained = max(attained, abs(t_star * parseval_l2_norm(M.apply(at, unit(j))) - INV_E))
        c.detail = f"sup {worst:.12f} vs 1/e {INV_E:.12f}, maximiser error {attained:.1e}"
        assert worst <= INV_E + 1e-10
        assert attained <= 1e-10


def test_c07_integral_representation(criterion):
    with criterion(7, "integral representation, r in {1, 2}, <= 1e-10 per coefficient") as c:
        rep = run_integral_representation_check(load_config())
        verdicts_pass(rep, {"integral-representation"})
        # adaptive-quadrature oracle on a few coefficients
        op = build_operator(V[0], 0.5)
        f = random_band_limited(6, np.random.default_rng(11), "zonal")
        t = 0.5
        worst = 0.0
        for r in (1, 2):
            step = M.subtract_identity(M.semigroup_multiplier(op.p, op.gamma, t))
            lhs = f
            for _ in range(r):
                lhs = M.apply(step, lhs)
            for k in range(1, f.N + 1):
                a = float(op.exponent(k))
                gk = (-a) ** r * f.coeffs[k]
                if r == 1:
                    val = integrate.quad(lambda u: math.exp(-a * u), 0.0, t, epsabs=1e-14)[0]
                else:
                    val = integrate.dblquad(lambda u, v: math.exp(-a * (u + v)), 0.0, t, 0.0, t, epsabs=1e-14)[0]
                worst = max(worst, abs(lhs.coeffs[k] - gk * val))
        c.detail = f"study max {rep.verdicts[0].value:.1e}, adaptive oracle max {worst:.1e}"
        assert worst <= 1e-10


def test_c08_eigen_error_law(criterion):
    with criterion(8, "||(I - boolean_r T(t)) Y_j|| = (1 - exp(-p(j)^gamma t))^r to 1e-14") as c:
        ts = np.geomspace(1e-3, 1.0, 7)
        worst = 0.0
        for lam in (0.5, 1.0, 1.5):
            for op in ops(lam):
                for r in (1, 2, 3):
                    for t in ts:
                        bm = M.boolean(M.semigroup_multiplier(op.p, op.gamma, t), r)
                        for j in range(1, 33):
                            y = unit(j, lam)
                            err = parseval_l2_norm(y - M.apply(bm, y))
                            exact = (-math.expm1(-float(op.exponent(j)) * t)) ** r
                            worst = max(worst, abs(err - exact))
        c.detail = f"max deviation {worst:.1e} over lam in {{1/2, 1, 3/2}}"
        assert worst <= 1e-14


@pytest.fixture(scope="module")
def equivalence_report():
    return run_equivalence_study(load_config())


def test_c09_equivalence(criterion, equivalence_report):
    with criterion(9, "equivalence slopes within 0.05, bands stable (< 5%) under t-grid doubling") as c:
        rep = equivalence_report
        n = verdicts_pass(rep, {"equivalence-slope", "equivalence-band-drift", "equivalence-band"})
        slope = max(v.value for v in rep.verdicts if v.criterion == "equivalence-slope")
        drift = max(v.value for v in rep.verdicts if v.criterion == "equivalence-band-drift")
        # eigenfunction modulus against a dense Legendre oracle
        ts = np.geomspace(1e-3, 1.0, 13)
        theta = np.union1d(np.linspace(0.0, 1.0, 400_001)[1:], ts)
        dev = 0.0
        for j in (1, 8, 32):
            gap = np.maximum(1.0 - eval_legendre(j, np.cos(theta)), 0.0)
            for alpha in (1.0, 2.0, 3.0):
                run = np.maximum.accumulate(gap ** (alpha / 2))
                oracle = run[np.searchsorted(theta, ts, side="right") - 1]
                dev = max(dev, float(np.max(np.abs(modulus_curve(unit(j), alpha, ts) / oracle - 1.0))))
        c.detail = f"{n} verdicts, worst slope gap {slope:.3f}, worst drift {drift:.3f}, modulus oracle {dev:.1e}"
        assert dev <= 1e-6


def test_c10_kfunctional_exactness(criterion):
    with criterion(10, "ridge path vs brute-force 3-mode oracle <= 1e-3; one mode to 1e-10") as c:
        degrees = np.array([1, 3, 6])
        b = np.zeros(7)
        b[degrees] = np.random.default_rng(12).normal(size=3)
        f = LaplaceCoefficients.zonal(b)
        k = np.arange(7.0)
        a = k * (k + 1.0)
        dn = f.degree_norms()[degrees]
        s = np.linspace(0.0, 1.0, 301)
        worst = 0.0
        for t in (0.003, 0.03, 0.3):
            exact = kfunctional_l2_exact(KFunctionalRequest(f, a, t))[0]
            # g = s_k f_k on the three active degrees, exhaustive grid over [0, 1]^3
            brute = math.inf
            e2 = ((1.0 - s[:, None]) * dn[1]) ** 2 + ((1.0 - s[None, :]) * dn[2]) ** 2
            a2 = (s[:, None] * a[3] * dn[1]) ** 2 + (s[None, :] * a[6] * dn[2]) ** 2
            for s0 in s:
                err = np.sqrt(((1.0 - s0) * dn[0]) ** 2 + e2)
                smooth = np.sqrt((s0 * a[1] * dn[0]) ** 2 + a2)
                brute = min(brute, float(np.min(err + t * smooth)))
            assert exact <= brute + 1e-12
            worst = max(worst, brute - exact)
        one = 0.0
        for j, t, amp in [(1, 0.01, 2.0), (5, 0.02, 0.7), (20, 1e-4, 1.3), (20, 1.0, 1.0)]:
            fj = unit(j) * amp
            aj = np.linspace(0.0, 3.0, j + 1) ** 2
            got = kfunctional_l2_exact(KFunctionalRequest(fj, aj, t))[0]
            want = min(1.0, t * abs(aj[j])) * amp
            one = max(one, abs(got - want) / want)
        c.detail = f"brute-force gap {worst:.1e}, one-mode relative error {one:.1e}"
        assert worst <= 1e-3
        assert one <= 1e-10


def test_c11_saturation(criterion):
    with criterion(11, "saturation: slope r +- 0.05, zero for constants, error / t^r bounded below") as c:
        rep = run_saturation_study(load_config())
        n = verdicts_pass(rep, {"saturation-slope", "saturation-constant", "saturation-lower"})
        # independent fit for the 2^-k profile
        k = np.arange(65.0)
        f = LaplaceCoefficients.zonal(2.0 ** -k)
        ts = np.geomspace(1e-7, 1e-6, 9)
        dn = f.degree_norms()
        worst = 0.0
        for op in ops():
            x = np.outer(ts, op.exponent(k))
            for r in (1, 2, 3):
                err = np.sqrt(np.sum(((-np.expm1(-x)) ** r * dn) ** 2, axis=1))
                worst = max(worst, abs(np.polyfit(np.log(ts), np.log(err), 1)[0] - r))
        c.detail = f"{n} verdicts, independent slope error {worst:.1e}"
        assert worst <= 0.05


def test_c12_class_equivalence(criterion):
    with criterion(12, "K_a / K_b band finite and stable under suite doubling") as c:
        rep = run_class_equivalence(load_config())
        verdicts_pass(rep, {"class-band", "class-band-drift"})
        f = random_band_limited(16, np.random.default_rng(13), "s2")
        k = np.arange(17.0)
        same = kfunctional_l2_curve(f, k * k, np.geomspace(1e-4, 1.0, 9))[0]
        assert np.all(same / same == 1.0)
        lo, hi = rep.metrics["band"][1], rep.metrics["band"][0]
        drift = [v.value for v in rep.verdicts if v.criterion == "class-band-drift"][0]
        c.detail = f"band [{lo:.4f}, {hi:.4f}], drift {drift:.1e}"


def test_c13_full_run(criterion, tmp_path):
    with criterion(13, "`sphsemigroup all` on defaults exits 0 in < 5 min") as c:
        start = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "sphsemigroup.experiments.cli", "all", "--out", str(tmp_path)],
            capture_output=True, text=True, timeout=600,
        )
        elapsed = time.perf_counter() - start
        c.detail = f"exit {proc.returncode} after {elapsed:.1f} s"
        assert proc.returncode == 0, proc.stdout + proc.stderr
        assert elapsed < 300.0
        assert (tmp_path / "report.json").is_file()

