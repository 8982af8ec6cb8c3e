import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphsemigroup.errors import ParameterError, ResolutionError
from sphsemigroup.gegenbauer import eval_gegenbauer
from sphsemigroup.laplace_series import (
    LaplaceCoefficients,
    analyze_s2,
    analyze_zonal,
    from_csv,
    lp_norm,
    parseval_l2_norm,
    project_degree,
    random_band_limited,
    sphere_grid,
    synth_s2,
    synth_s2_points,
    synth_zonal,
    to_csv,
    zonal_to_s2,
)
from sphsemigroup.quadrature import build_theta_quadrature, zonal_lp_norm

FOUR_PI = 4 * math.pi


def s2_index(n, k, m):
    return k, m + n


def test_zonal_constant():
    c = analyze_zonal(lambda x: np.ones_like(x), 0.5, 6)
    assert c.coeffs[0] == pytest.approx(math.sqrt(FOUR_PI), rel=1e-13)
    assert np.max(np.abs(c.coeffs[1:])) < 1e-13


def test_zonal_basis_element():
    c = analyze_zonal(lambda x: np.array([eval_gegenbauer(3, 0.5, v) for v in x]), 0.5, 8)
    others = np.delete(c.coeffs, 3)
    assert np.max(np.abs(others)) < 1e-13 and abs(c.coeffs[3]) > 0.1


def test_zonal_x_squared():
    c = analyze_zonal(lambda x: x**2, 0.5, 8)
    expected = np.zeros(9)
    expected[0] = math.sqrt(FOUR_PI) / 3
    expected[2] = 2 / 3 * math.sqrt(FOUR_PI / 5)
    np.testing.assert_allclose(c.coeffs, expected, atol=1e-13)


@pytest.mark.parametrize("lam", [0.5, 1.0, 1.5])
def test_zonal_round_trip(lam):
    rng = np.random.default_rng(7)
    c = random_band_limited(16, rng, "zonal", lam)
    back = analyze_zonal(lambda x: synth_zonal(c, np.arccos(x)), lam, 16)
    np.testing.assert_allclose(back.coeffs, c.coeffs, atol=1e-10)
    theta = np.linspace(0, np.pi, 50)
    again = synth_zonal(analyze_zonal(lambda x: synth_zonal(c, np.arccos(x)), lam, 16), theta)
    np.testing.assert_allclose(again, synth_zonal(c, theta), atol=1e-8)


def test_zonal_synthesis_trivia():
    theta = np.linspace(0, np.pi, 9)
    assert np.all(synth_zonal(LaplaceCoefficients.zeros(5), theta) == 0)
    const = synth_zonal(LaplaceCoefficients.zonal([2.0, 0, 0]), theta)
    np.testing.assert_allclose(const, const[0])


def test_s2_constant():
    c = analyze_s2(lambda x, y, z: np.ones_like(x), 4)
    assert c.coeffs[s2_index(4, 0, 0)] == pytest.approx(math.sqrt(FOUR_PI), rel=1e-13)
    mask = np.ones_like(c.coeffs, dtype=bool)
    mask[s2_index(4, 0, 0)] = False
    assert np.max(np.abs(c.coeffs[mask])) < 1e-13


@pytest.mark.parametrize(
    "f,k,m",
    [
        (lambda x, y, z: math.sqrt(5 / (16 * math.pi)) * (3 * z**2 - 1), 2, 0),
        (lambda x, y, z: math.sqrt(15 / (4 * math.pi)) * x * z, 2, 1),
        (lambda x, y, z: math.sqrt(15 / (4 * math.pi)) * y * z, 2, -1),
        (lambda x, y, z: math.sqrt(15 / (16 * math.pi)) * (x**2 - y**2), 2, 2),
        (lambda x, y, z: math.sqrt(15 / (4 * math.pi)) * x * y, 2, -2),
    ],
)
def test_s2_degree_two_basis(f, k, m):
    n = 4
    c = analyze_s2(f, n)
    expected = np.zeros_like(c.coeffs)
    expected[s2_index(n, k, m)] = 1.0
    np.testing.assert_allclose(c.coeffs, expected, atol=1e-13)


def test_s2_z_squared():
    n = 4
    c = analyze_s2(lambda x, y, z: z**2, n)
    support = set(zip(*np.nonzero(np.abs(c.coeffs) > 1e-13)))
    assert support == {s2_index(n, 0, 0), s2_index(n, 2, 0)}
    assert c.coeffs[s2_index(n, 0, 0)] == pytest.approx(math.sqrt(FOUR_PI) / 3, rel=1e-13)


def test_s2_round_trips():
    rng = np.random.default_rng(11)
    c = random_band_limited(12, rng, "s2")
    grid = sphere_grid(12)
    vals = synth_s2(c, grid)
    back = analyze_s2(lambda x, y, z: vals, 12, grid)
    np.testing.assert_allclose(back.coeffs, c.coeffs, atol=1e-10)
    np.testing.assert_allclose(synth_s2(back, grid), vals, atol=1e-8)


def test_s2_scattered_synthesis_matches_grid():
    rng = np.random.default_rng(2)
    c = random_band_limited(6, rng, "s2")
    grid = sphere_grid(6)
    th, ph = np.meshgrid(grid.theta, grid.phi, indexing="ij")
    np.testing.assert_allclose(synth_s2_points(c, th, ph), synth_s2(c, grid), atol=1e-12)


def test_coarse_grid_rejected():
    with pytest.raises(ResolutionError):
        analyze_s2(lambda x, y, z: x, 8, sphere_grid(3))


@given(seed=st.integers(0, 10_000), n=st.integers(1, 16))
@settings(max_examples=25, deadline=None)
def test_parseval_s2(seed, n):
    c = random_band_limited(n, np.random.default_rng(seed), "s2")
    grid = sphere_grid(n)
    grid_norm = math.sqrt(grid.integrate(synth_s2(c, grid) ** 2))
    assert parseval_l2_norm(c) == pytest.approx(grid_norm, rel=1e-8)


@given(seed=st.integers(0, 10_000), lam=st.sampled_from([0.5, 1.0, 1.5]))
@settings(max_examples=25, deadline=None)
def test_parseval_zonal(seed, lam):
    c = random_band_limited(10, np.random.default_rng(seed), "zonal", lam)
    q = build_theta_quadrature(lam, 12)
    assert parseval_l2_norm(c) == pytest.approx(zonal_lp_norm(synth_zonal(c, q.nodes), 2, q), rel=1e-8)


def test_analysis_is_linear():
    f = lambda x, y, z: x * y + z**3  # noqa: E731
    g = lambda x, y, z: np.exp(x)  # noqa: E731
    a, b = analyze_s2(f, 6), analyze_s2(g, 6)
    both = analyze_s2(lambda x, y, z: 2 * f(x, y, z) - g(x, y, z), 6)
    np.testing.assert_allclose(both.coeffs, (2 * a - b).coeffs, atol=1e-13)


def test_projections():
    c = random_band_limited(6, np.random.default_rng(0), "s2")
    parts = [project_degree(c, k) for k in range(7)]
    np.testing.assert_allclose(sum(parts[1:], parts[0]).coeffs, c.coeffs)
    np.testing.assert_array_equal(project_degree(parts[2], 2).coeffs, parts[2].coeffs)
    assert np.all(project_degree(parts[2], 3).coeffs == 0)
    assert np.all(project_degree(c, 9).coeffs == 0)
    const = LaplaceCoefficients.zonal([1.5])
    assert project_degree(const, 0).coeffs[0] == 1.5
    assert project_degree(const, 1).coeffs[0] == 0


def test_parseval_trivia():
    assert parseval_l2_norm(LaplaceCoefficients.zeros(3, "s2")) == 0
    assert parseval_l2_norm(LaplaceCoefficients.zonal([0, 0, 1.0])) == 1


def test_zonal_embedding_agrees():
    c = random_band_limited(5, np.random.default_rng(4), "zonal")
    s = zonal_to_s2(c)
    theta = np.linspace(0, np.pi, 7)
    np.testing.assert_allclose(synth_s2_points(s, theta, 0.3), synth_zonal(c, theta), atol=1e-13)


def test_lp_norms():
    c = LaplaceCoefficients.zonal([math.sqrt(FOUR_PI)])  # the constant 1
    assert lp_norm(c, 1) == pytest.approx(FOUR_PI, rel=1e-12)
    assert lp_norm(c, math.inf) == pytest.approx(1.0, rel=1e-12)
    s = zonal_to_s2(c)
    assert lp_norm(s, 1) == pytest.approx(FOUR_PI, rel=1e-12)
    assert lp_norm(s, 3) == pytest.approx(FOUR_PI ** (1 / 3), rel=1e-12)


@pytest.mark.parametrize("kind", ["zonal", "s2"])
def test_csv_round_trip_is_bit_exact(kind):
    c = random_band_limited(7, np.random.default_rng(5), kind)
    text = to_csv(c)
    assert text.splitlines()[0] == f"{kind},0.5,7"
    back = from_csv(text)
    assert back.kind == kind and back.N == 7
    np.testing.assert_array_equal(back.coeffs, c.coeffs)


def test_coefficients_are_immutable_and_validated():
    c = LaplaceCoefficients.zonal([1.0, 2.0])
    with pytest.raises(ValueError):
        c.coeffs[0] = 3.0
    with pytest.raises(ParameterError):
        LaplaceCoefficients.s2(np.zeros((3, 4)))
    with pytest.raises(ParameterError):
        LaplaceCoefficients(1.0, "s2", np.zeros((2, 3)))
