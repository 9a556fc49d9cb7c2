import math

import numpy as np
import pytest

from dpreg import (
    Dataset,
    Group1Stats,
    Group2Stats,
    NoiseLedger,
    NoisyGroupStats,
    PolyFitResult,
    RandomStream,
    ZeroNoiseStream,
    dp_rss_fit,
    dp_rss_poly_fit,
    poly_exact_groups,
    poly_group1_contribution,
    poly_group2_contribution,
    poly_refined_estimates,
    refine,
)
from dpreg.polynomial import _solve_normal_equations


def test_contribution_dimensions():
    g1 = poly_group1_contribution(0.5, 2)
    g2 = poly_group2_contribution(0.5, 0.5, 2)
    assert g1.shape == (5,)
    assert g2.shape == (4,)


def test_degree_one_matches_linear_transforms():
    x, y = 0.3, 0.8
    assert poly_group1_contribution(x, 1) == pytest.approx((0.09, 0.21, 0.7), abs=1e-15)
    assert poly_group2_contribution(x, y, 1) == pytest.approx(
        (x * y, (1 - x) * y, 1 - y), abs=1e-15)


def test_boundary_contributions():
    d = 3
    at0 = poly_group1_contribution(0.0, d)
    assert at0[:-1] == pytest.approx(np.zeros(2 * d), abs=0)
    assert at0[-1] == 1.0
    at1 = poly_group1_contribution(1.0, d)
    assert at1[0] == 1.0
    assert at1[1:] == pytest.approx(np.zeros(2 * d), abs=0)


@pytest.mark.parametrize("degree", [1, 2, 3, 5])
def test_contributions_nonnegative_and_sum_to_one(degree):
    g = RandomStream(degree, 0)
    x = g.uniform(500)
    y = g.uniform(500)
    tol = 4.0 * np.finfo(np.float64).eps
    c1 = poly_group1_contribution(x, degree)
    c2 = poly_group2_contribution(x, y, degree)
    assert c1.shape == (500, 2 * degree + 1)
    assert c2.shape == (500, degree + 2)
    for c in (c1, c2):
        assert (c >= 0.0).all()
        assert np.abs(c.sum(axis=-1) - 1.0).max() <= tol


def test_degree_validation():
    for bad in (0, -1, 1.5):
        with pytest.raises(ValueError):
            poly_group1_contribution(0.5, bad)
        with pytest.raises(ValueError):
            dp_rss_poly_fit(Dataset(np.array([0.5]), np.array([0.5])), bad,
                            1.0, RandomStream(0, 0))


@pytest.mark.parametrize("degree", [1, 2, 3])
def test_noise_free_estimates_recover_power_sums(degree, random_dataset):
    # Oracle: plain fsum of the monomials, computed without the telescoped
    # group representation.
    ds = random_dataset(degree, n=150)
    g1, g2 = poly_exact_groups(ds, degree)
    n_hat, s_x, s_xy = poly_refined_estimates(g1, g2, degree)
    assert n_hat == pytest.approx(150.0, rel=1e-12)
    for ell in range(1, 2 * degree + 1):
        want = math.fsum(ds.x ** ell)
        assert s_x[ell - 1] == pytest.approx(want, rel=1e-10)
    for ell in range(0, degree + 1):
        want = math.fsum((ds.x ** ell) * ds.y)
        assert s_xy[ell] == pytest.approx(want, rel=1e-10)


def test_refined_estimates_validate_lengths():
    with pytest.raises(ValueError):
        poly_refined_estimates(np.zeros(4), np.zeros(4), 2)


def test_degree_one_estimates_match_linear_refinement(random_dataset):
    # Same noisy readings through both code paths must agree exactly.
    ds = random_dataset(9, n=70)
    g1, g2 = poly_exact_groups(ds, 1)
    z = RandomStream(40, 0).laplace(2.0, 6)
    noisy1 = g1 + z[:3]
    noisy2 = g2 + z[3:]
    n_hat, s_x, s_xy = poly_refined_estimates(noisy1, noisy2, 1)
    ref = refine(NoisyGroupStats(Group1Stats(*noisy1), Group2Stats(*noisy2), 0.5, 0.5))
    assert n_hat == pytest.approx(ref.n_hat, rel=1e-12)
    assert s_x[0] == pytest.approx(ref.s_x, rel=1e-12)
    assert s_x[1] == pytest.approx(ref.s_x2, rel=1e-12)
    assert s_xy[0] == pytest.approx(ref.s_y, rel=1e-12)
    assert s_xy[1] == pytest.approx(ref.s_xy, rel=1e-12)


def test_degree_one_fit_matches_linear_fit(random_dataset):
    for seed in range(30):
        ds = random_dataset(seed, n=90)
        lin = dp_rss_fit(ds, 0.7, RandomStream(seed, 2))
        poly = dp_rss_poly_fit(ds, 1, 0.7, RandomStream(seed, 2))
        assert poly.coeffs[0] == pytest.approx(lin.alpha_hat, abs=1e-10)
        assert poly.coeffs[1] == pytest.approx(lin.beta_hat, abs=1e-10)
        assert poly.fallback == lin.fallback


def test_quadratic_zero_noise_recovery():
    x = np.linspace(0.0, 1.0, 50)
    y = 0.25 * x * x + 0.25 * x + 0.2
    res = dp_rss_poly_fit(Dataset(x, y), 2, 1.0, ZeroNoiseStream(0, 0))
    assert not res.fallback
    assert res.degree == 2
    assert res.coeffs == pytest.approx((0.25, 0.25, 0.2), abs=1e-10)


def test_poly_fallback_paths():
    empty = Dataset(np.array([]), np.array([]))
    res = dp_rss_poly_fit(empty, 2, 1.0, ZeroNoiseStream(0, 0))
    assert res == PolyFitResult((0.0, 0.0, 0.5), fallback=True)
    assert res.degree == 2
    assert dp_rss_poly_fit(empty, 2, 1.0, RandomStream(0, 0)).fallback

    flat = Dataset(np.full(8, 0.4), np.linspace(0.1, 0.8, 8))
    res = dp_rss_poly_fit(flat, 2, 1.0, ZeroNoiseStream(0, 0))
    assert res.fallback and res.coeffs == (0.0, 0.0, 0.5)


def test_normal_equation_solver_flags_singularity():
    assert _solve_normal_equations(np.eye(3), np.array([1.0, 2.0, 3.0])) == pytest.approx(
        [1.0, 2.0, 3.0])
    assert _solve_normal_equations(np.ones((2, 2)), np.ones(2)) is None
    nearly = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-15]])
    assert _solve_normal_equations(nearly, np.ones(2)) is None


def test_poly_budget_ledger(random_dataset):
    led = NoiseLedger()
    dp_rss_poly_fit(random_dataset(1, n=40), 3, 0.6, RandomStream(0, 0), ledger=led)
    assert led.total_epsilon() == pytest.approx(0.6, abs=1e-12)
    assert all(e.scale == pytest.approx(2.0 / 0.6) for e in led.events)


def test_poly_sensitivity_on_grid():
    pts = np.linspace(0.0, 1.0, 21)
    xg, yg = np.meshgrid(pts, pts, indexing="ij")
    c1 = poly_group1_contribution(xg, 2)
    c2 = poly_group2_contribution(xg, yg, 2)
    assert np.abs(np.abs(c1).sum(axis=-1) - 1.0).max() <= 1e-12
    assert np.abs(np.abs(c2).sum(axis=-1) - 1.0).max() <= 1e-12
