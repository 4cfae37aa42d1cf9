"""Coordinate-descent solver: oracles, certificates, and population alignment."""

import numpy as np
import pytest

from ulasso.extremes import extract_extreme_subset
from ulasso.model import DesignSpec
from ulasso.sampler import SimulationConfig, XiLaw, design_from_config, gen_population
from ulasso.solver import (
    CenteredDesign,
    _coordinate_descent,
    center,
    center_xy,
    gradient_t,
    kkt_residual,
    lasso_fit,
    lasso_path,
    logistic_lasso_fit,
    objective_value,
)


def _random_design(rng, n, p, y_scale=1.0):
    x = rng.standard_normal((n, p))
    y = rng.standard_normal(n) * y_scale
    return center_xy(x, y)


def _ista_reference(design, lam, iters=1_000_000, tol=1e-13):
    """Independent proximal-gradient solver for the same objective.

    Fixed step 1/L on the smooth part (2/n) x' x, soft-threshold of lam/2 * step
    per iteration, run to stationarity or the iteration cap.
    """
    xt, yt = design.x_tilde, design.y_tilde
    n, p = xt.shape
    gram = xt.T @ xt / n
    corr = xt.T @ yt / n
    lip = 2.0 * np.linalg.eigvalsh(gram).max()
    step = 1.0 / lip
    thr = step * lam
    beta = np.zeros(p)
    for _ in range(iters):
        grad = 2.0 * (gram @ beta - corr)
        z = beta - step * grad
        new = np.sign(z) * np.maximum(np.abs(z) - thr, 0.0)
        if np.abs(new - beta).max() < tol:
            beta = new
            break
        beta = new
    return beta


class TestCenter:
    def test_constant_column_zeroed(self):
        x = np.column_stack([np.full(6, 3.0), np.arange(6.0)])
        d = center_xy(x, np.arange(6.0))
        assert np.all(d.x_tilde[:, 0] == 0.0)
        assert d.col_sq_norms[0] == 0.0

    def test_balanced_labels_center_to_halves(self, pop_100k):
        sub = extract_extreme_subset(pop_100k, 0.02)
        d = center(sub)
        assert set(np.unique(d.y_tilde)) == {-0.5, 0.5}
        assert d.y_mean == 0.5

    def test_columns_mean_zero_random(self, rng):
        x = rng.standard_normal((4, 2)) * 7.0 + 3.0
        d = center_xy(x, rng.standard_normal(4))
        # direct summation oracle
        for j in range(2):
            assert abs(sum(d.x_tilde[:, j])) < 1e-12
        assert abs(sum(d.y_tilde)) < 1e-12

    def test_invariant_violation_rejected(self):
        with pytest.raises(ValueError, match="sum to zero"):
            CenteredDesign(
                x_tilde=np.ones((3, 1)),
                y_tilde=np.array([-1.0, 0.0, 1.0]),
                col_means=np.zeros(1),
                y_mean=0.0,
                col_sq_norms=np.ones(1),
            )


class TestGradient:
    def test_zero_at_ols(self, rng):
        d = _random_design(rng, 40, 5)
        beta_ols = np.linalg.lstsq(d.x_tilde, d.y_tilde, rcond=None)[0]
        assert np.abs(gradient_t(d, beta_ols)).max() <= 1e-8

    def test_at_origin(self, rng):
        d = _random_design(rng, 30, 4)
        expected = d.x_tilde.T @ d.y_tilde / 30
        assert np.allclose(gradient_t(d, np.zeros(4)), expected)

    def test_matches_finite_differences(self, rng):
        d = _random_design(rng, 5, 3)
        beta = rng.standard_normal(3)
        h = 1e-6
        grad_fd = np.empty(3)
        for j in range(3):
            up, dn = beta.copy(), beta.copy()
            up[j] += h
            dn[j] -= h
            grad_fd[j] = (objective_value(d, up, 0.0) - objective_value(d, dn, 0.0)) / (2 * h)
        assert np.abs(gradient_t(d, beta) - (-0.5) * grad_fd).max() <= 1e-6


class TestLassoFit:
    def test_single_predictor_closed_form(self):
        # unit second moment, unit correlation, lam = 1 -> soft(1, 1/2) = 1/2
        x = np.array([[1.0], [-1.0], [1.0], [-1.0]])
        y = np.array([1.0, -1.0, 1.0, -1.0])
        d = center_xy(x, y)
        fit = lasso_fit(d, 1.0)
        assert fit.beta_hat[0] == pytest.approx(0.5, abs=1e-12)

    def test_lam_zero_matches_ols(self, rng):
        d = _random_design(rng, 60, 8)
        fit = lasso_fit(d, 0.0, tol=1e-10)
        beta_ols = np.linalg.lstsq(d.x_tilde, d.y_tilde, rcond=None)[0]
        assert np.abs(fit.beta_hat - beta_ols).max() <= 1e-6

    def test_lam_max_gives_exact_zero(self, rng):
        d = _random_design(rng, 50, 6)
        lam_max = 2.0 * np.abs(d.x_tilde.T @ d.y_tilde / 50).max()
        for lam in (lam_max, 1.5 * lam_max):
            fit = lasso_fit(d, lam)
            assert np.all(fit.beta_hat == 0.0)
            # subgradient check: zero is stationary
            assert kkt_residual(d, fit.beta_hat, lam) == 0.0

    def test_zero_variance_column_frozen(self, rng):
        x = rng.standard_normal((30, 3))
        x[:, 1] = 4.0
        d = center_xy(x, rng.standard_normal(30))
        fit = lasso_fit(d, 0.01)
        assert fit.beta_hat[1] == 0.0

    def test_kkt_certificate_on_converged_fits(self, rng):
        tol = 1e-7
        for _ in range(20):
            n = int(rng.integers(20, 120))
            p = int(rng.integers(2, 15))
            d = _random_design(rng, n, p)
            lam = float(rng.uniform(0.0, 0.5))
            fit = lasso_fit(d, lam, tol=tol)
            assert fit.converged
            assert fit.kkt_residual <= 10.0 * tol
            assert np.abs(gradient_t(d, fit.beta_hat)).max() <= lam / 2.0 + 10.0 * tol

    def test_objective_monotone_across_sweeps(self, rng):
        d = _random_design(rng, 80, 10)
        log = []
        _coordinate_descent(
            d.x_tilde, d.y_tilde, d.col_sq_norms, 0.05, 1e-9, 500,
            objective_log=log,
        )
        diffs = np.diff(np.asarray(log))
        assert np.all(diffs <= 1e-12 * (1.0 + np.abs(np.asarray(log[:-1]))))

    def test_matches_proximal_gradient_reference(self, rng):
        for _ in range(25):
            n = int(rng.integers(5, 31))
            p = int(rng.integers(1, 4))
            d = _random_design(rng, n, p)
            lam = float(rng.uniform(0.0, 1.0))
            fit = lasso_fit(d, lam, tol=1e-10)
            ref = _ista_reference(d, lam)
            assert np.abs(fit.beta_hat - ref).max() <= 1e-5

    def test_standardize_back_transform(self, rng):
        x = rng.standard_normal((100, 5)) * np.array([1.0, 10.0, 0.1, 5.0, 2.0])
        y = x[:, 0] - 0.3 * x[:, 1] + rng.standard_normal(100)
        d = center_xy(x, y)
        fit = lasso_fit(d, 0.0, tol=1e-10, standardize=True)
        beta_ols = np.linalg.lstsq(d.x_tilde, d.y_tilde, rcond=None)[0]
        assert np.abs(fit.beta_hat - beta_ols).max() <= 1e-6


class TestLassoPath:
    def test_first_point_of_grid_is_null(self, rng):
        d = _random_design(rng, 40, 5)
        lam_max = 2.0 * np.abs(d.x_tilde.T @ d.y_tilde / 40).max()
        fits = lasso_path(d, np.array([lam_max, lam_max / 2.0]))
        assert np.all(fits[0].beta_hat == 0.0)

    def test_warm_equals_cold(self, rng):
        d = _random_design(rng, 200, 20)
        lam_max = 2.0 * np.abs(d.x_tilde.T @ d.y_tilde / 200).max()
        lams = lam_max * np.logspace(0, -3, 30)
        tol = 1e-8
        warm = lasso_path(d, lams, tol=tol)
        for lam, fit in zip(lams, warm):
            cold = lasso_fit(d, float(lam), tol=tol)
            assert np.abs(fit.beta_hat - cold.beta_hat).max() <= 10.0 * tol

    def test_duplicate_lambda_rejected(self, rng):
        d = _random_design(rng, 20, 3)
        with pytest.raises(ValueError, match="descending"):
            lasso_path(d, np.array([0.5, 0.5, 0.1]))

    def test_l1_norm_monotone_along_path(self, rng):
        tol = 1e-8
        d = _random_design(rng, 150, 12)
        lam_max = 2.0 * np.abs(d.x_tilde.T @ d.y_tilde / 150).max()
        lams = lam_max * np.logspace(0, -4, 50)
        fits = lasso_path(d, lams, tol=tol)
        norms = np.array([np.abs(f.beta_hat).sum() for f in fits])
        assert np.all(np.diff(norms) >= -10.0 * tol)


class TestLogisticLasso:
    def test_null_model_at_large_lam(self, rng):
        x = rng.standard_normal((200, 4))
        y = (rng.random(200) < 0.3).astype(float)
        fit, b0 = logistic_lasso_fit(x, y, 50.0)
        assert np.all(fit.beta_hat == 0.0)
        p_bar = y.mean()
        assert b0 == pytest.approx(np.log(p_bar / (1 - p_bar)), abs=1e-8)

    def test_matches_newton_oracle_unpenalized(self, rng):
        n, p = 500, 2
        x = rng.standard_normal((n, p))
        truth = np.array([1.0, -0.5])
        prob = 1.0 / (1.0 + np.exp(-(0.2 + x @ truth)))
        y = (rng.random(n) < prob).astype(float)
        design = np.column_stack([np.ones(n), x])
        w = np.zeros(p + 1)
        for _ in range(50):
            eta = design @ w
            mu = 1.0 / (1.0 + np.exp(-eta))
            hess = (design * (mu * (1 - mu))[:, None]).T @ design
            step = np.linalg.solve(hess, design.T @ (y - mu))
            w = w + step
            if np.abs(step).max() < 1e-12:
                break
        fit, b0 = logistic_lasso_fit(x, y, 0.0, tol=1e-9)
        assert abs(b0 - w[0]) <= 1e-4
        assert np.abs(fit.beta_hat - w[1:]).max() <= 1e-4

    def test_balanced_labels_zero_design(self):
        x = np.zeros((10, 3))
        y = np.array([0.0, 1.0] * 5)
        fit, b0 = logistic_lasso_fit(x, y, 0.1)
        assert np.all(fit.beta_hat == 0.0)
        assert b0 == pytest.approx(0.0, abs=1e-12)

    def test_single_class_rejected(self, rng):
        x = rng.standard_normal((20, 2))
        with pytest.raises(ValueError, match="both classes"):
            logistic_lasso_fit(x, np.ones(20), 0.1)

    def test_separation_flagged(self):
        x = np.linspace(-2, 2, 40)[:, None]
        y = (x[:, 0] > 0).astype(float)
        fit, _ = logistic_lasso_fit(x, y, 0.0)
        assert not fit.converged


def test_unpenalized_tail_fit_aligns_with_surrogate_index():
    sim = SimulationConfig(p=20, rho=0.0, xi_law=XiLaw.NORMAL_3_1, n_pop=200_000, seed=77)
    spec = design_from_config(sim)
    ds = gen_population(spec, sim.n_pop, 77)
    sub = extract_extreme_subset(ds, 0.02)
    fit = lasso_fit(center(sub), 0.0, tol=1e-9)
    cos = fit.beta_hat @ spec.alpha0 / (
        np.linalg.norm(fit.beta_hat) * np.linalg.norm(spec.alpha0)
    )
    assert abs(cos) >= 0.99
