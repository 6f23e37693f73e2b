"""Model-fit tests with exact and QR-based oracles."""

import numpy as np
import pytest

from netconformal.regression import fit_kernel_smoother, fit_ols, score, silverman_bandwidth
from netconformal.rng import substream


class TestOls:
    def test_exact_linear_fit(self):
        x = np.arange(10.0)
        model = fit_ols(x, 2.0 * x)
        assert model.coef[0] == pytest.approx(0.0, abs=1e-10)
        assert model.coef[1] == pytest.approx(2.0, abs=1e-10)

    def test_constant_response(self):
        x = substream(30, 0).standard_normal((12, 2))
        model = fit_ols(x, np.full(12, 7.5))
        assert model.coef[0] == pytest.approx(7.5, abs=1e-10)
        assert np.allclose(model.coef[1:], 0.0, atol=1e-10)

    def test_matches_qr_oracle(self):
        # Independent oracle: least squares via numpy's QR/SVD path.
        rng = substream(30, 1)
        for _ in range(100):
            x = rng.standard_normal((20, 3))
            y = rng.standard_normal(20)
            model = fit_ols(x, y)
            design = np.column_stack([np.ones(20), x])
            q, r = np.linalg.qr(design)
            oracle = np.linalg.solve(r, q.T @ y)
            assert np.max(np.abs(model.coef - oracle)) < 1e-8

    def test_residuals_orthogonal_to_design(self):
        rng = substream(30, 2)
        x = rng.standard_normal((40, 3))
        y = rng.standard_normal(40)
        model = fit_ols(x, y)
        design = np.column_stack([np.ones(40), x])
        resid = y - model.predict(x)
        assert np.max(np.abs(design.T @ resid)) < 1e-8

    def test_rank_deficiency_instructs_ridge(self):
        x = np.ones((10, 2))  # duplicate of the intercept column
        with pytest.raises(np.linalg.LinAlgError, match="ridge"):
            fit_ols(x, np.arange(10.0))
        fit_ols(x, np.arange(10.0), ridge=1e-6)  # regularized path works

    def test_ridge_shrinks_coefficients(self):
        rng = substream(30, 3)
        x = rng.standard_normal((30, 2))
        y = x @ np.array([3.0, -2.0]) + rng.standard_normal(30)
        loose = fit_ols(x, y)
        tight = fit_ols(x, y, ridge=1e3)
        assert np.linalg.norm(tight.coef) < np.linalg.norm(loose.coef)


class TestKernelSmoother:
    def test_huge_bandwidth_predicts_mean(self):
        rng = substream(31, 0)
        x = rng.standard_normal(25)
        y = rng.standard_normal(25)
        model = fit_kernel_smoother(x, y, bandwidth=1e8)
        assert model.predict(np.array([0.3]))[0] == pytest.approx(y.mean(), abs=1e-6)

    def test_tiny_bandwidth_interpolates_training_point(self):
        x = np.array([0.0, 1.0, 2.0])
        y = np.array([5.0, -1.0, 4.0])
        model = fit_kernel_smoother(x, y, bandwidth=1e-4)
        assert model.predict(np.array([1.0]))[0] == pytest.approx(-1.0, abs=1e-9)

    def test_moderate_bandwidth_beats_variance_on_linear_data(self):
        rng = substream(31, 1)
        x = np.sort(rng.uniform(-2, 2, size=80))
        y = 3.0 * x + 0.1 * rng.standard_normal(80)
        model = fit_kernel_smoother(x, y)
        mse = np.mean((y - model.predict(x[:, None])) ** 2)
        assert mse < y.var()

    def test_silverman_default(self):
        x = substream(31, 2).standard_normal(100)
        h = silverman_bandwidth(x)
        assert h.shape == (1,)
        assert 0.2 < h[0] < 1.0  # 1.06 * sigma * 100^(-1/5) ~ 0.42 for sigma ~ 1

    def test_bandwidth_must_be_positive(self):
        with pytest.raises(ValueError):
            fit_kernel_smoother(np.arange(5.0), np.arange(5.0), bandwidth=0.0)


class TestScore:
    def test_zero_at_fitted_value(self):
        model = fit_ols(np.arange(6.0), 2.0 * np.arange(6.0))
        mu = model.predict(np.array([3.0]))[0]
        assert score(model, mu, np.array([3.0]))[0] == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_around_prediction(self):
        model = fit_ols(np.arange(6.0), 2.0 * np.arange(6.0) + 1.0)
        mu = model.predict(np.array([2.0]))[0]
        for delta in (0.5, 1.7, 10.0):
            up = score(model, mu + delta, np.array([2.0]))[0]
            down = score(model, mu - delta, np.array([2.0]))[0]
            assert up == pytest.approx(down, abs=1e-12)

    def test_matches_hand_computed_residual(self):
        # 3-point fit: x = (0, 1, 2), y = (0, 3, 4); slope 2, intercept 1/3.
        x = np.array([0.0, 1.0, 2.0])
        y = np.array([0.0, 3.0, 4.0])
        model = fit_ols(x, y)
        assert model.coef[1] == pytest.approx(2.0, abs=1e-10)
        assert model.coef[0] == pytest.approx(1.0 / 3.0, abs=1e-10)
        s = score(model, 5.0, np.array([1.0]))[0]
        assert s == pytest.approx(abs(5.0 - (1.0 / 3.0 + 2.0)), abs=1e-10)

    def test_score_nonnegative(self):
        rng = substream(32, 0)
        model = fit_ols(rng.standard_normal((10, 2)), rng.standard_normal(10))
        qs = rng.standard_normal((50, 2))
        ys = rng.standard_normal(50)
        assert np.all(score(model, ys, qs) >= 0)

    def test_score_concatenates_network_covariates(self):
        rng = substream(32, 1)
        feats = rng.standard_normal((10, 3))
        y = rng.standard_normal(10)
        model = fit_ols(feats, y)
        s_joint = score(model, y[0], feats[0, :1], z=feats[0, 1:])
        s_flat = score(model, y[0], feats[0])
        assert s_joint[0] == pytest.approx(s_flat[0], abs=1e-12)
