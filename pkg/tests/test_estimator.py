import numpy as np
import pytest
from numpy.testing import assert_allclose
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from uniform_lse.design import Dataset, fit as fit_dataset
from uniform_lse.errors import TooFewPoints
from uniform_lse.estimator import UniformErrorLinearRegression
from uniform_lse.law import exact_confidence_interval, exact_test


@pytest.fixture()
def xy(rng):
    x = rng.uniform(-10, 10, 15)
    y = 7.0 + 4.0 * x + rng.uniform(-3, 3, 15)
    return x.reshape(-1, 1), y


class TestSklearnContract:
    def test_get_set_params_roundtrip(self):
        reg = UniformErrorLinearRegression(theta=3.0, exact_limit=20)
        params = reg.get_params()
        assert params == {"theta": 3.0, "exact_limit": 20}
        other = clone(reg)
        assert other.get_params() == params

    def test_unfitted_raises(self):
        reg = UniformErrorLinearRegression()
        with pytest.raises(NotFittedError):
            reg.predict(np.zeros((2, 1)))

    def test_fit_predict_shapes(self, xy):
        X, y = xy
        reg = UniformErrorLinearRegression(theta=3.0).fit(X, y)
        pred = reg.predict(X)
        assert pred.shape == y.shape
        assert reg.coef_.shape == (1,)
        assert reg.n_features_in_ == 1
        assert reg.score(X, y) > 0.99

    def test_single_feature_enforced(self, xy):
        X, y = xy
        X2 = np.hstack([X, X])
        with pytest.raises(ValueError):
            UniformErrorLinearRegression().fit(X2, y)
        reg = UniformErrorLinearRegression().fit(X, y)
        with pytest.raises(ValueError):
            reg.predict(X2)

    def test_min_samples(self):
        with pytest.raises((ValueError, TooFewPoints)):
            UniformErrorLinearRegression().fit(np.zeros((2, 1)), np.zeros(2))


class TestEstimatorInference:
    def test_matches_functional_api(self, xy):
        X, y = xy
        reg = UniformErrorLinearRegression(theta=3.0).fit(X, y)
        data_fit = fit_dataset(Dataset(x=X[:, 0], y=y))
        assert reg.intercept_ == data_fit.beta0_hat
        assert reg.coef_[0] == data_fit.beta1_hat
        assert reg.theta_sq_ == data_fit.theta_sq_hat
        ci = reg.confidence_interval("beta1", level=0.95)
        ref = exact_confidence_interval(data_fit, reg.design_, 3.0, "beta1", 0.95)
        assert (ci.lo, ci.hi) == (ref.lo, ref.hi)
        tr = reg.coefficient_test("beta0", alpha=0.05)
        ref_t = exact_test(data_fit, reg.design_, 3.0, "beta0", 0.05)
        assert tr.p_value == ref_t.p_value

    def test_plugin_theta_when_unknown(self, xy):
        X, y = xy
        reg = UniformErrorLinearRegression().fit(X, y)
        assert reg.effective_theta() == pytest.approx(np.sqrt(reg.theta_sq_))
        ci = reg.confidence_interval("beta1")
        assert ci.lo < 4.0 < ci.hi

    def test_gaussian_method(self, xy):
        X, y = xy
        reg = UniformErrorLinearRegression(theta=3.0).fit(X, y)
        ci = reg.confidence_interval("beta1", method="gaussian_asymptotic")
        exact = reg.confidence_interval("beta1", method="exact_uniform")
        assert ci.half_width == pytest.approx(exact.half_width, rel=0.1)

    def test_law_and_diagnostics(self, xy):
        X, y = xy
        reg = UniformErrorLinearRegression(theta=3.0).fit(X, y)
        law = reg.estimator_law("beta1")
        assert law.center == reg.coef_[0]
        assert law.pdf(law.center) > 0
        diag = reg.clt_diagnostics()
        assert 0 < diag.cond_beta0 <= 1

    def test_exact_line(self):
        x = np.linspace(0, 5, 12)
        reg = UniformErrorLinearRegression(theta=1.0).fit(x.reshape(-1, 1), 7 + 4 * x)
        assert reg.intercept_ == pytest.approx(7.0, rel=1e-12)
        assert reg.coef_[0] == pytest.approx(4.0, rel=1e-12)
        assert reg.theta_sq_ == pytest.approx(0.0, abs=1e-18)
        assert_allclose(reg.predict(np.array([[10.0]])), [47.0], rtol=1e-12)
