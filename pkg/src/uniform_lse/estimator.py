"""Scikit-learn style front end for the uniform-error regression model."""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import design as _design
from . import law as _law
from .uniform_sum import DEFAULT_EXACT_LIMIT


class UniformErrorLinearRegression(RegressorMixin, BaseEstimator):
    """Simple linear regression with uniform errors U(-theta, theta).

    Fits y = b0 + b1 * x by least squares and exposes the exact finite-sample
    law of both coefficient estimates, exact confidence intervals and exact
    two-sided coefficient tests, alongside the usual Gaussian large-sample
    approximations.

    Parameters
    ----------
    theta : float or None, default=None
        Known half-width of the error distribution. When None, theta is
        estimated from the residuals (unbiased in theta^2) and downstream
        "exact" intervals become plug-in approximations.
    exact_limit : int, default=22
        Cap on the number of nonzero law weights for exact-mode evaluation.

    Attributes
    ----------
    intercept_ : float
        Fitted b0.
    coef_ : ndarray of shape (1,)
        Fitted b1.
    theta_sq_ : float
        Unbiased estimate of theta^2 (3 * ||resid||^2 / (n-2)).
    sigma_sq_ : float
        Gaussian-convention variance estimate (theta_sq_ / 3).
    design_ : DesignSummary
        Scalar design summaries (S1, S2, d) and weight vectors.
    residuals_ : ndarray
        y - y_hat.

    Examples
    --------
    >>> import numpy as np
    >>> x = np.linspace(-10, 10, 10)
    >>> rng = np.random.default_rng(0)
    >>> y = 7 + 4 * x + rng.uniform(-3, 3, x.size)
    >>> reg = UniformErrorLinearRegression(theta=3.0).fit(x.reshape(-1, 1), y)
    >>> ci = reg.confidence_interval("beta1", level=0.95)
    >>> ci.lo < 4 < ci.hi
    True
    """

    def __init__(self, theta: float | None = None, exact_limit: int = DEFAULT_EXACT_LIMIT):
        self.theta = theta
        self.exact_limit = exact_limit

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=3, y_numeric=True)
        if X.shape[1] != 1:
            raise ValueError(
                f"simple linear regression takes exactly one feature, got {X.shape[1]}"
            )
        if self.theta is not None and not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        x = X[:, 0].astype(float)
        result = _design.fit(_design.Dataset(x=x, y=y.astype(float)))
        self.n_features_in_ = 1
        self.x_ = x
        self.design_ = _design.summarize(x)
        self.intercept_ = result.beta0_hat
        self.coef_ = np.array([result.beta1_hat])
        self.residuals_ = result.residuals
        self.theta_sq_ = result.theta_sq_hat
        self.sigma_sq_ = result.sigma_sq_hat
        self.fit_result_ = result
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != 1:
            raise ValueError(
                f"simple linear regression takes exactly one feature, got {X.shape[1]}"
            )
        return self.intercept_ + self.coef_[0] * X[:, 0]

    # ---- inference -----------------------------------------------------
    def effective_theta(self) -> float:
        """Known theta if given, else the plug-in sqrt(theta_sq_)."""
        check_is_fitted(self, "theta_sq_")
        return float(self.theta) if self.theta is not None else math.sqrt(self.theta_sq_)

    def estimator_law(self, coefficient: _law.Coefficient, center: float | None = None):
        """Exact law of one coefficient estimate, centered on `center`.

        Default center is the fitted estimate.
        """
        check_is_fitted(self, "design_")
        if center is None:
            center = self.intercept_ if coefficient == "beta0" else self.coef_[0]
        return _law.estimator_law(self.design_, self.effective_theta(), coefficient,
                                  center=center, limit=self.exact_limit)

    def confidence_interval(self, coefficient: _law.Coefficient, level: float = 0.95,
                            method: str = _law.EXACT_UNIFORM):
        check_is_fitted(self, "design_")
        if method == _law.EXACT_UNIFORM:
            return _law.exact_confidence_interval(
                self.fit_result_, self.design_, self.effective_theta(),
                coefficient, level, limit=self.exact_limit)
        if method == _law.GAUSSIAN_ASYMPTOTIC:
            sigma_sq = (self.theta ** 2 / 3.0) if self.theta is not None else self.sigma_sq_
            return _law.gaussian_confidence_interval(
                self.fit_result_, self.design_, sigma_sq, coefficient, level)
        raise ValueError(f"unknown method {method!r}")

    def coefficient_test(self, coefficient: _law.Coefficient, alpha: float = 0.05,
                         method: str = _law.EXACT_UNIFORM):
        check_is_fitted(self, "design_")
        if method == _law.EXACT_UNIFORM:
            return _law.exact_test(self.fit_result_, self.design_,
                                   self.effective_theta(), coefficient, alpha,
                                   limit=self.exact_limit)
        if method == _law.GAUSSIAN_ASYMPTOTIC:
            sigma_sq = (self.theta ** 2 / 3.0) if self.theta is not None else self.sigma_sq_
            return _law.gaussian_test(self.fit_result_, self.design_, sigma_sq,
                                      coefficient, alpha)
        raise ValueError(f"unknown method {method!r}")

    def clt_diagnostics(self):
        """Condition quantities for trusting the normal approximation."""
        check_is_fitted(self, "design_")
        return _law.clt_diagnostics(self.design_)
