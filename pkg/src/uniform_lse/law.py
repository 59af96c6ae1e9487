"""Exact finite-sample laws of the regression coefficients, and inference on them.

Conditionally on the design, the estimation errors are weighted sums of the
noise terms:

    b0_hat - b0 = (1/d) * sum_k p_k  * eps_k
    b1_hat - b1 = (1/d) * sum_k p'_k * eps_k

so each coefficient estimate is a location-scale transform of a
WeightedUniformSum. Exact confidence intervals and two-sided tests follow
from its quantiles; the Gaussian large-sample approximations and the
conditions under which they are trustworthy live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.special import ndtr, ndtri

from .design import DesignSummary, FitResult
from .errors import DomainError
from .uniform_sum import DEFAULT_EXACT_LIMIT, WeightedUniformSum

Coefficient = Literal["beta0", "beta1"]

EXACT_UNIFORM = "exact_uniform"
GAUSSIAN_ASYMPTOTIC = "gaussian_asymptotic"


@dataclass(frozen=True)
class EstimatorLaw:
    """Law of one coefficient estimate: center + scale * W."""

    coefficient: Coefficient
    center: float
    scale: float
    core: WeightedUniformSum

    def pdf(self, x):
        d = 1.0 / self.scale
        return d * self.core.pdf(d * (np.asarray(x, dtype=float) - self.center))

    def cdf(self, x):
        d = 1.0 / self.scale
        return self.core.cdf(d * (np.asarray(x, dtype=float) - self.center))

    def ppf(self, q):
        return self.center + self.scale * self.core.ppf(q)

    def variance(self) -> float:
        return self.scale ** 2 * self.core.variance()

    def std(self) -> float:
        return math.sqrt(self.variance())

    @property
    def support(self) -> tuple[float, float]:
        h = self.scale * self.core.half_support
        return (self.center - h, self.center + h)


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    level: float
    method: str

    @property
    def half_width(self) -> float:
        return 0.5 * (self.hi - self.lo)


@dataclass(frozen=True)
class TestResult:
    coefficient: Coefficient
    statistic: float
    critical_value: float
    p_value: float
    reject: bool
    method: str


@dataclass(frozen=True)
class CltDiagnostics:
    """Condition quantities for the normal approximation.

    All three must trend to 0 as n grows for the Gaussian approximation of
    the coefficient laws (and their joint law) to be trustworthy.
    """

    cond_beta0: float
    cond_beta1: float
    cond_joint: float


def _core_weights(design: DesignSummary, coefficient: Coefficient) -> np.ndarray:
    if coefficient == "beta0":
        return design.p
    if coefficient == "beta1":
        return design.p_prime
    raise ValueError(f"coefficient must be 'beta0' or 'beta1', got {coefficient!r}")


def estimator_law(design: DesignSummary, theta: float, coefficient: Coefficient,
                  center: float = 0.0, limit: int = DEFAULT_EXACT_LIMIT) -> EstimatorLaw:
    """Exact law of a coefficient estimate when the true value is `center`."""
    core = WeightedUniformSum(_core_weights(design, coefficient), theta, limit=limit)
    return EstimatorLaw(coefficient=coefficient, center=float(center),
                        scale=1.0 / design.d, core=core)


def exact_confidence_interval(fit: FitResult, design: DesignSummary, theta: float,
                              coefficient: Coefficient, level: float,
                              limit: int = DEFAULT_EXACT_LIMIT) -> ConfidenceInterval:
    """Symmetric exact interval: coverage equals `level` exactly under the model."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must be in (0,1), got {level}")
    core = WeightedUniformSum(_core_weights(design, coefficient), theta, limit=limit)
    h = core.ppf(0.5 * (1.0 + level)) / design.d
    est = fit.beta0_hat if coefficient == "beta0" else fit.beta1_hat
    return ConfidenceInterval(lo=est - h, hi=est + h, level=level, method=EXACT_UNIFORM)


def exact_test(fit: FitResult, design: DesignSummary, theta: float,
               coefficient: Coefficient, alpha: float,
               limit: int = DEFAULT_EXACT_LIMIT) -> TestResult:
    """Two-sided exact test of H0: beta_j = 0 at significance alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0,1), got {alpha}")
    core = WeightedUniformSum(_core_weights(design, coefficient), theta, limit=limit)
    est = fit.beta0_hat if coefficient == "beta0" else fit.beta1_hat
    statistic = abs(est)
    critical = core.ppf(1.0 - 0.5 * alpha) / design.d
    p_value = min(1.0, max(0.0, 2.0 * (1.0 - core.cdf(design.d * statistic))))
    return TestResult(coefficient=coefficient, statistic=statistic,
                      critical_value=critical, p_value=p_value,
                      reject=bool(p_value < alpha), method=EXACT_UNIFORM)


def normal_approx_law(design: DesignSummary, theta: float, coefficient: Coefficient,
                      center: float = 0.0) -> tuple[float, float]:
    """Large-sample normal law (mean, variance) of a coefficient estimate.

    The standardized errors sqrt(d/S2)*(b0_hat - b0) and sqrt(d/n)*(b1_hat - b1)
    are asymptotically N(0, theta^2/3); undoing the standardization gives
    variance (theta^2/3) * S2/d for the intercept and (theta^2/3) * n/d for
    the slope.
    """
    if coefficient not in ("beta0", "beta1"):
        raise ValueError(f"coefficient must be 'beta0' or 'beta1', got {coefficient!r}")
    factor = design.S2 if coefficient == "beta0" else float(design.n)
    return float(center), (theta ** 2 / 3.0) * factor / design.d


def gaussian_confidence_interval(fit: FitResult, design: DesignSummary, sigma_sq: float,
                                 coefficient: Coefficient, level: float) -> ConfidenceInterval:
    """Textbook normal-theory interval with known error variance sigma_sq."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must be in (0,1), got {level}")
    if sigma_sq < 0.0:
        raise ValueError(f"sigma_sq must be nonnegative, got {sigma_sq}")
    q = float(ndtri(0.5 * (1.0 + level)))
    factor = design.S2 if coefficient == "beta0" else float(design.n)
    h = q * math.sqrt(sigma_sq * factor / design.d)
    est = fit.beta0_hat if coefficient == "beta0" else fit.beta1_hat
    return ConfidenceInterval(lo=est - h, hi=est + h, level=level,
                              method=GAUSSIAN_ASYMPTOTIC)


def gaussian_test(fit: FitResult, design: DesignSummary, sigma_sq: float,
                  coefficient: Coefficient, alpha: float) -> TestResult:
    """Two-sided normal-theory test of H0: beta_j = 0 with known sigma_sq."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0,1), got {alpha}")
    factor = design.S2 if coefficient == "beta0" else float(design.n)
    se = math.sqrt(sigma_sq * factor / design.d)
    est = fit.beta0_hat if coefficient == "beta0" else fit.beta1_hat
    statistic = abs(est)
    critical = float(ndtri(1.0 - 0.5 * alpha)) * se
    z = statistic / se if se > 0 else math.inf
    p_value = min(1.0, max(0.0, 2.0 * (1.0 - float(ndtr(z)))))
    return TestResult(coefficient=coefficient, statistic=statistic,
                      critical_value=critical, p_value=p_value,
                      reject=bool(p_value < alpha), method=GAUSSIAN_ASYMPTOTIC)


def clt_diagnostics(design: DesignSummary) -> CltDiagnostics:
    """Condition quantities max|p|/sqrt(d*S2), max|p'|/sqrt(d*n), S1/(n*S2)."""
    return CltDiagnostics(
        cond_beta0=float(np.max(np.abs(design.p)) / math.sqrt(design.d * design.S2)),
        cond_beta1=float(np.max(np.abs(design.p_prime)) / math.sqrt(design.d * design.n)),
        cond_joint=design.S1 / (design.n * design.S2),
    )


def standardized_sup_distance(design: DesignSummary, theta: float,
                              coefficient: Coefficient, grid_points: int = 1000,
                              limit: int = DEFAULT_EXACT_LIMIT) -> float:
    """Sup-distance between the standardized exact CDF and its normal limit.

    The exact CDF of sqrt(d/S2)*(b0_hat-b0) (resp. sqrt(d/n)*(b1_hat-b1)) is
    compared with the N(0, theta^2/3) CDF on a uniform grid over the exact
    support.
    """
    core = WeightedUniformSum(_core_weights(design, coefficient), theta, limit=limit)
    factor = design.S2 if coefficient == "beta0" else float(design.n)
    std_scale = math.sqrt(design.d / factor) / design.d  # maps W to the standardized variable
    half = core.half_support * std_scale
    grid = np.linspace(-half, half, grid_points)
    exact = core.cdf(grid / std_scale)
    sigma = theta / math.sqrt(3.0)
    normal = ndtr(grid / sigma)
    return float(np.max(np.abs(exact - normal)))
