import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import ndtri
from scipy.stats import chi2

from uniform_lse.design import Dataset, DesignSummary, fit, summarize
from uniform_lse.errors import DomainError, ExactModeTooLarge
from uniform_lse.law import (
    clt_diagnostics,
    estimator_law,
    exact_confidence_interval,
    exact_test,
    gaussian_confidence_interval,
    gaussian_test,
    normal_approx_law,
    standardized_sup_distance,
)
from uniform_lse.simulate import Equispaced, run_replicates
from conftest import demo_config


def erf_normal_quantile(q: float) -> float:
    """Bisection on the erf-based normal CDF; independent of scipy.ndtri."""
    lo, hi = -10.0, 10.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if 0.5 * (1.0 + math.erf(mid / math.sqrt(2.0))) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def two_point_design() -> DesignSummary:
    # x = (0, 1): d = 1, p = (1, 0), p' = (-1, 1). Too small for summarize's
    # n >= 3 contract, but a legal DesignSummary for law-level checks.
    return DesignSummary(n=2, S1=1.0, S2=1.0, d=1.0,
                         p=np.array([1.0, 0.0]), p_prime=np.array([-1.0, 1.0]))


class TestEstimatorLaw:
    def test_density_at_center(self, demo_design):
        law = estimator_law(demo_design, 3.0, "beta0", center=7.0)
        d = demo_design.d
        assert law.pdf(7.0) == pytest.approx(d * law.core.pdf(0.0), rel=1e-14)

    def test_symmetric_three_point_design(self):
        design = summarize([-1.0, 0.0, 1.0])
        law = estimator_law(design, 1.0, "beta1", center=0.0)
        assert_allclose(np.sort(law.core.eff_weights), [3.0, 3.0])
        assert law.variance() == pytest.approx(1.0 / 6.0, rel=1e-14)
        _, var = normal_approx_law(design, 1.0, "beta1")
        assert var == pytest.approx(1.0 / 6.0, rel=1e-14)

    def test_variance_identities_random_designs(self, rng):
        for _ in range(25):
            x = rng.uniform(-50, 50, rng.integers(3, 15))
            if np.ptp(x) < 1e-6:
                continue
            design = summarize(x)
            theta = rng.uniform(0.3, 4)
            for coefficient, factor in (("beta0", design.S2), ("beta1", design.n)):
                law = estimator_law(design, theta, coefficient)
                expected = theta**2 / 3.0 * factor / design.d
                assert law.variance() == pytest.approx(expected, rel=1e-12)

    def test_law_cdf_ppf_consistency(self, demo_design):
        law = estimator_law(demo_design, 3.0, "beta1", center=4.0)
        qs = np.linspace(0.05, 0.95, 19)
        assert_allclose(law.cdf(law.ppf(qs)), qs, atol=1e-12)
        assert law.ppf(0.5) == pytest.approx(4.0)

    def test_support_is_bounded(self, demo_design):
        law = estimator_law(demo_design, 3.0, "beta0", center=7.0)
        lo, hi = law.support
        assert lo == pytest.approx(7.0 - law.scale * law.core.half_support)
        assert hi > 7.0

    def test_exact_mode_cap_propagates(self, demo_design):
        with pytest.raises(ExactModeTooLarge):
            estimator_law(demo_design, 3.0, "beta0", limit=5)

    def test_histogram_chi_square_consistency(self, demo_design):
        """Exact beta0 law vs a seeded Monte Carlo histogram (50 bins)."""
        config = demo_config(replicates=100_000)
        run = run_replicates(config, ci_method="gaussian:3.0")
        law = estimator_law(demo_design, 3.0, "beta0", center=7.0)
        qs = np.linspace(0.0, 1.0, 51)[1:-1]
        edges = np.concatenate([[law.support[0] - 1e-9], law.ppf(qs),
                                [law.support[1] + 1e-9]])
        counts, _ = np.histogram(run.beta0_hat, bins=edges)
        expected = len(run) / 50.0
        stat = float(np.sum((counts - expected) ** 2 / expected))
        p = float(chi2.sf(stat, df=49))
        assert p > 0.001


class TestExactInference:
    def test_single_effective_weight_interval(self):
        # One nonzero weight: the core is U(-theta, theta), so the 95%
        # half-width is 0.95 * theta / d.
        design = two_point_design()
        fit_result = fit(Dataset(x=np.array([0.0, 1.0, 1.0]),
                                 y=np.array([0.0, 1.0, 1.0])))
        ci = exact_confidence_interval(fit_result, design, 3.0, "beta0", 0.95)
        assert ci.half_width == pytest.approx(2.85, rel=1e-12)

    def test_three_point_single_weight_design(self):
        # x = (0, 1, 1) gives p = (2, 0, 0): also a single-weight core, with
        # d = 2, so the half-width is 0.95 * 2 * theta / 2 = 2.85 again.
        data = Dataset(x=np.array([0.0, 1.0, 1.0]), y=np.array([0.5, 1.0, 1.5]))
        design = summarize(data.x)
        assert_allclose(design.p, [2.0, 0.0, 0.0])
        ci = exact_confidence_interval(fit(data), design, 3.0, "beta0", 0.95)
        assert ci.half_width == pytest.approx(2.85, rel=1e-12)

    def test_interval_bounded_as_level_approaches_one(self, demo_design):
        data_fit = _demo_fit(demo_design)
        ci = exact_confidence_interval(data_fit, demo_design, 3.0, "beta1", 1 - 1e-9)
        law = estimator_law(demo_design, 3.0, "beta1")
        assert ci.half_width <= law.scale * law.core.half_support * (1 + 1e-9)

    def test_level_domain(self, demo_design):
        with pytest.raises(DomainError):
            exact_confidence_interval(_demo_fit(demo_design), demo_design, 3.0,
                                      "beta1", 1.5)

    def test_test_at_zero_estimate(self, demo_design):
        flat = fit(Dataset(x=np.array([0.0, 1.0, 2.0]),
                           y=np.array([1.0, 1.0, 1.0])))
        design3 = summarize([0.0, 1.0, 2.0])
        r = exact_test(flat, design3, 1.0, "beta1", 0.05)
        assert r.p_value == 1.0
        assert not r.reject

    def test_outside_support_rejects_everywhere(self, demo_design):
        data_fit = _demo_fit(demo_design, beta1=1000.0)
        r = exact_test(data_fit, demo_design, 3.0, "beta1", 1e-6)
        assert r.p_value == 0.0
        assert r.reject

    def test_ci_test_duality(self, rng):
        for _ in range(40):
            x = rng.uniform(-10, 10, 8)
            y = rng.uniform(-1, 1, 8) + rng.normal(0, 0.5) * x
            data = Dataset(x=x, y=y)
            design = summarize(x)
            f = fit(data)
            alpha = float(rng.uniform(0.01, 0.2))
            for coefficient in ("beta0", "beta1"):
                ci = exact_confidence_interval(f, design, 2.0, coefficient, 1 - alpha)
                tr = exact_test(f, design, 2.0, coefficient, alpha)
                excluded = not (ci.lo <= 0.0 <= ci.hi)
                assert tr.reject == excluded
                assert tr.reject == (tr.statistic > tr.critical_value)


class TestGaussianInference:
    def test_normal_quantile_accuracy(self):
        assert float(ndtri(0.975)) == pytest.approx(1.959963984540054, abs=1e-10)
        for q in (0.6, 0.9, 0.975, 0.995, 0.9999):
            assert float(ndtri(q)) == pytest.approx(erf_normal_quantile(q), abs=1e-10)

    def test_halfwidth_formula(self):
        design = summarize([0.0, 1.0, 2.0])
        f = fit(Dataset(x=np.array([0.0, 1.0, 2.0]), y=np.array([0.1, 1.0, 2.2])))
        level, sigma_sq = 0.9, 2.0
        ci0 = gaussian_confidence_interval(f, design, sigma_sq, "beta0", level)
        q = float(ndtri(0.95))
        assert ci0.half_width == pytest.approx(q * math.sqrt(sigma_sq * design.S2 / design.d), rel=1e-12)
        ci1 = gaussian_confidence_interval(f, design, sigma_sq, "beta1", level)
        assert ci1.half_width == pytest.approx(q * math.sqrt(sigma_sq * design.n / design.d), rel=1e-12)

    def test_zero_sigma_collapses(self, demo_design):
        f = _demo_fit(demo_design)
        ci = gaussian_confidence_interval(f, demo_design, 0.0, "beta1", 0.95)
        assert ci.lo == ci.hi == f.beta1_hat

    def test_variance_matches_exact_law(self, demo_design):
        # Same closed form: normal variance == scale^2 * core variance.
        theta = 3.0
        for coefficient in ("beta0", "beta1"):
            law = estimator_law(demo_design, theta, coefficient)
            _, var = normal_approx_law(demo_design, theta, coefficient)
            assert var == pytest.approx(law.variance(), rel=1e-14)

    def test_gaussian_uniform_variance_correspondence(self, demo_design):
        # sigma^2 = theta^2/3 makes the Gaussian-case variances identical.
        theta = 3.0
        sigma_sq = theta**2 / 3.0
        f = _demo_fit(demo_design)
        for coefficient, factor in (("beta0", demo_design.S2), ("beta1", demo_design.n)):
            _, var = normal_approx_law(demo_design, theta, coefficient)
            assert var == pytest.approx(sigma_sq * factor / demo_design.d, rel=1e-14)
        r = gaussian_test(f, demo_design, sigma_sq, "beta1", 0.05)
        assert r.reject == (r.p_value < 0.05)


class TestCltDiagnostics:
    def test_two_point_hand_value(self):
        design = DesignSummary(n=2, S1=0.0, S2=2.0, d=4.0,
                               p=np.array([2.0, 2.0]), p_prime=np.array([-2.0, 2.0]))
        diag = clt_diagnostics(design)
        assert diag.cond_beta0 == pytest.approx(1.0 / math.sqrt(2.0))

    def test_symmetric_designs_have_zero_joint_condition(self):
        diag = clt_diagnostics(summarize([-3.0, -1.0, 1.0, 3.0]))
        assert diag.cond_joint == 0.0

    def test_conditions_in_unit_interval(self, rng):
        for _ in range(20):
            x = rng.uniform(-100, 100, rng.integers(3, 30))
            if np.ptp(x) < 1e-6:
                continue
            diag = clt_diagnostics(summarize(x))
            assert 0.0 < diag.cond_beta0 <= 1.0
            assert 0.0 < diag.cond_beta1 <= 1.0

    def test_equispaced_conditions_decrease(self):
        vals = []
        for n in (5, 10, 20, 40, 80):
            x = Equispaced(-10.0, 10.0).generate(n, None)
            vals.append(clt_diagnostics(summarize(x)))
        c0 = [v.cond_beta0 for v in vals]
        c1 = [v.cond_beta1 for v in vals]
        assert all(a > b for a, b in zip(c0, c0[1:]))
        assert all(a > b for a, b in zip(c1, c1[1:]))


class TestNormalConvergence:
    def test_sup_distance_decreases_for_both_coefficients(self):
        sup0, sup1 = [], []
        for n in (5, 8, 12, 16, 20):
            design = summarize(Equispaced(-10.0, 10.0).generate(n, None))
            sup0.append(standardized_sup_distance(design, 3.0, "beta0", 400))
            sup1.append(standardized_sup_distance(design, 3.0, "beta1", 400))
        assert all(a > b for a, b in zip(sup0, sup0[1:]))
        assert all(a > b for a, b in zip(sup1, sup1[1:]))


def _demo_fit(design, beta1: float = 4.0):
    rng = np.random.default_rng(7)
    x = rng.uniform(-10, 10, design.n)
    y = 7.0 + beta1 * x + rng.uniform(-3, 3, design.n)
    return fit(Dataset(x=x, y=y))
