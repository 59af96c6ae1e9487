import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from uniform_lse.design import (
    Dataset,
    estimate_theta_sq,
    fit,
    read_dataset_csv,
    summarize,
)
from uniform_lse.errors import CollinearDesign, DatasetFormatError, TooFewPoints


def x_vectors(min_n=3, max_n=40, scale=1e3):
    # At least two distinct entries with a non-degenerate spread.
    return (
        st.lists(
            st.floats(-scale, scale, allow_nan=False, allow_infinity=False),
            min_size=min_n,
            max_size=max_n,
        )
        .map(np.array)
        .filter(lambda x: np.ptp(x) > 1e-6 * (1 + np.max(np.abs(x))))
    )


class TestSummarize:
    def test_small_worked_example(self):
        d = summarize([0.0, 1.0, 2.0])
        assert d.S1 == 3.0
        assert d.S2 == 5.0
        assert d.d == 6.0
        assert_allclose(d.p, [5.0, 2.0, -1.0])
        assert_allclose(d.p_prime, [-3.0, 0.0, 3.0])

    def test_symmetric_design_has_constant_p(self):
        d = summarize([-1.0, 0.0, 1.0])
        assert d.S1 == 0.0
        assert_allclose(d.p, [2.0, 2.0, 2.0])
        assert_allclose(d.p_prime, [-3.0, 0.0, 3.0])

    def test_weights_match_explicit_hat_matrix(self):
        # Independent oracle: rows of (X'X)^-1 X' from an explicit 2x2 inverse.
        n = 10
        k = np.arange(n)
        x = 20.0 * k / (n - 1) - 10.0
        d = summarize(x)
        X = np.column_stack([np.ones(n), x])
        M = np.linalg.inv(X.T @ X) @ X.T
        assert_allclose(d.p / d.d, M[0], rtol=1e-12, atol=1e-15)
        assert_allclose(d.p_prime / d.d, M[1], rtol=1e-12, atol=1e-15)

    def test_negative_and_zero_weights_occur(self):
        assert summarize([0.0, 1.0, 2.0]).p[2] < 0
        assert summarize([0.0, 1.0, 1.0]).p[1] == 0.0

    def test_errors(self):
        with pytest.raises(TooFewPoints):
            summarize([1.0, 2.0])
        with pytest.raises(CollinearDesign):
            summarize([3.0, 3.0, 3.0])

    @given(x=x_vectors())
    @settings(max_examples=150, deadline=None)
    def test_weight_identities(self, x):
        d = summarize(x)
        scale = abs(d.d)
        assert_allclose(np.sum(d.p), d.d, rtol=1e-10)
        assert abs(np.sum(d.p_prime)) <= 1e-10 * d.n * np.max(np.abs(d.p_prime) + 1)
        assert_allclose(np.sum(d.p**2), d.d * d.S2, rtol=1e-10)
        assert_allclose(np.sum(d.p_prime**2), d.d * d.n, rtol=1e-10)
        assert_allclose(np.sum(d.p * d.p_prime), -d.S1 * d.d, rtol=1e-10,
                        atol=1e-10 * scale * (abs(d.S1) + 1))

    @given(x=x_vectors())
    @settings(max_examples=100, deadline=None)
    def test_determinant_equals_pairwise_spread(self, x):
        d = summarize(x)
        mean = x.mean()
        pairwise = 0.0
        for i in range(len(x)):
            for j in range(len(x)):
                if i != j:
                    pairwise += (x[i] - x[j]) ** 2
        assert_allclose(d.d, 0.5 * pairwise, rtol=1e-9)


class TestFit:
    def test_exact_line_recovered(self):
        x = np.array([-3.0, 0.5, 2.0, 9.0])
        data = Dataset(x=x, y=7.0 + 4.0 * x)
        r = fit(data)
        assert_allclose([r.beta0_hat, r.beta1_hat], [7.0, 4.0], rtol=1e-12)
        assert_allclose(r.residuals, 0.0, atol=1e-12)
        assert r.theta_sq_hat == pytest.approx(0.0, abs=1e-20)

    def test_flat_response(self):
        r = fit(Dataset(x=np.array([0.0, 1.0, 5.0]), y=np.array([2.5, 2.5, 2.5])))
        assert r.beta1_hat == pytest.approx(0.0, abs=1e-15)
        assert r.beta0_hat == pytest.approx(2.5)

    def test_hand_solved_normal_equations(self):
        r = fit(Dataset(x=np.array([0.0, 1.0, 2.0]), y=np.array([0.0, 0.0, 3.0])))
        assert r.beta1_hat == pytest.approx(1.5, rel=1e-14)
        assert r.beta0_hat == pytest.approx(-0.5, rel=1e-14)

    def test_residual_orthogonality(self, rng):
        x = rng.uniform(-10, 10, 25)
        y = 1.0 + 0.5 * x + rng.normal(0, 2, 25)
        r = fit(Dataset(x=x, y=y))
        ynorm = np.linalg.norm(y)
        assert abs(np.sum(r.residuals)) <= 1e-9 * ynorm
        assert abs(np.sum(x * r.residuals)) <= 1e-9 * ynorm * np.max(np.abs(x))

    def test_theta_sq_is_three_sigma_sq(self, rng):
        x = rng.uniform(0, 5, 12)
        y = rng.normal(0, 1, 12)
        r = fit(Dataset(x=x, y=y))
        assert r.theta_sq_hat == 3.0 * r.sigma_sq_hat

    @given(
        x=x_vectors(max_n=15, scale=50),
        a=st.floats(0.1, 10),
        b=st.floats(-100, 100),
    )
    @settings(max_examples=60, deadline=None)
    def test_location_scale_equivariance(self, x, a, b):
        y = np.sin(x) + 0.1 * x
        r1 = fit(Dataset(x=x, y=y))
        r2 = fit(Dataset(x=x, y=a * y + b))
        assert_allclose(r2.beta1_hat, a * r1.beta1_hat, rtol=1e-10, atol=1e-10)
        assert_allclose(r2.beta0_hat, a * r1.beta0_hat + b, rtol=1e-10, atol=1e-10)


class TestEstimateThetaSq:
    def test_zero_residuals(self):
        assert estimate_theta_sq(np.zeros(5), 5) == 0.0

    def test_direct_formula(self):
        assert estimate_theta_sq(np.array([1.0, -1.0, 0.0]), 3) == pytest.approx(6.0)

    def test_needs_three_points(self):
        with pytest.raises(TooFewPoints):
            estimate_theta_sq(np.array([1.0, 2.0]), 2)


class TestDataset:
    def test_invariants(self):
        with pytest.raises(TooFewPoints):
            Dataset(x=np.array([0.0, 1.0]), y=np.array([0.0, 1.0]))
        with pytest.raises(CollinearDesign):
            Dataset(x=np.ones(4), y=np.arange(4.0))
        with pytest.raises(ValueError):
            Dataset(x=np.arange(4.0), y=np.arange(3.0))

    def test_arrays_read_only(self):
        ds = Dataset(x=np.arange(3.0), y=np.arange(3.0))
        with pytest.raises(ValueError):
            ds.x[0] = 99.0


class TestCsvReader:
    def test_roundtrip(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x,y\n1.0,2.0\n2.0,3.5\n3.0,5.25\n")
        ds = read_dataset_csv(path)
        assert_allclose(ds.x, [1.0, 2.0, 3.0])
        assert_allclose(ds.y, [2.0, 3.5, 5.25])

    def test_header_must_name_columns(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x,z\n1,2\n")
        with pytest.raises(DatasetFormatError) as err:
            read_dataset_csv(path)
        assert "y" in str(err.value)
        assert err.value.line == 1

    def test_bad_value_reports_line_number(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x,y\n1,2\n2,oops\n3,4\n")
        with pytest.raises(DatasetFormatError) as err:
            read_dataset_csv(path)
        assert err.value.line == 3
        assert "line 3" in str(err.value)

    def test_short_row_reports_line_number(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x,y\n1,2\n5\n")
        with pytest.raises(DatasetFormatError) as err:
            read_dataset_csv(path)
        assert err.value.line == 3

    def test_too_few_rows(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("x,y\n1,2\n2,3\n")
        with pytest.raises(TooFewPoints):
            read_dataset_csv(path)

    def test_column_order_free(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("y,x\n2.0,1.0\n3.0,2.0\n4.0,3.0\n")
        ds = read_dataset_csv(path)
        assert_allclose(ds.x, [1.0, 2.0, 3.0])
