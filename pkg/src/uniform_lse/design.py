"""Dataset handling, design-matrix summaries and the closed-form least-squares fit.

The simple linear model y = b0 + b1*x + eps is fitted through the 2x2 normal
equations. Everything downstream (exact estimator laws, intervals, tests) is
driven by the scalar summaries S1 = sum(x), S2 = sum(x^2), d = n*S2 - S1^2 and
the weight vectors

    p_k  = S2 - x_k * S1        (maps noise to the intercept error)
    p'_k = n * x_k - S1         (maps noise to the slope error)

so the full n x 2 hat matrix is never materialized.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import CollinearDesign, DatasetFormatError, TooFewPoints

# d <= COLLINEAR_RTOL * n * S2 is treated as a collinear design: a
# floating-point-safe version of "x has two distinct values".
COLLINEAR_RTOL = 1e-14


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Paired covariate/response sample.

    Immutable after construction; arrays are marked read-only.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _readonly(np.atleast_1d(self.x))
        y = _readonly(np.atleast_1d(self.y))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
            raise ValueError("x and y must be 1-d arrays of equal length")
        if len(x) < 3:
            raise TooFewPoints(f"need at least 3 observations, got {len(x)}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("x and y must be finite")
        if np.min(x) == np.max(x):
            raise CollinearDesign("all x values are equal")

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class DesignSummary:
    """Scalar design summaries and noise-to-error weight vectors.

    Satisfies (up to rounding) the identities
    sum(p) = d, sum(p') = 0, sum(p^2) = d*S2, sum(p'^2) = d*n,
    sum(p*p') = -S1*d.
    """

    n: int
    S1: float
    S2: float
    d: float
    p: np.ndarray
    p_prime: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _readonly(self.p))
        object.__setattr__(self, "p_prime", _readonly(self.p_prime))


@dataclass(frozen=True)
class FitResult:
    """Least-squares estimates plus both residual-variance conventions.

    theta_sq_hat is the unbiased estimate of theta^2 under uniform errors
    U(-theta, theta); sigma_sq_hat = theta_sq_hat / 3 is the usual Gaussian
    convention, kept alongside so the two can be compared directly.
    """

    beta0_hat: float
    beta1_hat: float
    residuals: np.ndarray
    theta_sq_hat: float
    sigma_sq_hat: float

    def __post_init__(self):
        object.__setattr__(self, "residuals", _readonly(self.residuals))


def summarize(x) -> DesignSummary:
    """Compute S1, S2, d and the weight vectors p, p' for a covariate vector.

    Parameters
    ----------
    x : array_like
        Covariate values, length >= 3, at least two distinct entries.

    Raises
    ------
    TooFewPoints
        If len(x) < 3.
    CollinearDesign
        If all entries coincide (d ~ 0).
    """
    x = np.ascontiguousarray(x, dtype=float)
    n = len(x)
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    # fsum keeps S1/S2 exact; d is computed from centered squares, which
    # avoids the n*S2 - S1^2 cancellation for large, tightly clustered x.
    s1 = math.fsum(x)
    s2 = math.fsum(xi * xi for xi in x)
    mean = s1 / n
    d = n * math.fsum((xi - mean) ** 2 for xi in x)
    if d <= COLLINEAR_RTOL * n * s2 or d == 0.0:
        raise CollinearDesign("design is collinear: all x values (nearly) equal")
    p = s2 - x * s1
    p_prime = n * x - s1
    return DesignSummary(n=n, S1=s1, S2=s2, d=d, p=p, p_prime=p_prime)


def fit(data: Dataset) -> FitResult:
    """Fit y = b0 + b1*x by least squares via the centered normal equations."""
    x, y, n = data.x, data.y, data.n
    design = summarize(x)  # validates and raises on degenerate designs
    xbar = design.S1 / n
    ybar = math.fsum(y) / n
    sxx = math.fsum((xi - xbar) ** 2 for xi in x)
    sxy = math.fsum((xi - xbar) * (yi - ybar) for xi, yi in zip(x, y))
    beta1 = sxy / sxx
    beta0 = ybar - beta1 * xbar
    residuals = y - (beta0 + beta1 * x)
    theta_sq = estimate_theta_sq(residuals, n)
    return FitResult(
        beta0_hat=beta0,
        beta1_hat=beta1,
        residuals=residuals,
        theta_sq_hat=theta_sq,
        sigma_sq_hat=theta_sq / 3.0,
    )


def estimate_theta_sq(residuals, n: int) -> float:
    """Unbiased estimate of theta^2 from fit residuals: 3*||r||^2 / (n-2)."""
    if n <= 2:
        raise TooFewPoints(f"theta^2 estimate needs n >= 3, got {n}")
    r = np.asarray(residuals, dtype=float)
    return 3.0 * math.fsum(ri * ri for ri in r) / (n - 2)


def read_dataset_csv(path) -> Dataset:
    """Read an `x,y` CSV file into a Dataset.

    Expects a header row ``x,y`` and one decimal record per line ('.' decimal
    separator, no thousands separators). Parse failures raise
    DatasetFormatError carrying the offending 1-based line number.
    """
    xs: list[float] = []
    ys: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("empty file", line=1) from None
        cols = [c.strip().lower() for c in header]
        if "x" not in cols or "y" not in cols:
            raise DatasetFormatError(
                f"header must contain columns 'x' and 'y', got {header!r}", line=1
            )
        ix, iy = cols.index("x"), cols.index("y")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) <= max(ix, iy):
                raise DatasetFormatError(
                    f"expected {max(ix, iy) + 1} columns, got {len(row)}", line=lineno
                )
            try:
                xs.append(float(row[ix]))
                ys.append(float(row[iy]))
            except ValueError as exc:
                raise DatasetFormatError(str(exc), line=lineno) from None
    if len(xs) < 3:
        raise TooFewPoints(f"need at least 3 data rows, got {len(xs)}")
    return Dataset(x=np.array(xs), y=np.array(ys))
