"""Independent density oracle: iterated convolution of box densities.

This is the validation-side counterpart of the inclusion-exclusion formula in
:mod:`uniform_sum`. The density of sum_k w_k * eps_k is built by convolving
the component boxes U(-theta*w_k, theta*w_k) one at a time. Convolving a
piecewise polynomial g with a box of half-width a is the sliding average

    (box_a * g)(x) = (G(x + a) - G(x - a)) / (2 a),

with G the antiderivative of g, so each step stays an exact piecewise
polynomial; the only rounding is ordinary float arithmetic. The piecewise
result is tabulated on the requested uniform grid at the end. Used only as a
test oracle, never in the inference path (the two code paths share no
formula: no subset enumeration happens here).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSum, GridTooCoarse

# Minimum resolution: at least 8 grid cells across the narrowest box.
_MIN_CELLS_PER_BOX = 8


@dataclass(frozen=True)
class GridDensity:
    """Density values tabulated on a symmetric uniform grid."""

    grid: np.ndarray
    values: np.ndarray

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def integral(self) -> float:
        """Trapezoid-rule integral of the tabulated values."""
        return float(np.trapezoid(self.values, dx=self.step))


class _PiecewisePoly:
    """Piecewise polynomial on [knots[0], knots[-1]], zero outside.

    Piece i is sum_j coeffs[i][j] * (x - knots[i])^j on [knots[i], knots[i+1]).
    """

    def __init__(self, knots: np.ndarray, coeffs: list[list[float]]):
        self.knots = knots
        self.coeffs = coeffs

    @classmethod
    def box(cls, half_width: float) -> "_PiecewisePoly":
        return cls(np.array([-half_width, half_width]),
                   [[1.0 / (2.0 * half_width)]])

    def convolve_box(self, a: float) -> "_PiecewisePoly":
        """Exact convolution with a centered box of half-width a > 0."""
        knots = self.knots
        # Antiderivative pieces: local coefficients plus cumulative constants.
        widths = np.diff(knots)
        g_rows: list[list[float]] = []
        piece_ints = np.empty(len(self.coeffs))
        for i, c in enumerate(self.coeffs):
            row = [0.0] + [cj / (j + 1) for j, cj in enumerate(c)]
            g_rows.append(row)
            piece_ints[i] = _poly_eval(row, widths[i])
        g_consts = np.concatenate([[0.0], np.cumsum(piece_ints)])
        total = float(g_consts[-1])
        for i, row in enumerate(g_rows):
            row[0] = float(g_consts[i])

        def g_local(y_probe: float, y_shift: float) -> list[float]:
            # Local antiderivative polynomial around y_shift (in z = x - y_shift).
            # The piece is chosen by y_probe (an interval midpoint, never within
            # rounding distance of a knot); y_shift may sit a last-ulp outside
            # the chosen piece, which only continues the polynomial analytically.
            if y_probe >= knots[-1]:
                return [total]
            if y_probe < knots[0]:
                return [0.0]
            p = int(np.searchsorted(knots, y_probe, side="right")) - 1
            p = min(max(p, 0), len(g_rows) - 1)
            return _taylor_shift(g_rows[p], y_shift - knots[p])

        new_knots = np.unique(np.concatenate([knots - a, knots + a]))
        inv = 1.0 / (2.0 * a)
        new_coeffs: list[list[float]] = []
        for i in range(len(new_knots) - 1):
            mid = 0.5 * (new_knots[i] + new_knots[i + 1])
            lead = g_local(mid + a, new_knots[i] + a)
            lag = g_local(mid - a, new_knots[i] - a)
            deg = max(len(lead), len(lag))
            lead = lead + [0.0] * (deg - len(lead))
            lag = lag + [0.0] * (deg - len(lag))
            new_coeffs.append([(hi - lo) * inv for hi, lo in zip(lead, lag)])
        return _PiecewisePoly(new_knots, new_coeffs)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        knots = self.knots
        # Snap points within rounding distance of the support edges onto the
        # edge, so they take the interior limit (same convention as the
        # closed-form density); points clearly outside evaluate to 0.
        band = 32.0 * np.finfo(float).eps * max(abs(knots[0]), abs(knots[-1]))
        x = np.clip(x, None, knots[-1], where=(x > knots[-1]) & (x <= knots[-1] + band), out=x.copy())
        x = np.clip(x, knots[0], None, where=(x < knots[0]) & (x >= knots[0] - band), out=x)
        out = np.zeros_like(x)
        idx = np.searchsorted(knots, x, side="right") - 1
        # Points exactly on the last knot take the interior (left) limit.
        idx[x == knots[-1]] = len(self.coeffs) - 1
        valid = (idx >= 0) & (idx < len(self.coeffs)) & (x >= knots[0]) & (x <= knots[-1])
        for i in np.unique(idx[valid]):
            sel = valid & (idx == i)
            z = x[sel] - knots[i]
            acc = np.zeros_like(z)
            for cj in reversed(self.coeffs[i]):
                acc = acc * z + cj
            out[sel] = acc
        return out


def _poly_eval(coeffs: list[float], z: float) -> float:
    acc = 0.0
    for cj in reversed(coeffs):
        acc = acc * z + cj
    return acc


def _taylor_shift(coeffs: list[float], alpha: float) -> list[float]:
    """Coefficients of p(z + alpha) from coefficients of p(z), in place-free form."""
    c = list(coeffs)
    n = len(c)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            c[j] += alpha * c[j + 1]
    return c


def exact_convolution(weights, theta: float) -> _PiecewisePoly:
    """Piecewise-polynomial density of sum w_k * eps_k by iterated convolution."""
    w = np.sort(np.abs(np.atleast_1d(np.asarray(weights, dtype=float))))
    w = w[w != 0.0]
    if w.size == 0:
        raise DegenerateSum("all weights are zero")
    poly = _PiecewisePoly.box(theta * float(w[0]))
    for wk in w[1:]:
        poly = poly.convolve_box(theta * float(wk))
    return poly


def grid_convolution_density(weights, theta: float, grid_step: float) -> GridDensity:
    """Tabulate the convolution-built density on a symmetric uniform grid.

    Parameters
    ----------
    weights, theta
        Same conventions as WeightedUniformSum (signs/zeros allowed).
    grid_step : float
        Grid spacing; must resolve the narrowest box with at least 8 cells.

    Raises
    ------
    GridTooCoarse
        If grid_step > theta * min|w_k| / 8.
    DegenerateSum
        If every weight is zero.
    """
    w = np.abs(np.atleast_1d(np.asarray(weights, dtype=float)))
    w = w[w != 0.0]
    if w.size == 0:
        raise DegenerateSum("all weights are zero")
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    finest = theta * float(np.min(w)) / _MIN_CELLS_PER_BOX
    if grid_step > finest * (1.0 + 1e-12):
        raise GridTooCoarse(
            f"grid_step {grid_step:g} too coarse: need <= theta*min|w|/8 = {finest:g}"
        )
    poly = exact_convolution(w, theta)
    half_support = theta * float(np.sum(w))
    n_half = int(np.ceil(half_support / grid_step - 1e-9))
    grid = grid_step * np.arange(-n_half, n_half + 1)
    return GridDensity(grid=grid, values=poly.evaluate(grid))
