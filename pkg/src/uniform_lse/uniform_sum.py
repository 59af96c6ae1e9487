"""Exact distribution of W = sum_k w_k * eps_k with eps_k i.i.d. U(-theta, theta).

The density is the classic inclusion-exclusion (generalized Irwin-Hall) form:
with m nonzero weights reduced to positive values w_1..w_m, W is a shifted,
scaled sum of independent U(0, w_k) variables, and

    f_U(u) = 1 / (P * (m-1)!) * sum_A (-1)^|A| * (u - S_A)_+^(m-1)

over all 2^m subsets A with subset sums S_A and P = prod(w_k). The package
evaluates everything in this "u-space" (u = t/(2*theta) + sum(w)/2), which
keeps theta out of the alternating sum entirely.

The alternating sum is the numerical hazard here: terms grow like
(sum w)^(m-1) while the result is density-sized. Countermeasures, in order:

* evaluation only on the left half u <= sum(w)/2 (symmetry), where the
  contributing prefix is shortest;
* subset sums kept in two sorted, sign-homogeneous arrays, summed by
  pairwise reduction, so cancellation happens once, in the final difference;
* Neumaier compensation across evaluation tiles;
* an opt-in double-double mode for weight counts in the teens, where the
  condition number of the alternating sum can exceed ~1e6.

Batch evaluation uses a left-to-right sweep that advances a ladder of signed
prefix moments across the sorted subset sums, giving O(2^m * m + B * m^2)
work for B points instead of O(2^m * B).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from ._accum import (
    dd_add,
    dd_pow_int,
    dd_sum_axis,
    ipow,
    neumaier_step,
    two_diff,
    two_prod,
    two_sum,
)
from .errors import DegenerateSum, DomainError, ExactModeTooLarge

DEFAULT_EXACT_LIMIT = 22
_TABLE_LIMIT = 16  # by-size subset table only materialized up to here
_LADDER_LIMIT = 12  # full per-knot moment ladder cached up to 2^12 sums
_TILE_ELEMS = 1 << 23
_SWEEP_MIN_POINTS = 32
_SWEEP_MIN_WORK = 1 << 18
_QUANTILE_ITERS = 46


@dataclass(frozen=True)
class CombinationTermTable:
    """Subset sums grouped by subset size, for inspection and testing.

    ``sums_by_size[k]`` holds the C(m, k) sums of each k-combination of the
    effective weights; its terms enter the density with sign (-1)^k. The
    shared prefactor 1/(2 * P * theta^m * (m-1)!) is stored cancellation-safe
    as a natural log plus a (mantissa, base-2 exponent) pair.
    """

    m: int
    sums_by_size: tuple[np.ndarray, ...]
    signs: np.ndarray
    prefactor_log: float
    prefactor_mant: float
    prefactor_exp2: int


class WeightedUniformSum:
    """Distribution of W = sum_k w_k * eps_k, eps_k ~ U(-theta, theta) i.i.d.

    Parameters
    ----------
    weights : array_like
        Raw weights; signs and zeros are allowed. The law depends only on the
        absolute values of the nonzero entries (each eps_k is symmetric, and
        zero weights contribute the constant 0).
    theta : float
        Half-width of each uniform error; must be positive.
    limit : int, optional
        Exact-mode cap on the number of nonzero weights (2^m subset sums are
        enumerated). Raises ExactModeTooLarge above it.
    extended_precision : bool, optional
        Evaluate the alternating sum in double-double arithmetic. Slower;
        useful when m is in the teens and weights are strongly unbalanced.

    Attributes
    ----------
    raw_weights : ndarray
        Weights as supplied (read-only).
    eff_weights : ndarray
        Sorted ascending absolute values of the nonzero weights.
    m : int
        Number of effective weights.
    half_support : float
        theta * sum(eff_weights); the support is [-half_support, half_support].
    weight_product : float
        prod(eff_weights) (may overflow to inf for display; internal scaling
        uses a mantissa/exponent representation instead).
    """

    def __init__(self, weights, theta: float, limit: int = DEFAULT_EXACT_LIMIT,
                 extended_precision: bool = False):
        raw = np.atleast_1d(np.asarray(weights, dtype=float))
        if raw.ndim != 1 or raw.size == 0:
            raise ValueError("weights must be a non-empty 1-d array")
        if not np.all(np.isfinite(raw)):
            raise ValueError("weights must be finite")
        if not (theta > 0.0 and math.isfinite(theta)):
            raise ValueError(f"theta must be positive and finite, got {theta}")
        eff = np.sort(np.abs(raw[raw != 0.0]))
        if eff.size == 0:
            raise DegenerateSum("all weights are zero")
        if eff.size > limit:
            raise ExactModeTooLarge(
                f"{eff.size} nonzero weights exceed the exact-mode cap {limit}; "
                "use the normal approximation instead"
            )
        self.raw_weights = raw
        self.raw_weights.flags.writeable = False
        self.eff_weights = eff
        self.eff_weights.flags.writeable = False
        self.m = int(eff.size)
        self.theta = float(theta)
        self.limit = int(limit)
        self.extended_precision = bool(extended_precision)

        self._sum_w = math.fsum(eff)
        self._half_sum_w = 0.5 * self._sum_w
        # Residual of sum(w) beyond its correctly rounded double, kept for the
        # extended-precision u-space transform.
        hi, lo = 0.0, 0.0
        for w in eff:
            hi, e = two_sum(hi, float(w))
            lo += e
        self._half_sum_w_lo = 0.5 * ((hi - self._sum_w) + lo)
        self.half_support = self.theta * self._sum_w

        # Product of weights as mantissa * 2^exp2 so the final division never
        # overflows; (m-1)! and m! fit in float64 for m <= limit.
        mant, exp2 = 1.0, 0
        for w in eff:
            mant, e = math.frexp(mant * float(w))
            exp2 += e
        self._prod_mant = mant
        self._prod_exp2 = exp2
        self.weight_product = math.ldexp(mant, exp2) if exp2 < 1024 else math.inf
        self._fact_m1 = float(math.factorial(self.m - 1))
        self._fact_m = float(math.factorial(self.m))

        # Subset sums split by parity of the subset size: inclusion of a
        # weight flips the sign group. Each group is sorted so tiles sum
        # same-signed, ascending terms; all cancellation is concentrated in
        # the single final pos - neg difference.
        pos = np.zeros(1)
        neg = np.zeros(0)
        for w in eff:
            pos, neg = (np.concatenate([pos, neg + w]),
                        np.concatenate([neg, pos + w]))
        self._sums_pos = np.sort(pos)
        self._sums_neg = np.sort(neg)
        self._num_sums = pos.size + neg.size
        if extended_precision:
            # Extended mode keeps the subset sums themselves in double-double;
            # rounded knots would otherwise cap the achievable accuracy.
            self._dd_sums = {}
            ph, pl = np.zeros(1), np.zeros(1)
            nh, nl = np.zeros(0), np.zeros(0)
            for w in eff:
                sh_p, sl_p = dd_add(nh, nl, np.full_like(nh, w), np.zeros_like(nh))
                sh_n, sl_n = dd_add(ph, pl, np.full_like(ph, w), np.zeros_like(ph))
                ph, pl, nh, nl = (np.concatenate([ph, sh_p]), np.concatenate([pl, sl_p]),
                                  np.concatenate([nh, sh_n]), np.concatenate([nl, sl_n]))
            for name, hi_arr, lo_arr in (("pos", ph, pl), ("neg", nh, nl)):
                order = np.argsort(hi_arr, kind="stable")
                self._dd_sums[name] = (hi_arr[order], lo_arr[order])

        binom = np.zeros((self.m + 1, self.m + 1))
        for r in range(self.m + 1):
            for t in range(r + 1):
                binom[r, t] = math.comb(r, t)
        self._binom = binom

        # Merged, globally sorted sums with parities: built lazily for the
        # sweep path, guarded by a lock so concurrent callers stay safe.
        self._merged_lock = threading.Lock()
        self._sums_all: np.ndarray | None = None
        self._signs_all: np.ndarray | None = None
        # Per-knot prefix ladder (small m only), also lazy.
        self._ladder_lock = threading.Lock()
        self._ladder: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    # ------------------------------------------------------------------
    # public API
    # ------------------------------------------------------------------
    def pdf(self, t):
        """Exact density f_W(t); vectorized, exactly 0 outside the support."""
        t_arr, scalar = self._as_array(t)
        out = np.zeros_like(t_arr)
        raw, inside = self._raw_from_t(t_arr, self.m - 1)
        if raw is not None:
            vals = self._apply_prefactor(raw, self._fact_m1) / (2.0 * self.theta)
            out[inside] = np.maximum(vals, 0.0)
        return float(out[0]) if scalar else out

    def cdf(self, t):
        """Exact CDF; clamped to [0, 1], with cdf(t) + cdf(-t) = 1 exactly."""
        t_arr, scalar = self._as_array(t)
        out = np.where(t_arr < 0.0, 0.0, 1.0)  # exact 0/1 outside the support
        raw, inside = self._raw_from_t(t_arr, self.m)
        if raw is not None:
            lower = np.clip(self._apply_prefactor(raw, self._fact_m), 0.0, 1.0)
            tin = t_arr[inside]
            out[inside] = np.where(tin < 0.0, lower, 1.0 - lower)
        out[t_arr == 0.0] = 0.5
        return float(out[0]) if scalar else out

    def _raw_from_t(self, t_arr, power):
        """Alternating sum at the canonical u(t), honoring extended precision."""
        if self.extended_precision:
            u_hi, u_lo, inside = self._to_u_dd(t_arr)
            if not np.any(inside):
                return None, inside
            uh, ul = u_hi[inside], u_lo[inside]
            order = np.argsort(uh, kind="stable")
            vals = self._direct_sum_dd(uh[order], power, u_lo=ul[order])
            raw = np.empty_like(vals)
            raw[order] = vals
            return raw, inside
        u, inside = self._to_u(t_arr)
        if not np.any(inside):
            return None, inside
        return self._alternating_sum(u[inside], power), inside

    def ppf(self, q):
        """Quantile function; bisection on the CDF plus one Newton polish.

        Raises DomainError unless 0 < q < 1. Satisfies ppf(1-q) == -ppf(q).
        """
        q_arr, scalar = self._as_array(q)
        if not np.all((q_arr > 0.0) & (q_arr < 1.0)):
            raise DomainError("quantile level must lie strictly between 0 and 1")
        qq = np.minimum(q_arr, 1.0 - q_arr)
        if self.m <= _LADDER_LIMIT and not self.extended_precision:
            u = self._ppf_u_local(qq)
        else:
            u = self._ppf_u_bisect(qq)
        t_neg = (u - self._half_sum_w) * (2.0 * self.theta)
        out = np.where(q_arr < 0.5, t_neg, -t_neg)
        out = np.where(q_arr == 0.5, 0.0, out)
        return float(out[0]) if scalar else out

    def variance(self) -> float:
        """Var(W) = (theta^2 / 3) * sum(w_k^2)."""
        return self.theta ** 2 / 3.0 * math.fsum(w * w for w in self.eff_weights)

    def mean(self) -> float:
        return 0.0

    def std(self) -> float:
        return math.sqrt(self.variance())

    def rvs(self, size=None, rng=None):
        """Draw samples of W (sum of scaled symmetric uniforms)."""
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        if size is None:
            eps = gen.uniform(-self.theta, self.theta, self.m)
            return float(eps @ self.eff_weights)
        eps = gen.uniform(-self.theta, self.theta, (int(size), self.m))
        return eps @ self.eff_weights

    def knots(self) -> np.ndarray:
        """Sorted unique breakpoints of the piecewise-polynomial density."""
        sums, _ = self._merged()
        return np.unique(self.theta * (2.0 * sums - self._sum_w))

    def combination_table(self) -> CombinationTermTable:
        """Subset sums grouped by size (exact mode only, m <= 16)."""
        if self.m > _TABLE_LIMIT:
            raise ExactModeTooLarge(
                f"by-size table is only materialized for m <= {_TABLE_LIMIT}, got m={self.m}"
            )
        by_size: list[np.ndarray] = [np.zeros(1)]
        for w in self.eff_weights:
            nxt = [by_size[0]]
            for k in range(1, len(by_size)):
                nxt.append(np.concatenate([by_size[k], by_size[k - 1] + w]))
            nxt.append(by_size[-1] + w)
            by_size = nxt
        log_pref = -(math.log(2.0)
                     + math.log(self._prod_mant) + self._prod_exp2 * math.log(2.0)
                     + self.m * math.log(self.theta)
                     + math.lgamma(self.m))
        frac = 0.5 / (self._prod_mant * self.theta ** self.m * self._fact_m1)
        mant, exp2 = math.frexp(frac)
        return CombinationTermTable(
            m=self.m,
            sums_by_size=tuple(np.sort(a) for a in by_size),
            signs=np.array([(-1) ** k for k in range(self.m + 1)]),
            prefactor_log=log_pref,
            prefactor_mant=mant,
            prefactor_exp2=exp2 - self._prod_exp2,
        )

    def __repr__(self):
        return (f"WeightedUniformSum(m={self.m}, theta={self.theta}, "
                f"half_support={self.half_support:.6g})")

    # ------------------------------------------------------------------
    # u-space internals: u = t/(2*theta) + sum(w)/2, evaluated at -|t|
    # ------------------------------------------------------------------
    @staticmethod
    def _as_array(v):
        arr = np.asarray(v, dtype=float)
        return np.atleast_1d(arr).copy(), arr.ndim == 0

    def _to_u(self, t_arr):
        u = self._half_sum_w - np.abs(t_arr) / (2.0 * self.theta)
        # |t| within rounding distance of the support edge counts as on the
        # edge (interior limit); beyond that the density/CDF are exact 0/1.
        band = 32.0 * np.finfo(float).eps * self._half_sum_w
        inside = u >= -band
        return np.maximum(u, 0.0), inside

    def _pdf_u(self, u):
        raw = self._alternating_sum(np.asarray(u, dtype=float), self.m - 1)
        return np.maximum(self._apply_prefactor(raw, self._fact_m1), 0.0)

    def _cdf_u(self, u):
        raw = self._alternating_sum(np.asarray(u, dtype=float), self.m)
        return np.clip(self._apply_prefactor(raw, self._fact_m), 0.0, 1.0)

    def _apply_prefactor(self, raw, factorial):
        return np.ldexp(raw / factorial / self._prod_mant, -self._prod_exp2)

    def _merged(self):
        if self._sums_all is None:
            with self._merged_lock:
                if self._sums_all is None:
                    merged = np.concatenate([self._sums_pos, self._sums_neg])
                    parity = np.concatenate([
                        np.ones(self._sums_pos.size, dtype=np.int8),
                        -np.ones(self._sums_neg.size, dtype=np.int8),
                    ])
                    order = np.argsort(merged, kind="stable")
                    self._signs_all = parity[order]
                    self._sums_all = merged[order]
        return self._sums_all, self._signs_all

    def _knot_ladder(self):
        """Ladder a_r(K) = sum_{S <= K} sign * (K - S)^r at every unique knot K.

        Only for small m: the table has 2^m * (m+1) entries. With it, every
        evaluation reduces to a binomial recombination local to one knot gap.
        """
        if self._ladder is None:
            with self._ladder_lock:
                if self._ladder is None:
                    m = self.m
                    sums, signs = self._merged()
                    knots, first = np.unique(sums, return_index=True)
                    tie_signs = np.add.reduceat(signs.astype(float), first)
                    ladder = np.empty((knots.size, m + 1))
                    a = np.zeros(m + 1)
                    prev = None
                    rows = np.arange(m + 1)
                    idx = rows[:, None] - rows[None, :]
                    idx_clip = np.clip(idx, 0, m)
                    mask = idx >= 0
                    for i, knot in enumerate(knots):
                        if prev is not None:
                            dp = (knot - prev) ** rows
                            a = (self._binom * np.where(mask, dp[idx_clip], 0.0)) @ a
                        a[0] += tie_signs[i]
                        ladder[i] = a
                        prev = knot
                    fk = self._apply_prefactor(ladder[:, m], self._fact_m)
                    f_knots = np.maximum.accumulate(np.clip(fk, 0.0, 1.0))
                    self._ladder = (knots, ladder, f_knots)
        return self._ladder

    def _ladder_eval(self, u, power):
        knots, ladder, _ = self._knot_ladder()
        idx = np.clip(np.searchsorted(knots, u, side="right") - 1, 0, knots.size - 1)
        delta = u - knots[idx]
        coeff = ladder[idx, : power + 1] * self._binom[power, : power + 1]
        V = np.ones((u.size, power + 1))
        for k in range(1, power + 1):
            V[:, k] = V[:, k - 1] * delta
        return np.einsum("bt,bt->b", V[:, ::-1], coeff)

    def _ppf_u_local(self, qq):
        """Quantile inversion on the cached ladder: one knot gap per target."""
        m = self.m
        knots, ladder, f_knots = self._knot_ladder()
        idx = np.clip(np.searchsorted(f_knots, qq, side="right") - 1, 0, knots.size - 2)
        a = ladder[idx]
        gap = knots[idx + 1] - knots[idx]
        coeff_F = a[:, : m + 1] * self._binom[m, : m + 1]
        coeff_f = a[:, :m] * self._binom[m - 1, :m]

        def f_raw(delta):
            V = np.ones((delta.size, m + 1))
            for k in range(1, m + 1):
                V[:, k] = V[:, k - 1] * delta
            return np.einsum("bt,bt->b", V[:, ::-1], coeff_F)

        target = qq
        lo = np.zeros_like(qq)
        hi = gap.astype(float).copy()
        for _ in range(_QUANTILE_ITERS):
            mid = 0.5 * (lo + hi)
            val = self._apply_prefactor(f_raw(mid), self._fact_m)
            take_hi = val >= target
            hi = np.where(take_hi, mid, hi)
            lo = np.where(take_hi, lo, mid)
        delta = 0.5 * (lo + hi)
        # Newton polish on the local polynomial where the density is positive.
        Vf = np.ones((delta.size, m))
        for k in range(1, m):
            Vf[:, k] = Vf[:, k - 1] * delta
        dens_u = self._apply_prefactor(np.einsum("bt,bt->b", Vf[:, ::-1], coeff_f),
                                       self._fact_m1)
        resid = target - self._apply_prefactor(f_raw(delta), self._fact_m)
        step = np.where(dens_u / (2.0 * self.theta) > 1e-12,
                        resid / np.where(dens_u > 0, dens_u, 1.0), 0.0)
        delta = np.clip(delta + step, lo, hi)
        return knots[idx] + delta

    def _ppf_u_bisect(self, qq):
        """Global bisection on the CDF, for m beyond the ladder cache."""
        lo = np.zeros_like(qq)
        hi = np.full_like(qq, self._half_sum_w)
        for _ in range(_QUANTILE_ITERS):
            mid = 0.5 * (lo + hi)
            val = self._cdf_u(mid)
            take_hi = val >= qq
            hi = np.where(take_hi, mid, hi)
            lo = np.where(take_hi, lo, mid)
        u = 0.5 * (lo + hi)
        dens_u = self._pdf_u(u)
        step = np.where(dens_u / (2.0 * self.theta) > 1e-12,
                        (qq - self._cdf_u(u)) / np.where(dens_u > 0, dens_u, 1.0),
                        0.0)
        return np.clip(u + step, lo, hi)

    # ------------------------------------------------------------------
    # alternating-sum engines
    # ------------------------------------------------------------------
    def _alternating_sum(self, u, power):
        """sum over subsets of sign * (u - S)_+^power for u in [0, sum(w)/2]."""
        u = np.atleast_1d(u)
        if u.size == 0:
            return u.copy()
        if (not self.extended_precision and self.m <= _LADDER_LIMIT
                and (u.size >= _SWEEP_MIN_POINTS or self._ladder is not None)):
            return self._ladder_eval(u, power)
        order = np.argsort(u, kind="stable")
        u_sorted = u[order]
        if self.extended_precision:
            vals = self._direct_sum_dd(u_sorted, power)
        elif (u.size >= _SWEEP_MIN_POINTS
              and u.size * self._num_sums >= _SWEEP_MIN_WORK):
            vals = self._sweep_sum(u_sorted, power)
        else:
            vals = self._direct_sum(u_sorted, power)
        out = np.empty_like(vals)
        out[order] = vals
        return out

    def _direct_sum(self, u_sorted, power):
        pos_t, pos_c = self._direct_group(u_sorted, self._sums_pos, power)
        neg_t, neg_c = self._direct_group(u_sorted, self._sums_neg, power)
        return (pos_t - neg_t) + (pos_c - neg_c)

    def _direct_group(self, u_sorted, sums, power):
        total = np.zeros_like(u_sorted)
        comp = np.zeros_like(u_sorted)
        if sums.size == 0:
            return total, comp
        pstep = max(1, min(u_sorted.size, _TILE_ELEMS // 512))
        for p0 in range(0, u_sorted.size, pstep):
            pc = u_sorted[p0 : p0 + pstep]
            jmax = int(np.searchsorted(sums, pc[-1], side="right"))
            if jmax == 0:
                continue
            tstep = max(1, _TILE_ELEMS // pc.size)
            for j0 in range(0, jmax, tstep):
                tile = sums[j0 : min(j0 + tstep, jmax)]
                i0 = int(np.searchsorted(pc, tile[0], side="left"))
                if i0 == pc.size:
                    continue
                mat = pc[i0:, None] - tile[None, :]
                if power == 0:
                    part = np.count_nonzero(mat >= 0.0, axis=1).astype(float)
                else:
                    np.maximum(mat, 0.0, out=mat)
                    part = np.add.reduce(ipow(mat, power), axis=1)
                sl = slice(p0 + i0, p0 + i0 + part.size)
                total[sl], comp[sl] = neumaier_step(total[sl], comp[sl], part)
        return total, comp

    def _to_u_dd(self, t_arr):
        """Double-double u = sum(w)/2 - |t|/(2*theta), for extended precision.

        Keeps the division and subtraction residuals, so the u-space transform
        does not cap the accuracy of the compensated alternating sum.
        """
        two_theta = 2.0 * self.theta
        q = np.abs(t_arr) / two_theta
        p_hi, p_lo = two_prod(q, two_theta)
        q_lo = ((np.abs(t_arr) - p_hi) - p_lo) / two_theta
        u_hi, e = two_diff(np.full_like(t_arr, self._half_sum_w), q)
        u_lo = (e - q_lo) + self._half_sum_w_lo
        u_hi, u_lo = two_sum(u_hi, u_lo)
        band = 32.0 * np.finfo(float).eps * self._half_sum_w
        inside = u_hi >= -band
        neg = u_hi < 0.0
        u_hi = np.where(neg, 0.0, u_hi)
        u_lo = np.where(neg, 0.0, u_lo)
        return u_hi, u_lo, inside

    def _direct_sum_dd(self, u_sorted, power, u_lo=None):
        if u_lo is None:
            u_lo = np.zeros_like(u_sorted)
        dd_sums = getattr(self, "_dd_sums", None)
        res_hi = np.zeros_like(u_sorted)
        res_lo = np.zeros_like(u_sorted)
        for name, sums, sign in (("pos", self._sums_pos, 1.0),
                                 ("neg", self._sums_neg, -1.0)):
            if sums.size == 0:
                continue
            if dd_sums is not None:
                s_hi, s_lo = dd_sums[name]
            else:
                s_hi, s_lo = sums, np.zeros_like(sums)
            ghi = np.zeros_like(u_sorted)
            glo = np.zeros_like(u_sorted)
            tstep = max(1, _TILE_ELEMS // (8 * max(1, u_sorted.size)))
            for j0 in range(0, s_hi.size, tstep):
                tile_hi = s_hi[j0 : j0 + tstep]
                tile_lo = s_lo[j0 : j0 + tstep]
                dhi, dlo = two_diff(u_sorted[:, None], tile_hi[None, :])
                corr_hi, corr_lo = two_diff(np.broadcast_to(u_lo[:, None], dhi.shape),
                                            np.broadcast_to(tile_lo[None, :], dhi.shape))
                dhi, dlo = dd_add(dhi, dlo, corr_hi, corr_lo)
                dead = (dhi < 0.0) | ((dhi == 0.0) & (dlo < 0.0))
                phi, plo = dd_pow_int(dhi, dlo, power)
                phi = np.where(dead, 0.0, phi)
                plo = np.where(dead, 0.0, plo)
                thi, tlo = dd_sum_axis(phi, plo, axis=1)
                ghi, glo = dd_add(ghi, glo, thi, tlo)
            res_hi, res_lo = dd_add(res_hi, res_lo, sign * ghi, sign * glo)
        return res_hi + res_lo

    def _sweep_sum(self, u_sorted, power):
        """Prefix-moment sweep across globally sorted subset sums.

        Maintains a_r(c) = sum_{S <= c} sign(S) * (c - S)^r for r = 0..m at a
        moving center c; shifting the center and emitting values are exact
        binomial recombinations with nonnegative offsets.
        """
        m = self.m
        sums, signs = self._merged()
        binom = self._binom
        positions = np.searchsorted(sums, u_sorted, side="right")
        starts = np.unique(positions, return_index=True)[1]
        boundaries = list(starts) + [u_sorted.size]
        a = np.zeros(m + 1)
        out = np.empty_like(u_sorted)
        rows = np.arange(m + 1)
        w_coeff = binom[power, : power + 1]
        center = None
        ptr = 0
        for gi in range(len(boundaries) - 1):
            i, j = boundaries[gi], boundaries[gi + 1]
            base = u_sorted[i]
            if center is not None:
                delta = base - center
                if delta != 0.0:
                    dp = delta ** rows
                    idx = rows[:, None] - rows[None, :]
                    shift = binom * np.where(idx >= 0, dp[np.clip(idx, 0, m)], 0.0)
                    a = shift @ a
            center = base
            pos = positions[i]
            if pos > ptr:
                block = sums[ptr:pos]
                pw = signs[ptr:pos].astype(float)
                diffs = base - block
                a[0] += pw.sum()
                for r in range(1, m + 1):
                    pw = pw * diffs
                    a[r] += pw.sum()
                ptr = pos
            deltas = u_sorted[i:j] - base
            V = np.ones((j - i, power + 1))
            for k in range(1, power + 1):
                V[:, k] = V[:, k - 1] * deltas
            # a_power(u) = sum_t C(power, t) * delta^(power-t) * a_t
            out[i:j] = V[:, ::-1] @ (w_coeff * a[: power + 1])
        return out


def make_sum(weights, theta: float, limit: int = DEFAULT_EXACT_LIMIT,
             extended_precision: bool = False) -> WeightedUniformSum:
    """Construct a WeightedUniformSum (thin convenience alias)."""
    return WeightedUniformSum(weights, theta, limit=limit,
                              extended_precision=extended_precision)
