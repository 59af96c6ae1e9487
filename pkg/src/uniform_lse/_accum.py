"""Cancellation-safe summation primitives.

Vectorized error-free transformations (two_sum / two_prod) plus the
double-double helpers built on them. Everything here operates on float64
scalars or ndarrays and is branch-free, so results do not depend on chunking
or thread count.
"""

from __future__ import annotations

import numpy as np

# Dekker splitting constant for binary64: 2^27 + 1.
_SPLIT = 134217729.0


def two_sum(a, b):
    """Error-free sum: returns (s, e) with s = fl(a+b) and a+b = s+e exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def two_diff(a, b):
    """Error-free difference: (s, e) with a-b = s+e exactly."""
    s = a - b
    bb = s - a
    e = (a - (s - bb)) - (b + bb)
    return s, e


def two_prod(a, b):
    """Error-free product: (p, e) with a*b = p+e exactly (Dekker split)."""
    p = a * b
    ca = _SPLIT * a
    ahi = ca - (ca - a)
    alo = a - ahi
    cb = _SPLIT * b
    bhi = cb - (cb - b)
    blo = b - bhi
    e = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, e


def neumaier_step(total, comp, value):
    """One Neumaier update of a running compensated sum.

    Returns the new (total, comp). Works elementwise on arrays.
    """
    t = total + value
    big = np.where(np.abs(total) >= np.abs(value), total, value)
    small = np.where(np.abs(total) >= np.abs(value), value, total)
    comp = comp + ((big - t) + small)
    return t, comp


def dd_add(xhi, xlo, yhi, ylo):
    """Double-double addition (accurate variant)."""
    shi, slo = two_sum(xhi, yhi)
    thi, tlo = two_sum(xlo, ylo)
    slo = slo + thi
    shi, slo = _quick_two_sum(shi, slo)
    slo = slo + tlo
    return _quick_two_sum(shi, slo)


def dd_mul(xhi, xlo, yhi, ylo):
    """Double-double multiplication."""
    phi, plo = two_prod(xhi, yhi)
    plo = plo + (xhi * ylo + xlo * yhi)
    return _quick_two_sum(phi, plo)


def dd_pow_int(xhi, xlo, k: int):
    """Double-double integer power via square-and-multiply. Requires k >= 0."""
    if k == 0:
        return np.ones_like(xhi), np.zeros_like(xhi)
    rhi, rlo = None, None
    bhi, blo = xhi, xlo
    e = k
    while e > 0:
        if e & 1:
            if rhi is None:
                rhi, rlo = bhi.copy(), blo.copy()
            else:
                rhi, rlo = dd_mul(rhi, rlo, bhi, blo)
        e >>= 1
        if e:
            bhi, blo = dd_mul(bhi, blo, bhi, blo)
    return rhi, rlo


def dd_sum_axis(hi, lo, axis=-1):
    """Double-double pairwise reduction of paired arrays along an axis."""
    hi = np.moveaxis(np.asarray(hi, dtype=float), axis, -1)
    lo = np.moveaxis(np.asarray(lo, dtype=float), axis, -1)
    while hi.shape[-1] > 1:
        n = hi.shape[-1]
        half = n // 2
        ahi, alo = hi[..., :half], lo[..., :half]
        bhi, blo = hi[..., half : 2 * half], lo[..., half : 2 * half]
        shi, slo = dd_add(ahi, alo, bhi, blo)
        if n % 2:
            shi = np.concatenate([shi, hi[..., -1:]], axis=-1)
            slo = np.concatenate([slo, lo[..., -1:]], axis=-1)
        hi, lo = shi, slo
    return hi[..., 0], lo[..., 0]


def _quick_two_sum(a, b):
    # Assumes |a| >= |b| componentwise in the usual dd invariants; the
    # renormalization is still correct (if slightly weaker) when violated.
    s = a + b
    e = b - (s - a)
    return s, e


def ipow(base: np.ndarray, k: int) -> np.ndarray:
    """Integer power by binary exponentiation (ordinary float64).

    Faster than np.power with a float exponent for the small k used here,
    and deterministic across platforms.
    """
    if k == 0:
        return np.ones_like(base)
    result = None
    b = base
    e = k
    while e > 0:
        if e & 1:
            result = b.copy() if result is None else result * b
        e >>= 1
        if e:
            b = b * b
    return result
