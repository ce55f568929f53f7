"""Vectorized double-double arithmetic on numpy arrays.

A real double-double is a pair ``(hi, lo)`` of float64 arrays with
``|lo| <= ulp(hi)/2``; the represented value is ``hi + lo`` and carries
roughly 31 significant decimal digits.  A complex double-double is a pair
``(re, im)`` of real double-doubles.

Only the operations needed to evaluate products of high powers and to sum
quadrature panels are provided.  Magnitudes are kept near 1 by the callers
(see :func:`cpow_scaled`), so the Dekker split never overflows.
"""

from __future__ import annotations

from decimal import Decimal

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


def from_decimal(x: Decimal) -> tuple[float, float]:
    hi = float(x)
    lo = float(x - Decimal(hi))
    return hi, lo


def to_decimal(x) -> Decimal:
    return Decimal(float(x[0])) + Decimal(float(x[1]))


def add(x, y):
    s, e = two_sum(x[0], y[0])
    t, f = two_sum(x[1], y[1])
    e = e + t
    s, e = quick_two_sum(s, e)
    e = e + f
    return quick_two_sum(s, e)


def neg(x):
    return -x[0], -x[1]


def sub(x, y):
    return add(x, neg(y))


def mul(x, y):
    p, e = two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return quick_two_sum(p, e)


def mul_double(x, b):
    p, e = two_prod(x[0], b)
    e = e + x[1] * b
    return quick_two_sum(p, e)


def ldexp(x, k):
    return np.ldexp(x[0], k), np.ldexp(x[1], k)


# complex double-double: ((re_hi, re_lo), (im_hi, im_lo))

def cadd(x, y):
    return add(x[0], y[0]), add(x[1], y[1])


def csub(x, y):
    return sub(x[0], y[0]), sub(x[1], y[1])


def cmul(x, y):
    re = sub(mul(x[0], y[0]), mul(x[1], y[1]))
    im = add(mul(x[0], y[1]), mul(x[1], y[0]))
    return re, im


def cmul_real(x, r):
    return mul(x[0], r), mul(x[1], r)


def cldexp(x, k):
    return ldexp(x[0], k), ldexp(x[1], k)


def to_complex(x) -> np.ndarray:
    return (x[0][0] + x[0][1]) + 1j * (x[1][0] + x[1][1])


def czeros(shape):
    z = np.zeros(shape)
    return (z, z.copy()), (z.copy(), z.copy())


def _renormalize(x, exp):
    """Rescale so the larger hi component lies in [0.5, 1); returns new exponent."""
    big = np.maximum(np.abs(x[0][0]), np.abs(x[1][0]))
    _, e = np.frexp(big)
    return cldexp(x, -e), exp + e


def cpow_scaled(x, m: int):
    """Return ``(mantissa, exponent)`` with ``x**m == mantissa * 2**exponent``.

    Binary exponentiation with renormalization after every product, so
    powers in the thousands neither overflow nor underflow.
    """
    shape = np.shape(x[0][0])
    exp_base = np.zeros(shape, dtype=np.int64)
    base, exp_base = _renormalize(x, exp_base)
    one = np.ones(shape)
    zero = np.zeros(shape)
    result = ((one, zero.copy()), (zero.copy(), zero.copy()))
    exp_res = np.zeros(shape, dtype=np.int64)
    while m:
        if m & 1:
            result = cmul(result, base)
            result, exp_res = _renormalize(result, exp_res + exp_base)
        m >>= 1
        if m:
            base = cmul(base, base)
            base, exp_base = _renormalize(base, 2 * exp_base)
    return result, exp_res


def segment_sum(index: np.ndarray, x, size: int):
    """Sum real double-doubles ``x`` into ``size`` bins given by ``index``."""
    out = (np.zeros(size), np.zeros(size))
    if index.size == 0:
        return out
    order = np.argsort(index, kind="stable")
    idx = index[order]
    hi = x[0][order]
    lo = x[1][order]
    starts = np.flatnonzero(np.r_[True, idx[1:] != idx[:-1]])
    counts = np.diff(np.r_[starts, idx.size])
    groups = idx[starts]
    # rank of every element within its group, then column-wise accumulation
    rank = np.arange(idx.size) - np.repeat(starts, counts)
    acc = (np.zeros(groups.size), np.zeros(groups.size))
    for r in range(int(counts.max())):
        sel = rank == r
        g = np.searchsorted(groups, idx[sel])
        part = (np.zeros(groups.size), np.zeros(groups.size))
        part[0][g] = hi[sel]
        part[1][g] = lo[sel]
        acc = add(acc, part)
    out[0][groups] = acc[0]
    out[1][groups] = acc[1]
    return out
