"""Adaptive Gauss-Legendre integration of ``P'`` along the segment ``[beta, z]``.

Many endpoints are integrated at once: every panel of every segment sits in
one flat work list, and each round bisects the panels whose 16-point
estimate disagrees with the sum over its two halves.  Values are carried
relative to a per-endpoint reference magnitude ``exp(ref)`` so that
integrands like ``(w - zeta)**3197`` stay representable.

Two arithmetic backends share the driver: plain complex128 with the
integrand built in log form, and double-double with scaled binary powers.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import ddouble as dd
from .errors import QuadratureNoConvergence

ORDER = 16
MAX_DEPTH = 40
RTOL = {"double": 1e-12, "dd": 1e-27}
ATOL = 1e-300
_CHUNK = 1 << 14  # panels per vectorized batch

_X, _W = np.polynomial.legendre.leggauss(ORDER)
_LN2 = np.log(2.0)


@lru_cache(maxsize=None)
def _dd_nodes():
    """Gauss-Legendre nodes and weights to ~35 digits, as double-double pairs."""
    import mpmath

    with mpmath.workprec(160):
        xs, ws = [], []
        for x0 in _X:
            x = mpmath.mpf(float(x0))
            for _ in range(8):
                p0, p1 = mpmath.mpf(1), x
                for k in range(2, ORDER + 1):
                    p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
                dp = ORDER * (x * p1 - p0) / (x * x - 1)
                x = x - p1 / dp
            p0, p1 = mpmath.mpf(1), x
            for k in range(2, ORDER + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = ORDER * (x * p1 - p0) / (x * x - 1)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
        split = lambda v: (float(v), float(v - mpmath.mpf(float(v))))  # noqa: E731
        xh, xl = zip(*(split(v) for v in xs))
        wh, wl = zip(*(split(v) for v in ws))
    return (np.array(xh), np.array(xl)), (np.array(wh), np.array(wl))


class _DoubleBackend:
    def __init__(self, spec, z):
        self.beta = spec.beta
        self.dz = z - self.beta
        self.crits = [(complex(float(re), float(im)), m) for re, im, m in spec.distinct()]
        self.ref = None

    def log_modulus(self, w):
        out = np.zeros(w.shape)
        with np.errstate(divide="ignore"):
            for zeta, m in self.crits:
                out += m * np.log(np.abs(w - zeta))
        return out

    def nodes(self, zi, a, b):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        t = mid[:, None] + half[:, None] * _X[None, :]
        return self.beta + t * self.dz[zi][:, None], half

    def panel(self, zi, a, b):
        w, half = self.nodes(zi, a, b)
        logf = np.zeros(w.shape, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            for zeta, m in self.crits:
                logf += m * np.log(w - zeta)
            logf -= self.ref[zi][:, None]
            f = np.exp(logf)
        f = np.where(np.isfinite(logf.real), f, 0.0)
        return half * (f @ _W), half * (np.abs(f) @ _W)

    zeros = staticmethod(lambda k: np.zeros(k, dtype=complex))
    add = staticmethod(np.add)

    @staticmethod
    def take(v, sel):
        return v[sel]

    @staticmethod
    def concat(vs):
        return np.concatenate(vs)

    @staticmethod
    def diff_abs(g, h):
        return np.abs(g - h)

    @staticmethod
    def accumulate(total, zi, v):
        np.add.at(total, zi, v)
        return total

    @staticmethod
    def to_complex(v):
        return v


class _DDBackend(_DoubleBackend):
    def __init__(self, spec, z):
        super().__init__(spec, z)
        self.beta_dd = dd.from_decimal(spec.beta_dec)
        self.crits_dd = [
            (dd.from_decimal(re), dd.from_decimal(im), m) for re, im, m in spec.distinct()
        ]
        # z - beta in double-double; z itself is exact as given
        beta = (np.full(z.shape, self.beta_dd[0]), np.full(z.shape, self.beta_dd[1]))
        re = dd.sub((z.real.copy(), np.zeros(z.shape)), beta)
        self.dz_dd = (re, (z.imag.copy(), np.zeros(z.shape)))
        self.eref = None

    def panel(self, zi, a, b):
        (xh, xl), (wh, wl) = _dd_nodes()
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)  # power of two: exact scaling
        P = zi.size
        t = dd.add(
            (np.repeat(mid, ORDER), np.zeros(P * ORDER)),
            (np.outer(half, xh).ravel(), np.outer(half, xl).ravel()),
        )
        idx = np.repeat(zi, ORDER)
        (rh, rl), (ih, il) = self.dz_dd
        dz = ((rh[idx], rl[idx]), (ih[idx], il[idx]))
        w = dd.cmul_real(dz, t)
        w = (dd.add(w[0], self.beta_dd), w[1])
        mant, expo = power_product(self.crits_dd, w)
        mant = dd.cldexp(mant, expo - self.eref[idx])
        val = dd.czeros(P)
        mass = np.zeros(P)
        re, im = mant
        for k in range(ORDER):
            sl = slice(k, None, ORDER)
            node = ((re[0][sl], re[1][sl]), (im[0][sl], im[1][sl]))
            val = dd.cadd(val, dd.cmul_real(node, (wh[k], wl[k])))
            mass += wh[k] * np.hypot(node[0][0], node[1][0])
        val = (dd.mul_double(val[0], half), dd.mul_double(val[1], half))
        return val, half * mass

    @staticmethod
    def zeros(k):
        return dd.czeros(k)

    add = staticmethod(dd.cadd)

    @staticmethod
    def take(v, sel):
        return tuple(tuple(part[sel] for part in comp) for comp in v)

    @staticmethod
    def concat(vs):
        return tuple(
            tuple(np.concatenate([v[c][p] for v in vs]) for p in range(2)) for c in range(2)
        )

    @staticmethod
    def diff_abs(g, h):
        return np.abs(dd.to_complex(dd.csub(g, h)))

    @staticmethod
    def accumulate(total, zi, v):
        k = total[0][0].size
        return dd.cadd(total, (dd.segment_sum(zi, v[0], k), dd.segment_sum(zi, v[1], k)))

    @staticmethod
    def to_complex(v):
        return dd.to_complex(v)


def power_product(crits_dd, w):
    """``prod (w - zeta)**m`` in double-double as ``(mantissa, binary exponent)``."""
    shape = w[0][0].shape
    mant = ((np.ones(shape), np.zeros(shape)), (np.zeros(shape), np.zeros(shape)))
    expo = np.zeros(shape, dtype=np.int64)
    for re, im, m in crits_dd:
        diff = (dd.sub(w[0], re), dd.sub(w[1], im))
        pm, pe = dd.cpow_scaled(diff, m)
        mant = dd.cmul(mant, pm)
        expo = expo + pe
    return mant, expo


def dd_derivative(spec, z):
    """``P'(z)`` through the double-double path; returns ``(mantissa, exponent2)``."""
    crits_dd = [(dd.from_decimal(re), dd.from_decimal(im), m) for re, im, m in spec.distinct()]
    w = ((z.real.copy(), np.zeros(z.shape)), (z.imag.copy(), np.zeros(z.shape)))
    mant, expo = power_product(crits_dd, w)
    out = dd.to_complex(mant)
    expo = np.where(out == 0, 0, expo)
    return out, expo.astype(float)


def _initial_panels(n: int, length: np.ndarray) -> np.ndarray:
    want = np.maximum(1.0, n * length / 16.0)
    return np.minimum(2.0 ** np.ceil(np.log2(want)), 2.0**14).astype(np.int64)


def integrate(spec, z: np.ndarray, precision: str = "double", rtol: float | None = None,
              max_depth: int = MAX_DEPTH):
    """Return ``(mantissa, log_scale)`` with ``P(z) = mantissa * exp(log_scale)``."""
    from .polyform import degree

    z = np.asarray(z, dtype=complex)
    rtol = RTOL[precision] if rtol is None else rtol
    mant = np.zeros(z.shape, dtype=complex)
    scale = np.zeros(z.shape)
    live = np.flatnonzero(z != spec.beta)
    if live.size == 0:
        return mant, scale
    zl = z[live]
    backend = (_DDBackend if precision == "dd" else _DoubleBackend)(spec, zl)
    n = degree(spec)

    counts = _initial_panels(n, np.abs(zl - spec.beta))
    zi = np.repeat(np.arange(zl.size), counts)
    k = np.arange(zi.size) - np.repeat(np.cumsum(counts) - counts, counts)
    a = k / counts[zi]
    b = (k + 1) / counts[zi]

    # reference magnitude per endpoint from the initial nodes
    w, _ = backend.nodes(zi, a, b)
    logmod = backend.log_modulus(w).max(axis=1)
    ref = np.full(zl.size, -np.inf)
    np.maximum.at(ref, zi, logmod)
    ref = np.where(np.isfinite(ref), ref, 0.0)
    if precision == "dd":
        backend.eref = np.floor(ref / _LN2).astype(np.int64)
        ref = backend.eref * _LN2
    backend.ref = ref
    atol = np.exp(np.clip(np.log(ATOL) - ref, -745.0, 700.0))

    def batched(fn, zi, a, b):
        vals, masses = [], []
        for s in range(0, zi.size, _CHUNK):
            v, m = fn(zi[s:s + _CHUNK], a[s:s + _CHUNK], b[s:s + _CHUNK])
            vals.append(v)
            masses.append(m)
        return backend.concat(vals), np.concatenate(masses)

    total = backend.zeros(zl.size)
    g, m0 = batched(backend.panel, zi, a, b)
    # global budget: a panel of width h may carry error rtol * h * (total mass),
    # otherwise odd-order zeros of P' on the segment never resolve
    mass_total = np.zeros(zl.size)
    np.add.at(mass_total, zi, m0)
    depth = 0
    while zi.size:
        if depth >= max_depth:
            raise QuadratureNoConvergence(
                f"{zi.size} panels unresolved after {max_depth} bisections"
            )
        m = 0.5 * (a + b)
        both_z = np.concatenate([zi, zi])
        lo = np.concatenate([a, m])
        hi = np.concatenate([m, b])
        vals, masses = batched(backend.panel, both_z, lo, hi)
        P = zi.size
        left = backend.take(vals, slice(0, P))
        right = backend.take(vals, slice(P, None))
        h = backend.add(left, right)
        err = backend.diff_abs(g, h)
        mass = masses[:P] + masses[P:]
        ok = err <= rtol * np.maximum(mass, (b - a) * mass_total[zi]) + atol[zi]
        total = backend.accumulate(total, zi[ok], backend.take(h, ok))
        bad = ~ok
        g = backend.concat([backend.take(left, bad), backend.take(right, bad)])
        zi = np.concatenate([zi[bad], zi[bad]])
        a, b = np.concatenate([a[bad], m[bad]]), np.concatenate([m[bad], b[bad]])
        depth += 1

    mant[live] = backend.to_complex(total) * (zl - spec.beta)
    scale[live] = ref
    return mant, scale
