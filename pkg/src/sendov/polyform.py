"""Polynomials in integral form ``P(z) = int_beta^z prod_i (w - zeta_i)**m_i dw``.

``P'`` is the monic product over the critical points, so ``P`` has leading
coefficient ``1/n`` and vanishes at ``beta`` by construction.  Coordinates
are stored as :class:`~decimal.Decimal` so that values printed with more
digits than binary64 holds survive a JSON round trip unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DegreeTooLarge, InvalidSpec
from . import quadrature

DENSE_DEGREE_CAP = 64
DD_DEGREE_THRESHOLD = 300


def to_decimal(x) -> Decimal:
    """Exact decimal for a number or numeric string.

    Floats go through ``repr`` so ``0.674`` stays ``Decimal('0.674')``.
    """
    if isinstance(x, Decimal):
        return x
    if isinstance(x, bool):
        raise InvalidSpec(f"not a number: {x!r}")
    if isinstance(x, int):
        return Decimal(x)
    if isinstance(x, float):
        if not np.isfinite(x):
            raise InvalidSpec(f"non-finite value: {x!r}")
        return Decimal(repr(float(x)))
    if isinstance(x, str):
        try:
            d = Decimal(x.strip().replace("−", "-"))
        except Exception as exc:
            raise InvalidSpec(f"malformed decimal {x!r}") from exc
        if not d.is_finite():
            raise InvalidSpec(f"non-finite value: {x!r}")
        return d
    try:
        return Decimal(repr(float(x)))
    except (TypeError, ValueError) as exc:
        raise InvalidSpec(f"not a number: {x!r}") from exc


@dataclass(frozen=True, init=False)
class CriticalPoint:
    """A root ``zeta`` of ``P'`` with multiplicity ``m``."""

    re: Decimal
    im: Decimal
    m: int

    def __init__(self, zeta, m: int = 1):
        if isinstance(zeta, tuple):
            re, im = zeta
        elif isinstance(zeta, complex):
            re, im = zeta.real, zeta.imag
        else:
            re, im = zeta, 0
        if isinstance(m, bool) or int(m) != m or m < 1:
            raise InvalidSpec(f"multiplicity must be a positive integer, got {m!r}")
        object.__setattr__(self, "re", to_decimal(re))
        object.__setattr__(self, "im", to_decimal(im))
        object.__setattr__(self, "m", int(m))

    @property
    def zeta(self) -> complex:
        return complex(float(self.re), float(self.im))

    def conjugate(self) -> "CriticalPoint":
        return CriticalPoint((self.re, -self.im), self.m)


@dataclass(frozen=True, init=False)
class PolySpec:
    """``beta`` plus the critical points (conjugate pairs as two entries)."""

    beta_dec: Decimal
    crits: tuple[CriticalPoint, ...]

    def __init__(self, beta, crits: Iterable[CriticalPoint]):
        b = to_decimal(beta)
        crits = tuple(crits)
        if not all(isinstance(c, CriticalPoint) for c in crits):
            raise InvalidSpec("crits must be CriticalPoint instances")
        if not (0 <= b <= 1):
            raise InvalidSpec(f"beta must lie in [0, 1], got {b}")
        if 1 + sum(c.m for c in crits) < 2:
            raise InvalidSpec("degree must be at least 2")
        object.__setattr__(self, "beta_dec", b)
        object.__setattr__(self, "crits", crits)

    @property
    def beta(self) -> float:
        return float(self.beta_dec)

    @property
    def n(self) -> int:
        return degree(self)

    def zetas(self) -> np.ndarray:
        return np.array([c.zeta for c in self.crits], dtype=complex)

    def multiplicities(self) -> np.ndarray:
        return np.array([c.m for c in self.crits], dtype=np.int64)

    def distinct(self) -> list[tuple[Decimal, Decimal, int]]:
        """Merge repeated critical points; order of first appearance."""
        merged: dict[tuple[Decimal, Decimal], int] = {}
        for c in self.crits:
            key = (c.re, c.im)
            merged[key] = merged.get(key, 0) + c.m
        return [(re, im, m) for (re, im), m in merged.items()]


@dataclass(frozen=True)
class CoefficientPoly:
    """Dense polynomial, coefficients in ascending degree order."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if not self.coeffs or self.coeffs[-1] == 0:
            raise InvalidSpec("leading coefficient must be nonzero")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return horner(self.coeffs, z)

    def derivative(self) -> "CoefficientPoly":
        c = np.asarray(self.coeffs, dtype=complex)
        return CoefficientPoly(tuple(c[1:] * np.arange(1, len(c))))

    def roots(self) -> np.ndarray:
        """Companion-matrix eigenvalues (numpy)."""
        return np.roots(np.asarray(self.coeffs, dtype=complex)[::-1])


def horner(coeffs: Sequence[complex], z):
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def degree(spec: PolySpec) -> int:
    return 1 + sum(c.m for c in spec.crits)


def resolve_precision(spec: PolySpec, precision: str) -> str:
    if precision == "auto":
        return "dd" if degree(spec) >= DD_DEGREE_THRESHOLD else "double"
    if precision not in ("double", "dd"):
        raise ValueError(f"unknown precision {precision!r}")
    return precision


def log_derivative(spec: PolySpec, z) -> np.ndarray:
    """Complex ``log P'(z)``; real part is ``log|P'(z)|`` (``-inf`` at a critical point)."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for re, im, m in spec.distinct():
            out = out + m * np.log(z - complex(float(re), float(im)))
    return out


def eval_derivative_scaled(spec: PolySpec, z, precision: str = "double"):
    """``P'(z)`` as ``(mantissa, log_scale)`` with ``P' = mantissa * exp(log_scale)``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if resolve_precision(spec, precision) == "dd":
        mant, exp2 = quadrature.dd_derivative(spec, z)
        return mant, exp2 * np.log(2.0)
    logf = log_derivative(spec, z)
    scale = np.where(np.isfinite(logf.real), logf.real, 0.0)
    with np.errstate(invalid="ignore"):
        mant = np.where(np.isfinite(logf.real), np.exp(1j * logf.imag), 0.0)
    return mant, scale


def eval_derivative(spec: PolySpec, z, precision: str = "double"):
    """``prod_i (z - zeta_i)**m_i``.

    Magnitude and phase are accumulated separately (log form, or scaled
    double-double powers), so huge multiplicities do not overflow midway.
    Small degrees use the plain complex product.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if degree(spec) <= DENSE_DEGREE_CAP and resolve_precision(spec, precision) == "double":
        out = np.ones(zz.shape, dtype=complex)
        for re, im, m in spec.distinct():
            out = out * (zz - complex(float(re), float(im))) ** m
    else:
        mant, scale = eval_derivative_scaled(spec, zz, precision)
        with np.errstate(over="ignore"):
            out = mant * np.exp(scale)
    return out[0] if scalar else out


def evaluate_scaled(spec: PolySpec, z, precision: str = "double", rtol: float | None = None):
    """``P(z)`` as ``(mantissa, log_scale)``; see :func:`evaluate`."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    return quadrature.integrate(spec, z, resolve_precision(spec, precision), rtol=rtol)


def evaluate(spec: PolySpec, z, precision: str = "double", rtol: float | None = None):
    """``P(z)`` by adaptive Gauss-Legendre quadrature of ``P'`` along ``[beta, z]``.

    Raises :class:`QuadratureNoConvergence` if the depth cap is reached.
    """
    scalar = np.ndim(z) == 0
    mant, scale = evaluate_scaled(spec, z, precision, rtol)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(mant == 0, 0.0, mant * np.exp(scale))
    return out[0] if scalar else out


def expand_coefficients(spec: PolySpec, cap: int = DENSE_DEGREE_CAP) -> CoefficientPoly:
    """Dense coefficients of ``P``: convolve the linear factors of ``P'``,
    integrate termwise, then fix the constant so ``P(beta) = 0``."""
    n = degree(spec)
    if n > cap:
        raise DegreeTooLarge(f"degree {n} exceeds dense cap {cap}")
    d = np.array([1.0 + 0j])
    for c in spec.crits:
        for _ in range(c.m):
            d = np.convolve(d, np.array([-c.zeta, 1.0]))
    p = np.zeros(n + 1, dtype=complex)
    p[1:] = d / np.arange(1, n + 1)
    p[0] = -horner(p, spec.beta)
    return CoefficientPoly(tuple(complex(x) for x in p))


# ---------------------------------------------------------------- JSON

def crits_from_list(items) -> list[CriticalPoint]:
    out = []
    for item in items:
        try:
            re, im, m = item["re"], item.get("im", 0), item["m"]
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidSpec(f"malformed critical point {item!r}") from exc
        cp = CriticalPoint((re, im), m)
        out.append(cp)
        if item.get("pm") or item.get("conjugate_pair"):
            if cp.im == 0:
                raise InvalidSpec("conjugate pair with zero imaginary part")
            out.append(cp.conjugate())
    return out


def spec_from_dict(data: dict) -> PolySpec:
    if not isinstance(data, dict) or "beta" not in data or "critical_points" not in data:
        raise InvalidSpec("spec needs 'beta' and 'critical_points'")
    return PolySpec(data["beta"], crits_from_list(data["critical_points"]))


def spec_to_dict(spec: PolySpec) -> dict:
    return {
        "beta": str(spec.beta_dec),
        "critical_points": [
            {"re": str(c.re), "im": str(c.im), "m": c.m} for c in spec.crits
        ],
    }


def loads_spec(text: str) -> PolySpec:
    try:
        data = json.loads(text, parse_float=Decimal, parse_int=Decimal)
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"invalid JSON: {exc}") from exc
    return spec_from_dict(data)


def dumps_spec(spec: PolySpec, **extra) -> str:
    data = spec_to_dict(spec)
    data.update(extra)
    return json.dumps(data, indent=2)


def load_spec(path) -> PolySpec:
    return loads_spec(Path(path).read_text(encoding="utf-8"))
