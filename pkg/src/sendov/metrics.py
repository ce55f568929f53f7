"""Distance to the nearest critical point, the deficiency ratio ``c``, and a
catalog of closed-form values and bounds for ``r_n(beta)``.

``c = (1 - d) / (beta (1 - beta))`` loses every significant digit in binary64
once ``1 - beta`` drops below ~1e-8, so both ``d`` and ``c`` are computed in
:mod:`decimal` straight from the stored decimal coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import EndpointUndefined
from .polyform import PolySpec, degree, to_decimal

SENDOV_BEST_KNOWN = 1.0753829
_PREC = 50


@dataclass(frozen=True)
class CValue:
    beta: float
    d: float
    c: float
    c_exact: Decimal | None = None


def dist_exact(spec: PolySpec) -> Decimal:
    """``min_i |zeta_i - beta|`` to 50 significant digits."""
    with localcontext() as ctx:
        ctx.prec = _PREC
        b = spec.beta_dec
        best = min(((c.re - b) ** 2 + c.im ** 2) for c in spec.crits)
        return best.sqrt()


def dist_to_nearest_critical(spec: PolySpec) -> float:
    """``d(P, beta)``; multiplicities play no role."""
    return float(dist_exact(spec))


def c_value(beta, d) -> CValue:
    """``(1 - d) / (beta (1 - beta))`` in decimal arithmetic.

    Pass ``beta`` (and ``d``) as strings or Decimals to keep digits beyond
    binary64; floats are taken at their shortest repr.
    """
    b = to_decimal(beta)
    dd = to_decimal(d)
    if not (0 < b < 1):
        raise EndpointUndefined(f"c is undefined at beta = {b}")
    with localcontext() as ctx:
        ctx.prec = _PREC
        c = (1 - dd) / (b * (1 - b))
    return CValue(beta=float(b), d=float(dd), c=float(c), c_exact=c)


def c_of_spec(spec: PolySpec) -> CValue:
    return c_value(spec.beta_dec, dist_exact(spec))


def check_refined_bound(spec: PolySpec, c: float, slack: float = 0.0) -> bool:
    """``d(P, beta) <= 1 - c beta (1 - beta)`` (plus ``slack``)."""
    with localcontext() as ctx:
        ctx.prec = _PREC
        b = spec.beta_dec
        bound = 1 - to_decimal(c) * b * (1 - b)
        return dist_exact(spec) <= bound + to_decimal(slack)


# ------------------------------------------------------- closed forms

def schmeisser_bound(n, beta):
    """Schmeisser's upper bound on ``r_n(beta)``."""
    beta = np.asarray(beta, dtype=float)
    return (n + 2 * beta - beta**2 * (n - 2)) / (n + 2 - beta * (n - 2))


def lemma2_bound(n, beta):
    """Quadratic relaxation of :func:`schmeisser_bound`: ``1 - (4-n)/4 beta(1-beta)``."""
    beta = np.asarray(beta, dtype=float)
    return 1 - (4 - n) / 4 * beta * (1 - beta)


def r2_exact(beta):
    return (1 + np.asarray(beta, dtype=float)) / 2


def r3_exact(beta):
    """Rahman's exact degree-3 extremal distance."""
    beta = np.asarray(beta, dtype=float)
    return (3 * beta + np.sqrt(12 - 3 * beta**2)) / 6


def rn_at_zero(n: int) -> float:
    """Extremal distance at ``beta = 0``, attained by ``z**n - z``."""
    return (1 / n) ** (1 / (n - 1))


def r5_asymptotic(beta):
    """Expansion of ``r_5`` about ``beta = 1`` without the cubic remainder."""
    u = 1 - np.asarray(beta, dtype=float)
    return 1 - 0.3 * u + u**2 / 200


def c3_of_beta(beta):
    beta = np.asarray(beta, dtype=float)
    return (6 - 3 * beta - np.sqrt(12 - 3 * beta**2)) / (6 * beta * (1 - beta))


# Miller's first-order coefficients: r_{k+1} = 1 + (D1 + D2/k)(1 - beta) + ...
MILLER_D = {
    3: (Fraction(-1, 4), Fraction(-1, 4)),
    4: (Fraction(-1, 5), Fraction(-2, 5)),
    7: ((math.sqrt(2) - 2) / 2, (math.sqrt(2) - 2) / 2),
}


def miller_limit_c(n: int) -> float:
    """``-(D1 + D2/(n-1))``: the limit of ``c_n(beta)`` as ``beta -> 1``."""
    d1, d2 = MILLER_D[n - 1]
    return float(-(d1 + d2 / (n - 1)))


_TABLE_CN = {
    2: 0.5,
    3: 1 / 3,
    4: miller_limit_c(4),
    5: miller_limit_c(5),
    6: float(Decimal("0.365121611819106")),
    7: float(Decimal("0.335088765359222")),
    8: miller_limit_c(8),
}


def conjectured_cn(n: int) -> float | None:
    """Smallest known ``c_n`` for degrees 2..8; ``None`` outside that range."""
    return _TABLE_CN.get(n)


def quadratic_bound(c: float) -> Callable:
    return lambda beta: 1 - c * np.asarray(beta, dtype=float) * (1 - np.asarray(beta, dtype=float))


# ------------------------------------------------------------ catalog

@dataclass(frozen=True)
class BoundEntry:
    name: str
    kind: str  # exact | upper_bound | conjectured | asymptotic
    applicability: str
    min_n: int
    max_n: int | None
    value: Callable[[int, np.ndarray], np.ndarray]
    beta_range: tuple[float, float] = (0.0, 1.0)

    def applies(self, n: int) -> bool:
        return n >= self.min_n and (self.max_n is None or n <= self.max_n)

    def value_at(self, n: int, beta):
        beta = np.asarray(beta, dtype=float)
        lo, hi = self.beta_range
        out = np.asarray(self.value(n, beta), dtype=float) * np.ones_like(beta)
        return np.where((beta >= lo) & (beta <= hi), out, np.nan)


def _const(c):
    return lambda n, beta: quadratic_bound(c)(beta)


CATALOG: tuple[BoundEntry, ...] = (
    BoundEntry("schmeisser_bound", "upper_bound", "all polynomials of degree n", 2, None,
               schmeisser_bound),
    BoundEntry("lemma2_bound", "upper_bound", "all polynomials of degree n", 2, None,
               lemma2_bound),
    BoundEntry("r2_exact", "exact", "degree 2", 2, 2, lambda n, b: r2_exact(b)),
    BoundEntry("r3_exact", "exact", "degree 3", 3, 3, lambda n, b: r3_exact(b)),
    BoundEntry("rn_at_zero", "exact", "beta = 0, degree n", 2, None,
               lambda n, b: np.full_like(b, rn_at_zero(n)), (0.0, 0.0)),
    BoundEntry("r5_asymptotic", "asymptotic", "degree 5, beta near 1", 5, 5,
               lambda n, b: r5_asymptotic(b)),
    BoundEntry("sendov", "conjectured", "all polynomials", 2, None,
               lambda n, b: np.ones_like(b)),
    BoundEntry("best_known_general", "upper_bound", "all polynomials", 2, None,
               lambda n, b: np.full_like(b, SENDOV_BEST_KNOWN)),
    BoundEntry("real_quartic_bound", "upper_bound", "real polynomials of degree 4", 4, 4,
               _const(1 / 3)),
    BoundEntry("line_rooted_bound", "upper_bound", "all roots on a line", 2, None,
               _const(1 / 2)),
    BoundEntry("one_critical_point_bound", "upper_bound", "exactly one distinct critical point",
               2, None, _const(1 / 3)),
    BoundEntry("near_one_bound", "asymptotic", "beta sufficiently close to 1", 2, None,
               _const(3 / 10)),
    BoundEntry("conjectured_degree_bound", "conjectured", "degree n, 2 <= n <= 8", 2, 8,
               lambda n, b: quadratic_bound(conjectured_cn(n))(b)),
    BoundEntry("two_critical_points_bound", "conjectured", "at most 2 distinct critical points",
               2, None, _const(3 / 10)),
    BoundEntry("three_critical_points_bound", "conjectured",
               "at most 3 distinct critical points", 2, None, _const(4 / 15)),
    BoundEntry("four_critical_points_bound", "conjectured",
               "at most 4 distinct critical points", 2, None, _const(0.24483)),
    BoundEntry("general_conjectured_bound", "conjectured", "all polynomials", 2, None,
               _const(0.233)),
)


def catalog_for(n: int) -> list[BoundEntry]:
    return [e for e in CATALOG if e.applies(n)]


def bound(name: str) -> BoundEntry:
    for e in CATALOG:
        if e.name == name:
            return e
    raise KeyError(name)
