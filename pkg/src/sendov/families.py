"""Generators for special polynomial families and checks of their distance bounds.

Every generator emits a :class:`PolySpec` with ``beta`` real in ``[0, 1]``
(rotations about the origin do not change any distance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegreeTooLarge, NotRealPolynomial, RootOutsideDisk
from .polyform import DENSE_DEGREE_CAP, CriticalPoint, PolySpec, spec_to_dict

DISK_SLACK = 1e-12


@dataclass(frozen=True)
class FamilyDescriptor:
    family: str
    params: dict = field(default_factory=dict)

    def build(self) -> PolySpec:
        return GENERATORS[self.family](**self.params)

    def to_dict(self) -> dict:
        data = spec_to_dict(self.build())
        data["family"] = {"name": self.family, "params": _jsonable(self.params)}
        return data


def _jsonable(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        if isinstance(v, complex):
            out[k] = {"re": v.real, "im": v.imag}
        elif isinstance(v, (list, tuple)):
            out[k] = list(v)
        else:
            out[k] = v
    return out


def brs_star(n: int) -> PolySpec:
    """``(z**n - z)/n`` with ``beta = 0``: critical points on a circle of radius ``(1/n)**(1/(n-1))``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    rho = (1 / n) ** (1 / (n - 1))
    k = n - 1
    crits = []
    for j in range(k):
        w = rho * complex(math.cos(2 * math.pi * j / k), math.sin(2 * math.pi * j / k))
        crits.append(CriticalPoint(w, 1))
    return PolySpec(0, crits)


def circle_one_crit(n: int, beta: float, zeta: complex) -> PolySpec:
    """``((z - zeta)**n - (beta - zeta)**n)/n``: roots on the circle about ``zeta`` through ``beta``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return PolySpec(beta, [CriticalPoint(complex(zeta), n - 1)])


def extremal_radius(n: int, beta: float) -> float:
    """Largest circle radius for a single critical point with all roots in the disk.

    Even ``n``: the root opposite ``beta`` sits at -1.  Odd ``n``: the two
    roots nearest the opposite side sit on the unit circle.
    """
    if n < 2 or not (0 <= beta <= 1):
        raise ValueError("need n >= 2 and beta in [0, 1]")
    if n % 2 == 0:
        return (1 + beta) / 2
    cos_term = 1 + math.cos(math.pi / n)
    return (beta + math.sqrt(beta * beta + 2 * (1 - beta * beta) / cos_term)) / 2


def extremal_circle(n: int, beta: float) -> PolySpec:
    """Single critical point on the real axis at the extremal radius from ``beta``."""
    return circle_one_crit(n, beta, beta - extremal_radius(n, beta))


def _crits_from_roots(roots: np.ndarray) -> list[CriticalPoint]:
    if len(roots) > DENSE_DEGREE_CAP:
        raise DegreeTooLarge(f"degree {len(roots)} exceeds dense cap {DENSE_DEGREE_CAP}")
    coeffs = np.poly(roots)
    crit = np.roots(np.polyder(coeffs)) if len(roots) > 1 else np.array([])
    return [CriticalPoint(complex(c), 1) for c in crit]


def line_rooted(beta: float, offsets: Sequence[float], angle: float = 0.0) -> PolySpec:
    """Roots ``beta`` and ``beta + t e^{i angle}`` for each offset ``t``."""
    direction = complex(math.cos(angle), math.sin(angle))
    roots = np.array([beta] + [beta + t * direction for t in offsets], dtype=complex)
    if np.any(np.abs(roots) > 1 + DISK_SLACK):
        raise RootOutsideDisk(f"max root modulus {np.abs(roots).max():.17g} exceeds 1")
    return PolySpec(beta, _crits_from_roots(roots))


def interlaces(root_pos: np.ndarray, crit_pos: np.ndarray, slack: float = 1e-9) -> bool:
    """Each gap between consecutive roots on a line holds exactly one critical point."""
    r = np.sort(np.asarray(root_pos, dtype=float))
    c = np.sort(np.asarray(crit_pos, dtype=float))
    if c.size != r.size - 1:
        return False
    return bool(np.all(c >= r[:-1] - slack) and np.all(c <= r[1:] + slack))


def phelps_rodriguez(n: int, t: float = 0.0) -> PolySpec:
    """``(z**n - e^{it})/n`` rotated so the chosen root is ``beta = 1``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    return PolySpec(1, [CriticalPoint(0, n - 1)])


@dataclass(frozen=True)
class QuarticCheck:
    d: float
    dpb_modulus: float
    bound_applicable: bool
    holds: bool


def _check_real(beta: float, roots: np.ndarray) -> None:
    coeffs = np.poly(np.concatenate([[beta], roots]))
    if np.max(np.abs(coeffs.imag)) > 1e-12 * max(1.0, np.max(np.abs(coeffs))):
        raise NotRealPolynomial("roots are not closed under conjugation")


def lemma4_check(beta: float, other_roots: Sequence[complex], rtol: float = 1e-10) -> QuarticCheck:
    """For the monic quartic ``(z - beta) prod (z - z_i)``: whenever
    ``d > (1 + beta)/2``, check ``|P'(beta)| <= (1 + beta)**2``."""
    roots = np.asarray(other_roots, dtype=complex)
    if roots.shape != (3,):
        raise ValueError("need exactly three other roots")
    if np.any(np.abs(roots) > 1 + DISK_SLACK) or not (0 <= beta <= 1):
        raise RootOutsideDisk("quartic is not in S(beta)")
    _check_real(beta, roots)
    d, dpb = quartic_metrics(np.array([beta]), roots[None, :])
    applicable = bool(d[0] > (1 + beta) / 2)
    holds = (not applicable) or bool(dpb[0] <= (1 + beta) ** 2 * (1 + rtol))
    return QuarticCheck(float(d[0]), float(dpb[0]), applicable, holds)


def quartic_metrics(beta: np.ndarray, roots: np.ndarray):
    """Batched ``d(P, beta)`` and ``|P'(beta)|`` for monic quartics with roots ``beta, roots[i]``."""
    beta = np.asarray(beta, dtype=complex)
    all_roots = np.concatenate([beta[:, None], roots], axis=1)
    crit = critical_points_batch(all_roots)
    d = np.min(np.abs(crit - beta[:, None]), axis=1)
    dpb = np.prod(np.abs(beta[:, None] - roots), axis=1)
    return d, dpb


def critical_points_batch(roots: np.ndarray) -> np.ndarray:
    """Roots of ``P'`` for many monic ``P`` given by rows of ``roots`` (companion eigenvalues)."""
    roots = np.asarray(roots, dtype=complex)
    count, n = roots.shape
    coeffs = np.ones((count, 1), dtype=complex)  # descending powers
    for j in range(n):
        coeffs = np.concatenate([coeffs, np.zeros((count, 1))], axis=1)
        coeffs[:, 1:] -= roots[:, j:j + 1] * coeffs[:, :-1]
    deriv = coeffs[:, :-1] * np.arange(n, 0, -1)[None, :]
    monic = deriv[:, 1:] / deriv[:, :1]
    k = n - 1
    comp = np.zeros((count, k, k), dtype=complex)
    comp[:, 0, :] = -monic
    if k > 1:
        comp[:, np.arange(1, k), np.arange(k - 1)] = 1.0
    return np.linalg.eigvals(comp)


# ------------------------------------------------------------ sampling

def uniform_disk(rng: np.random.Generator, size) -> np.ndarray:
    """Uniform points in the closed unit disk (radius = sqrt(u))."""
    r = np.sqrt(rng.random(size))
    return r * np.exp(2j * np.pi * rng.random(size))


def sample_real_quartics(rng: np.random.Generator, size: int):
    """``beta`` uniform in [0, 1]; the other three roots are one real root plus a
    conjugate pair, or three real roots, with equal probability."""
    beta = rng.random(size)
    roots = np.empty((size, 3), dtype=complex)
    three_real = rng.random(size) < 0.5
    roots[:, 0] = rng.uniform(-1, 1, size)
    pair = uniform_disk(rng, size)
    roots[:, 1] = np.where(three_real, rng.uniform(-1, 1, size), pair)
    roots[:, 2] = np.where(three_real, rng.uniform(-1, 1, size), pair.conjugate())
    return beta, roots


def sample_line_rooted(rng: np.random.Generator, max_degree: int = 10):
    """Random ``(beta, offsets, angle)`` with every root on the chord through ``beta``."""
    beta = rng.random()
    angle = rng.uniform(0, 2 * math.pi)
    n = int(rng.integers(2, max_degree + 1))
    c = math.cos(angle)
    disc = math.sqrt(beta * beta * c * c - beta * beta + 1)
    lo, hi = -beta * c - disc, -beta * c + disc
    offsets = rng.uniform(lo, hi, n - 1)
    return beta, offsets, angle


GENERATORS = {
    "brs_star": brs_star,
    "circle_one_crit": circle_one_crit,
    "line_rooted": line_rooted,
    "phelps_rodriguez": phelps_rodriguez,
    "extremal_circle": extremal_circle,
    "real_quartic": lambda beta, roots: PolySpec(
        beta, _crits_from_roots(np.array([beta] + [complex(r) for r in roots]))
    ),
}
