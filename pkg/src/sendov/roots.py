"""Root finding for integral-form polynomials and certification of S(beta) membership.

Two independent routes decide whether every root lies in the closed unit
disk: Aberth-Ehrlich simultaneous iteration (with ``beta`` pinned as a known
root), and the argument principle on a circle of radius ``1 + tol``.
Neither route ever forms dense coefficients above degree 64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MethodDisagreement, NoConvergence, OnCircleAmbiguity
from .polyform import (
    DENSE_DEGREE_CAP,
    PolySpec,
    degree,
    eval_derivative_scaled,
    evaluate_scaled,
    expand_coefficients,
    resolve_precision,
)

MEMBERSHIP_TOL = 1e-9
WINDING_CAP = 1000
CLUSTER_DISTANCE = 1e-10
STALL_STEP = 1e-7


@dataclass(frozen=True)
class RootSet:
    """All ``n`` roots of ``P``; ``roots[0]`` is ``beta``."""

    roots: np.ndarray
    residuals: np.ndarray
    sweeps: int = 0

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def max_modulus(self) -> float:
        return float(np.max(np.abs(self.roots)))

    def clusters(self, distance: float = CLUSTER_DISTANCE) -> list[list[int]]:
        """Indices of roots closer than ``distance`` (reported as repeated roots)."""
        groups: list[list[int]] = []
        seen = np.zeros(len(self.roots), dtype=bool)
        for i in range(len(self.roots)):
            if seen[i]:
                continue
            near = np.flatnonzero(np.abs(self.roots - self.roots[i]) < distance)
            seen[near] = True
            groups.append(near.tolist())
        return groups


@dataclass(frozen=True)
class MembershipReport:
    is_member: bool
    max_modulus: float
    margin: float
    method: str
    disk_count: int | None = None
    degree: int = 0
    tol: float = MEMBERSHIP_TOL
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "is_member": self.is_member,
            "max_modulus": self.max_modulus,
            "margin": self.margin,
            "method": self.method,
            "disk_count": self.disk_count,
            "degree": self.degree,
            "tol": self.tol,
        }


def _ratio(spec, z, precision):
    """Newton quotient ``P(z)/P'(z)`` from scaled evaluations."""
    mp, sp = evaluate_scaled(spec, z, precision)
    md, sd = eval_derivative_scaled(spec, z, precision)
    with np.errstate(all="ignore"):
        return mp / md * np.exp(sp - sd), mp * np.exp(sp), md * np.exp(sd)


def _aberth_step(z, k_idx, beta, newton):
    others = z[k_idx, None] - z[None, :]
    others[np.arange(k_idx.size), k_idx] = np.inf
    s = np.sum(1.0 / others, axis=1) + 1.0 / (z[k_idx] - beta)
    return newton / (1.0 - newton * s)


def find_roots(spec: PolySpec, precision: str = "auto", tol: float = 1e-13,
               max_sweeps: int = 500, polish_sweeps: int = 2) -> RootSet:
    """All roots of ``P`` by Aberth-Ehrlich iteration.

    ``beta`` is excluded from the unknowns but kept in every correction sum
    (implicit deflation).  Sweeps run in binary64; with double-double
    precision the converged roots get ``polish_sweeps`` extra Aberth
    corrections and their residuals from the double-double evaluator.

    Raises :class:`NoConvergence` after ``max_sweeps``.
    """
    precision = resolve_precision(spec, precision)
    n = degree(spec)
    beta = spec.beta
    k = n - 1
    radius = max(1.0, float(np.max(np.abs(spec.zetas())))) * (1 + 1e-3)
    angles = 2 * np.pi * np.arange(k) / k + np.pi / (2 * k) + 0.4
    z = radius * np.exp(1j * angles)
    active = np.ones(k, dtype=bool)
    prev = np.full(k, np.inf)
    sweeps = 0
    while active.any():
        if sweeps >= max_sweeps:
            raise NoConvergence(
                f"{int(active.sum())} of {k} roots unconverged after {max_sweeps} sweeps"
            )
        idx = np.flatnonzero(active)
        newton, _, dp = _ratio(spec, z[idx], "double")
        stuck = (dp == 0) | ~np.isfinite(newton)
        # landed on a critical point (or overflowed): nudge and retry
        newton = np.where(stuck, -1e-7 * (1 + np.abs(z[idx])), newton)
        step = _aberth_step(z, idx, beta, newton)
        step = np.where(np.isfinite(step), step, newton)
        z[idx] = z[idx] - step
        size = np.abs(step)
        done = (size <= tol * (1 + np.abs(z[idx]))) & ~stuck
        # a multiple root converges only linearly down to its noise floor
        stalled = (size < STALL_STEP * (1 + np.abs(z[idx]))) & (size >= 0.5 * prev[idx])
        active[idx[done | (stalled & ~stuck)]] = False
        prev[idx] = size
        sweeps += 1

    if precision == "dd":
        idx = np.arange(k)
        for _ in range(polish_sweeps):
            newton, _, _ = _ratio(spec, z, "dd")
            step = _aberth_step(z, idx, beta, newton)
            z = z - np.where(np.isfinite(step), step, 0.0)
    roots = np.concatenate([[complex(beta)], z])
    _, pv, _ = _ratio(spec, roots, precision)
    return RootSet(roots=roots, residuals=np.abs(pv), sweeps=sweeps)


def companion_roots(spec: PolySpec) -> np.ndarray:
    """Eigenvalue cross-check, only for degree <= 64."""
    return expand_coefficients(spec).roots()


def max_root_modulus(spec: PolySpec) -> float:
    """Largest root modulus; companion matrix for small degree, Aberth otherwise."""
    if degree(spec) <= DENSE_DEGREE_CAP:
        return float(max(np.max(np.abs(companion_roots(spec))), spec.beta))
    return find_roots(spec).max_modulus


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


def count_roots_in_disk(spec: PolySpec, radius: float, precision: str = "double",
                        min_width: float = 1e-13) -> int:
    """Number of roots with ``|z| < radius`` from the winding of ``P`` on the circle.

    Angular samples are bisected until every increment of ``arg P`` is below
    pi/2.  Raises :class:`OnCircleAmbiguity` when bisection would go below
    ``min_width`` radians (a root essentially on the circle).
    """
    n = degree(spec)
    theta = np.linspace(0.0, 2 * np.pi, max(64, 8 * n), endpoint=False)

    def args(th):
        mant, _ = evaluate_scaled(spec, radius * np.exp(1j * th), precision)
        if np.any(mant == 0):
            raise OnCircleAmbiguity(f"P vanishes on the circle of radius {radius}")
        return np.angle(mant)

    phase = args(theta)
    while True:
        closed_t = np.append(theta, 2 * np.pi)
        closed_p = np.append(phase, phase[0])
        inc = _wrap(np.diff(closed_p))
        bad = np.flatnonzero(np.abs(inc) >= np.pi / 2)
        if bad.size == 0:
            break
        width = np.diff(closed_t)[bad]
        if np.any(width < min_width):
            raise OnCircleAmbiguity(
                f"arg P unresolved at angular width {width.min():.3g}; root on |z| = {radius}?"
            )
        mids = closed_t[bad] + 0.5 * width
        new_phase = args(mids)
        theta = np.insert(theta, bad + 1, mids)
        phase = np.insert(phase, bad + 1, new_phase)
    winding = inc.sum() / (2 * np.pi)
    return int(round(winding))


def check_membership(spec: PolySpec, tol: float = MEMBERSHIP_TOL, precision: str = "auto",
                     winding_cap: int = WINDING_CAP) -> MembershipReport:
    """Decide ``P in S(beta)`` up to ``tol``.

    Up to degree ``winding_cap`` the zero count on ``|z| = 1 + tol`` must
    agree with the root moduli, else :class:`MethodDisagreement`.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    n = degree(spec)
    rs = find_roots(spec, precision)
    maxmod = rs.max_modulus
    member = bool(maxmod <= 1 + tol)
    count = None
    method = "direct_roots"
    if n <= winding_cap:
        count = count_roots_in_disk(spec, 1 + tol)
        method = "both"
        if (count == n) != member:
            raise MethodDisagreement(
                f"roots give max modulus {maxmod!r} but {count} of {n} roots counted inside"
            )
    return MembershipReport(
        is_member=member,
        max_modulus=maxmod,
        margin=1 + tol - maxmod,
        method=method,
        disk_count=count,
        degree=n,
        tol=tol,
    )
