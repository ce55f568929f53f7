"""Search for critical-point configurations that minimize ``c_n(beta)``.

A configuration is a multiplicity pattern (which critical points exist, how
often they repeat, which come in conjugate pairs) plus real parameters:
``beta`` when it is free, ``(Re, Im)`` of one representative per conjugate
pair and ``Re`` of each real critical point.  Every candidate is rescaled so
its furthest root lies on the unit circle before ``c`` is measured, and the
simplex method minimizes the result.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Sequence

import numpy as np

from .errors import BetaExceedsOne, EndpointUndefined, NoFeasibleResult
from .metrics import c_of_spec, c_value, dist_exact
from .polyform import CriticalPoint, PolySpec, degree, spec_from_dict, spec_to_dict
from .roots import MEMBERSHIP_TOL, MembershipReport, check_membership, max_root_modulus

DEFAULT_BETA_RANGE = (0.01, 0.999)
PENALTY_WEIGHT = 1e3


@dataclass(frozen=True)
class Part:
    m: int
    paired: bool = False

    @property
    def points(self) -> int:
        return 2 if self.paired else 1


@dataclass(frozen=True)
class MultiplicityPattern:
    parts: tuple[Part, ...]

    def __post_init__(self):
        if not self.parts or any(p.m < 1 for p in self.parts):
            raise ValueError("pattern needs at least one part with m >= 1")
        # canonical order: pairs first, then by decreasing multiplicity
        canon = tuple(sorted(self.parts, key=lambda p: (not p.paired, -p.m)))
        object.__setattr__(self, "parts", canon)

    @classmethod
    def of(cls, *parts) -> "MultiplicityPattern":
        """``MultiplicityPattern.of((1, True), (3, False))``."""
        return cls(tuple(Part(int(m), bool(paired)) for m, paired in parts))

    @property
    def degree(self) -> int:
        return 1 + sum(p.m * p.points for p in self.parts)

    @property
    def distinct(self) -> int:
        return sum(p.points for p in self.parts)

    def n_params(self) -> int:
        return sum(2 if p.paired else 1 for p in self.parts)

    def to_list(self) -> list[dict]:
        return [{"m": p.m, "paired": p.paired} for p in self.parts]

    @classmethod
    def from_list(cls, items) -> "MultiplicityPattern":
        return cls(tuple(Part(int(i["m"]), bool(i.get("paired", False))) for i in items))

    def __str__(self) -> str:
        return "[" + ", ".join(f"({p.m}, {'paired' if p.paired else 'unpaired'})" for p in self.parts) + "]"


@dataclass(frozen=True)
class SearchProblem:
    n: int
    pattern: MultiplicityPattern
    beta_range: tuple[float, float] | None = DEFAULT_BETA_RANGE
    fixed_beta: float | None = None
    normalization: str = "rescale_to_unit"
    penalty_weight: float = PENALTY_WEIGHT

    def __post_init__(self):
        if self.pattern.degree != self.n:
            raise ValueError(f"pattern {self.pattern} has degree {self.pattern.degree}, not {self.n}")
        if self.fixed_beta is None:
            lo, hi = self.beta_range
            if not (0 < lo < hi < 1):
                raise ValueError("beta range must satisfy 0 < lo < hi < 1")
        else:
            if not (0 < self.fixed_beta < 1):
                raise ValueError("fixed beta must lie in (0, 1)")
            if self.normalization != "penalty_only":
                # rescaling would move beta
                object.__setattr__(self, "normalization", "penalty_only")
        if self.normalization not in ("rescale_to_unit", "penalty_only"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def free_beta(self) -> bool:
        return self.fixed_beta is None

    def dimension(self) -> int:
        return self.pattern.n_params() + (1 if self.free_beta else 0)

    def to_dict(self) -> dict:
        data = {"n": self.n, "pattern": self.pattern.to_list(),
                "normalization": self.normalization, "penalty_weight": self.penalty_weight}
        if self.free_beta:
            data["beta_mode"] = {"free": list(self.beta_range)}
        else:
            data["beta_mode"] = {"fixed": self.fixed_beta}
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SearchProblem":
        pattern = MultiplicityPattern.from_list(data["pattern"])
        mode = data.get("beta_mode", {"free": list(DEFAULT_BETA_RANGE)})
        kwargs = dict(
            n=int(data.get("n", pattern.degree)),
            pattern=pattern,
            normalization=data.get("normalization", "rescale_to_unit"),
            penalty_weight=float(data.get("penalty_weight", PENALTY_WEIGHT)),
        )
        if "fixed" in mode:
            return cls(fixed_beta=float(mode["fixed"]), beta_range=None, **kwargs)
        lo, hi = mode["free"]
        return cls(beta_range=(float(lo), float(hi)), **kwargs)


@dataclass
class SearchOptions:
    budget: int = 4000
    xtol: float = 1e-12
    ftol: float = 1e-13
    step: float = 0.05
    restarts: int = 1
    seed: int = 0


@dataclass(frozen=True)
class SearchResult:
    spec: PolySpec
    d: float
    c: float
    membership: MembershipReport
    converged: bool
    evaluations: int
    seed: int
    objective: float
    pattern: MultiplicityPattern | None = None

    def to_dict(self) -> dict:
        return {
            "n": degree(self.spec),
            "pattern": self.pattern.to_list() if self.pattern else None,
            "spec": spec_to_dict(self.spec),
            "d": self.d,
            "c": self.c,
            "objective": self.objective,
            "membership": self.membership.to_dict(),
            "converged": self.converged,
            "evaluations": self.evaluations,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SearchResult":
        m = data["membership"]
        return cls(
            spec=spec_from_dict(data["spec"]),
            d=float(data["d"]),
            c=float(data["c"]),
            membership=MembershipReport(
                is_member=m["is_member"], max_modulus=m["max_modulus"], margin=m["margin"],
                method=m["method"], disk_count=m["disk_count"], degree=m["degree"], tol=m["tol"],
            ),
            converged=data["converged"],
            evaluations=data["evaluations"],
            seed=data["seed"],
            objective=float(data["objective"]),
            pattern=MultiplicityPattern.from_list(data["pattern"]) if data.get("pattern") else None,
        )


# ------------------------------------------------------------ objective

def objective(spec: PolySpec, penalty_weight: float = PENALTY_WEIGHT) -> float:
    """``c(beta, d) + penalty_weight * max(0, max root modulus - 1)``; lower is better."""
    c = c_of_spec(spec).c
    return c + penalty_weight * max(0.0, max_root_modulus(spec) - 1)


def _clean(x: Decimal) -> Decimal:
    return Decimal(0) if x == 0 else x


def normalize(spec: PolySpec) -> PolySpec:
    """Divide ``beta`` and every critical point by the largest root modulus."""
    s = max_root_modulus(spec)
    with localcontext() as ctx:
        ctx.prec = 34
        sd = Decimal(repr(float(s)))
        beta = spec.beta_dec / sd
        if beta > 1:
            if beta - 1 > Decimal("1e-14"):
                raise BetaExceedsOne(f"beta/s = {beta}")
            beta = Decimal(1)
        crits = [CriticalPoint((_clean(c.re / sd), _clean(c.im / sd)), c.m) for c in spec.crits]
    return PolySpec(beta, crits)


def _points(pattern: MultiplicityPattern, x: np.ndarray):
    zetas, mults = [], []
    i = 0
    for p in pattern.parts:
        if p.paired:
            z = complex(x[i], x[i + 1])
            zetas += [z, z.conjugate()]
            mults += [p.m, p.m]
            i += 2
        else:
            zetas.append(complex(x[i], 0.0))
            mults.append(p.m)
            i += 1
    return np.array(zetas), np.array(mults)


def params_to_spec(problem: SearchProblem, x: Sequence[float]) -> PolySpec:
    x = np.asarray(x, dtype=float)
    beta = x[0] if problem.free_beta else problem.fixed_beta
    rest = x[1:] if problem.free_beta else x
    zetas, mults = _points(problem.pattern, rest)
    return PolySpec(float(beta), [CriticalPoint(complex(z), int(m)) for z, m in zip(zetas, mults)])


def spec_to_params(problem: SearchProblem, spec: PolySpec) -> np.ndarray:
    """Inverse of :func:`params_to_spec`: match critical points to the pattern's parts."""
    pool = [(c.zeta, c.m) for c in spec.crits]
    out = [spec.beta] if problem.free_beta else []
    for p in problem.pattern.parts:
        cands = [j for j, (z, m) in enumerate(pool) if m == p.m and ((z.imag > 0) if p.paired else True)]
        if not cands:
            raise ValueError(f"start spec does not match pattern {problem.pattern}")
        # real parts prefer the point closest to the axis
        j = min(cands, key=lambda j: (0 if p.paired else abs(pool[j][0].imag)))
        z, _ = pool.pop(j)
        if p.paired:
            conj = min(range(len(pool)), key=lambda k: abs(pool[k][0] - z.conjugate()))
            pool.pop(conj)
            out += [z.real, z.imag]
        else:
            out.append(z.real)
    return np.array(out)


def _max_modulus_dense(beta: float, zetas: np.ndarray, mults: np.ndarray) -> float:
    dp = np.poly(np.repeat(zetas, mults))
    n = dp.size
    # conjugate symmetry with real beta makes the coefficients real
    p = np.zeros(n + 1)
    p[:-1] = dp.real / np.arange(n, 0, -1)
    p[-1] = -np.polyval(p, beta)
    return float(max(np.max(np.abs(np.roots(p))), beta))


def _raw_objective(problem: SearchProblem, x: np.ndarray) -> float:
    """Objective after normalization, without building Decimal-backed specs."""
    beta = x[0] if problem.free_beta else problem.fixed_beta
    rest = x[1:] if problem.free_beta else x
    zetas, mults = _points(problem.pattern, rest)
    if problem.free_beta and not (0 < beta <= 1):
        return problem.penalty_weight * (1 + abs(beta))
    if problem.n <= 64:
        s = _max_modulus_dense(beta, zetas, mults)
    else:
        s = max_root_modulus(params_to_spec(problem, x))
    d = float(np.min(np.abs(zetas - beta)))
    penalty = 0.0
    if problem.normalization == "rescale_to_unit":
        if not np.isfinite(s) or s <= 0:
            return np.inf
        beta, d = beta / s, d / s
    else:
        penalty = problem.penalty_weight * max(0.0, s - 1)
    if problem.free_beta:
        lo, hi = problem.beta_range
        if not lo <= beta <= hi:
            # barrier: c at an out-of-range beta must never look attractive
            return problem.penalty_weight * (1 + abs(beta - min(max(beta, lo), hi)))
    return (1 - d) / (beta * (1 - beta)) + penalty


# ------------------------------------------------------------ simplex

@dataclass
class _NMResult:
    x: np.ndarray
    fx: float
    evaluations: int
    converged: bool


def nelder_mead(f, x0: np.ndarray, step: float, budget: int, xtol: float, ftol: float,
                restarts: int = 1) -> _NMResult:
    """Simplex descent with reflection 1, expansion 2, contraction 1/2, shrink 1/2.

    Stops when the simplex diameter drops below ``xtol`` or the spread of
    values below ``ftol``; then re-expands around the incumbent ``restarts``
    times, keeping the restart only if it improves.
    """
    evals = 0

    def call(x):
        nonlocal evals
        evals += 1
        v = f(x)
        return v if np.isfinite(v) else np.inf

    best_x = np.asarray(x0, dtype=float)
    best_f = call(best_x)
    converged = False
    for attempt in range(restarts + 1):
        dim = best_x.size
        simplex = np.vstack([best_x] + [best_x + step * np.eye(dim)[i] for i in range(dim)])
        values = np.array([best_f] + [call(v) for v in simplex[1:]])
        converged = False
        while evals < budget:
            order = np.argsort(values, kind="stable")
            simplex, values = simplex[order], values[order]
            diameter = np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1))
            if diameter < xtol or values[-1] - values[0] < ftol:
                converged = True
                break
            centroid = simplex[:-1].mean(axis=0)
            worst = simplex[-1]
            xr = centroid + (centroid - worst)
            fr = call(xr)
            if values[0] <= fr < values[-2]:
                simplex[-1], values[-1] = xr, fr
                continue
            if fr < values[0]:
                xe = centroid + 2.0 * (xr - centroid)
                fe = call(xe)
                if fe < fr:
                    simplex[-1], values[-1] = xe, fe
                else:
                    simplex[-1], values[-1] = xr, fr
                continue
            if fr < values[-1]:
                xc = centroid + 0.5 * (xr - centroid)
                fc = call(xc)
                if fc <= fr:
                    simplex[-1], values[-1] = xc, fc
                    continue
            else:
                xc = centroid + 0.5 * (worst - centroid)
                fc = call(xc)
                if fc < values[-1]:
                    simplex[-1], values[-1] = xc, fc
                    continue
            simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
            values[1:] = [call(v) for v in simplex[1:]]
        i = int(np.argmin(values))
        improved = values[i] < best_f - ftol
        if values[i] <= best_f:
            best_x, best_f = simplex[i].copy(), float(values[i])
        if evals >= budget or (attempt > 0 and not improved):
            break
    return _NMResult(best_x, best_f, evals, converged)


# ------------------------------------------------------------ drivers

def _finish(problem: SearchProblem, nm: _NMResult, seed: int,
            tol: float = MEMBERSHIP_TOL) -> SearchResult:
    spec = params_to_spec(problem, nm.x)
    if problem.normalization == "rescale_to_unit":
        spec = normalize(spec)
    membership = check_membership(spec, tol)
    d = float(dist_exact(spec))
    try:
        # from the reported float d, so (beta, d, c) agree exactly
        c = c_value(spec.beta_dec, d).c
    except EndpointUndefined:
        c = float("inf")
    return SearchResult(spec=spec, d=d, c=c, membership=membership, converged=nm.converged,
                        evaluations=nm.evaluations, seed=seed, objective=nm.fx,
                        pattern=problem.pattern)


def _run_local(problem: SearchProblem, x0: np.ndarray, options: SearchOptions) -> _NMResult:
    return nelder_mead(lambda x: _raw_objective(problem, x), x0, options.step, options.budget,
                       options.xtol, options.ftol, options.restarts)


def local_search(problem: SearchProblem, start: PolySpec,
                 options: SearchOptions | None = None) -> SearchResult:
    """Simplex descent from ``start``; ``converged`` is false if the budget ran out."""
    options = options or SearchOptions()
    x0 = spec_to_params(problem, start)
    return _finish(problem, _run_local(problem, x0, options), options.seed)


def random_start(problem: SearchProblem, rng: np.random.Generator) -> np.ndarray:
    """``beta`` uniform in its range; paired points uniform in the upper half disk,
    real points uniform in [-1, 1]."""
    out = []
    if problem.free_beta:
        out.append(rng.uniform(*problem.beta_range))
    for p in problem.pattern.parts:
        if p.paired:
            r = np.sqrt(rng.random())
            t = rng.uniform(0, np.pi)
            out += [r * np.cos(t), r * np.sin(t)]
        else:
            out.append(rng.uniform(-1, 1))
    return np.array(out)


def _start_task(args):
    problem, x0, options = args
    return _run_local(problem, x0, options)


def multistart(problem: SearchProblem, k: int, seed: int = 0,
               options: SearchOptions | None = None, workers: int = 1) -> SearchResult:
    """Best member of S(beta) over ``k`` seeded local searches.

    Start ``i`` draws from ``SeedSequence(seed).spawn(k)[i]``, so results do
    not depend on ``workers``; ties go to the lower start index.  Raises
    :class:`NoFeasibleResult` when no start ends in S(beta).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    options = options or SearchOptions(seed=seed)
    seqs = np.random.SeedSequence(seed).spawn(k)
    starts = [random_start(problem, np.random.default_rng(s)) for s in seqs]
    tasks = [(problem, x0, options) for x0 in starts]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_start_task, tasks))
    else:
        raw = [_start_task(t) for t in tasks]
    order = sorted(range(k), key=lambda i: (raw[i].fx, i))
    total = sum(r.evaluations for r in raw)
    for i in order:
        if not np.isfinite(raw[i].fx):
            break
        result = _finish(problem, raw[i], seed)
        if result.membership.is_member:
            return SearchResult(**{**result.__dict__, "evaluations": total})
    raise NoFeasibleResult(f"none of {k} starts produced a member of S(beta)")


def enumerate_patterns(n: int, max_distinct: int) -> list[MultiplicityPattern]:
    """All conjugate-symmetric patterns of ``n - 1`` into at most ``max_distinct`` points."""
    if not 1 <= max_distinct <= 6:
        raise ValueError("max_distinct must lie in 1..6")
    total = n - 1
    kinds = sorted({(m, paired) for paired in (True, False) for m in range(1, total + 1)
                    if m * (2 if paired else 1) <= total}, reverse=True)
    out: list[MultiplicityPattern] = []

    def rec(remaining, points, start, acc):
        if remaining == 0:
            out.append(MultiplicityPattern(tuple(Part(m, p) for m, p in acc)))
            return
        for idx in range(start, len(kinds)):
            m, paired = kinds[idx]
            w = 2 if paired else 1
            if m * w <= remaining and points + w <= max_distinct:
                rec(remaining - m * w, points + w, idx, acc + [(m, paired)])

    rec(total, 0, 0, [])
    return out


def _pattern_seed(seed: int, pattern: MultiplicityPattern) -> int:
    return zlib.crc32(f"{seed}:{pattern}".encode())


def pattern_scan(n: int, max_distinct: int, k: int, seed: int = 0,
                 beta_range: tuple[float, float] = DEFAULT_BETA_RANGE,
                 options: SearchOptions | None = None, workers: int = 1) -> list[SearchResult]:
    """Multistart over every pattern with at most ``max_distinct`` points, sorted by ``c``.

    Each pattern's seed depends only on ``(seed, pattern)``, so enlarging
    ``max_distinct`` never makes the best value worse.
    """
    results = []
    for pattern in enumerate_patterns(n, max_distinct):
        problem = SearchProblem(n=n, pattern=pattern, beta_range=beta_range)
        try:
            results.append(multistart(problem, k, _pattern_seed(seed, pattern), options, workers))
        except NoFeasibleResult:
            continue
    return sorted(results, key=lambda r: (r.c, str(r.pattern)))
