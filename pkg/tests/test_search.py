import itertools
import json
from decimal import Decimal

import numpy as np
import pytest

from sendov import search as srch
from sendov.errors import NoFeasibleResult
from sendov.families import circle_one_crit
from sendov.metrics import c_value
from sendov.polyform import CriticalPoint, PolySpec
from sendov.roots import MembershipReport, check_membership, max_root_modulus
from sendov.search import (
    MultiplicityPattern,
    Part,
    SearchOptions,
    SearchProblem,
    SearchResult,
    enumerate_patterns,
    local_search,
    multistart,
    nelder_mead,
    normalize,
    objective,
    pattern_scan,
)

P6 = MultiplicityPattern.of((1, True), (3, False))


def assert_valid(result):
    assert result.membership.is_member
    assert check_membership(result.spec, 1e-9).is_member
    want = c_value(result.spec.beta_dec, result.d).c
    assert abs(result.c - want) <= 1e-12 * abs(want)


# ---------------------------------------------------------------- simplex

def test_nelder_mead_rosenbrock():
    f = lambda x: (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2  # noqa: E731
    res = nelder_mead(f, np.array([-1.2, 1.0]), 0.1, 5000, 1e-12, 1e-20)
    assert res.converged
    assert np.allclose(res.x, [1, 1], atol=1e-6)


def test_nelder_mead_budget_flag():
    f = lambda x: float(np.sum((x - 3) ** 2))  # noqa: E731
    res = nelder_mead(f, np.zeros(6), 0.5, 50, 1e-12, 1e-13)
    assert not res.converged
    assert res.evaluations <= 50 + 7


def test_nelder_mead_restart_keeps_incumbent():
    f = lambda x: float(np.sum(np.abs(x)))  # noqa: E731
    res = nelder_mead(f, np.array([0.3, -0.2, 0.5]), 0.1, 4000, 1e-12, 1e-13, restarts=1)
    assert res.fx < 1e-6


# ------------------------------------------------------------- patterns

def brute_force_patterns(n, max_distinct):
    total = n - 1
    kinds = [(m, p) for p in (True, False) for m in range(1, total + 1)]
    seen = set()
    for k in range(1, max_distinct + 1):
        for combo in itertools.combinations_with_replacement(kinds, k):
            weight = sum(m * (2 if p else 1) for m, p in combo)
            points = sum(2 if p else 1 for _, p in combo)
            if weight == total and points <= max_distinct:
                seen.add(tuple(sorted(combo)))
    return seen


@pytest.mark.parametrize("n,md", [(2, 1), (4, 1), (4, 3), (6, 3), (7, 4), (9, 5)])
def test_pattern_enumeration_matches_brute_force(n, md):
    got = {tuple(sorted((p.m, p.paired) for p in pat.parts)) for pat in enumerate_patterns(n, md)}
    assert got == brute_force_patterns(n, md)
    assert all(p.degree == n for p in enumerate_patterns(n, md))


def test_pattern_examples():
    assert enumerate_patterns(4, 1) == [MultiplicityPattern((Part(3, False),))]
    assert P6 in enumerate_patterns(6, 3)
    with pytest.raises(ValueError):
        enumerate_patterns(5, 7)


def test_table3_shape_is_a_two_point_pattern(record):
    rec = record(3, 300)
    mults = sorted(int(c["m"]) for c in rec.crits)
    assert mults == [1, 298] and len(rec.to_spec().distinct()) == 2
    shapes = {tuple(sorted(p.m for p in pat.parts)) for pat in enumerate_patterns(300, 2)}
    assert (1, 298) in shapes


def test_problem_validation():
    with pytest.raises(ValueError):
        SearchProblem(n=7, pattern=P6)
    with pytest.raises(ValueError):
        SearchProblem(n=6, pattern=P6, beta_range=(0.5, 0.4))
    fixed = SearchProblem(n=6, pattern=P6, fixed_beta=0.7, beta_range=None)
    assert fixed.normalization == "penalty_only" and fixed.dimension() == 3
    again = SearchProblem.from_dict(json.loads(json.dumps(fixed.to_dict())))
    assert again == fixed


# ------------------------------------------------------ objective, normalize

def test_objective_of_member_is_c(record):
    spec = record(1, 6).to_spec()
    assert abs(objective(spec) - 0.365121611819106) < 1e-9
    from sendov.metrics import c_of_spec
    from sendov.polyform import load_spec
    from pathlib import Path
    inside = load_spec(Path(__file__).parent.parent / "specs" / "counterexample.json")
    assert objective(inside) == c_of_spec(inside).c


def test_objective_penalizes_scaling(record):
    spec = record(1, 6).to_spec()
    s = 1.01
    scaled = PolySpec(spec.beta * s, [CriticalPoint(c.zeta * s, c.m) for c in spec.crits])
    from sendov.metrics import c_of_spec
    excess = objective(scaled, 1e3) - c_of_spec(scaled).c
    assert abs(excess - 0.01 * 1e3) < 1e-6


def test_normalize_examples(record):
    spec = record(1, 6).to_spec()
    norm = normalize(spec)
    assert abs(norm.beta - spec.beta) < 1e-9
    assert max(abs(a.zeta - b.zeta) for a, b in zip(norm.crits, spec.crits)) < 1e-9

    half = circle_one_crit(4, 0.25, complex(-0.25, 0))  # roots on |z + 1/4| = 1/2
    s = max_root_modulus(half)
    assert abs(s - 0.75) < 1e-12
    small = PolySpec(0.25, [CriticalPoint(0.1 + 0.1j), CriticalPoint(0.1 - 0.1j)])
    sm = max_root_modulus(small)
    if sm <= 0.5:
        norm = normalize(small)
        assert abs(norm.beta - 0.25 / sm) < 1e-12


def test_normalize_doubles_half_disk():
    # roots {0.5 i^k}: (z^4 - 1/16)/4 with beta = 1/2
    spec = PolySpec(0.5, [CriticalPoint(0, 3)])
    norm = normalize(spec)
    assert abs(norm.beta - 1) < 1e-12
    assert norm.crits[0].zeta == 0


def test_normalize_properties():
    rng = np.random.default_rng(9)
    for _ in range(10):
        w = 0.6 * np.sqrt(rng.random()) * np.exp(1j * np.pi * rng.random())
        spec = PolySpec(0.3 + 0.5 * rng.random(),
                        [CriticalPoint(w, 1), CriticalPoint(w.conjugate(), 1), CriticalPoint(-0.2, 2)])
        norm = normalize(spec)
        assert abs(max_root_modulus(norm) - 1) < 1e-12
        assert check_membership(norm).is_member
        twice = normalize(norm)
        assert abs(twice.beta - norm.beta) < 1e-12
        zs = sorted(norm.zetas(), key=lambda z: (z.real, z.imag))
        assert abs(sum(z.imag for z in zs)) < 1e-15


# ----------------------------------------------------------------- drivers

def test_degree_two_limit():
    p = SearchProblem(n=2, pattern=MultiplicityPattern.of((1, False)), beta_range=(0.01, 1 - 1e-7))
    res = local_search(p, PolySpec(0.5, [CriticalPoint(-0.2)]))
    assert abs(res.c - 0.5) < 1e-6
    assert_valid(res)


def test_degree_six_from_table_start(record):
    spec = record(1, 6).to_spec()
    start = PolySpec(0.78, [CriticalPoint(c.zeta * 1.01, c.m) for c in spec.crits])
    res = local_search(SearchProblem(n=6, pattern=P6), start)
    assert abs(res.c - 0.365121611819106) < 1e-6
    assert abs(res.spec.beta - 0.788188270312241) < 1e-6
    assert_valid(res)


def test_degree_three_trend():
    pat = MultiplicityPattern.of((1, False), (1, False))
    cs = []
    for hi in (0.9, 0.99, 0.999):
        res = multistart(SearchProblem(n=3, pattern=pat, beta_range=(0.01, hi)), 3, seed=1)
        assert res.c >= 1 / 3 - 1e-4
        assert_valid(res)
        cs.append(res.c)
    assert cs[0] > cs[1] > cs[2]


def test_fixed_beta_search():
    p = SearchProblem(n=4, pattern=MultiplicityPattern.of((1, True), (1, False)),
                      fixed_beta=0.5, beta_range=None)
    res = multistart(p, 3, seed=2)
    assert res.spec.beta == 0.5
    assert res.c >= 1 / 3 - 1e-9  # real quartics obey the 1/3 bound
    assert_valid(res)


def test_multistart_is_deterministic():
    p = SearchProblem(n=4, pattern=MultiplicityPattern.of((1, True), (1, False)))
    a = multistart(p, 3, seed=5, options=SearchOptions(budget=600))
    b = multistart(p, 3, seed=5, options=SearchOptions(budget=600))
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
    back = SearchResult.from_dict(json.loads(json.dumps(a.to_dict(), default=str)))
    assert back.spec == a.spec and back.c == a.c


def test_no_feasible_result(monkeypatch):
    def never(spec, tol=1e-9, precision="auto"):
        return MembershipReport(False, 2.0, -1.0, "both", 0, 3)
    monkeypatch.setattr(srch, "check_membership", never)
    p = SearchProblem(n=3, pattern=MultiplicityPattern.of((2, False)))
    with pytest.raises(NoFeasibleResult):
        multistart(p, 2, seed=0, options=SearchOptions(budget=200))


def test_pattern_scan_monotone_and_sorted():
    best = []
    for md in (1, 2, 3):
        res = pattern_scan(5, md, 2, seed=3, options=SearchOptions(budget=800))
        assert [r.c for r in res] == sorted(r.c for r in res)
        for r in res:
            assert_valid(r)
        best.append(res[0].c)
    assert best[1] <= best[0] + 1e-9 and best[2] <= best[1] + 1e-9


def test_pattern_scan_degree_six_picks_table_pattern():
    res = pattern_scan(6, 3, 4, seed=0)
    assert res[0].pattern == P6 or set(res[0].pattern.parts) == set(P6.parts)
    assert abs(res[0].c - 0.365121611819106) < 1e-3
