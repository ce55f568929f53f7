"""Numerical tools for the distance from a root to the nearest critical point
of polynomials whose roots lie in the closed unit disk."""

from .errors import *  # noqa: F401,F403
from .families import (
    FamilyDescriptor,
    brs_star,
    circle_one_crit,
    extremal_circle,
    extremal_radius,
    lemma4_check,
    line_rooted,
    phelps_rodriguez,
)
from .metrics import (
    CATALOG,
    BoundEntry,
    CValue,
    bound,
    c_of_spec,
    c_value,
    catalog_for,
    conjectured_cn,
    dist_to_nearest_critical,
    lemma2_bound,
    r2_exact,
    r3_exact,
    r5_asymptotic,
    rn_at_zero,
    schmeisser_bound,
)
from .polyform import (
    CoefficientPoly,
    CriticalPoint,
    PolySpec,
    degree,
    eval_derivative,
    evaluate,
    expand_coefficients,
    load_spec,
    loads_spec,
)
from .roots import (
    MembershipReport,
    RootSet,
    check_membership,
    count_roots_in_disk,
    find_roots,
    max_root_modulus,
)
from .search import (
    MultiplicityPattern,
    SearchOptions,
    SearchProblem,
    SearchResult,
    local_search,
    multistart,
    normalize,
    objective,
    pattern_scan,
)
from .tables import ExtremalRecord, VerificationReport, load_records, verify_tables

__version__ = "0.1.0"
