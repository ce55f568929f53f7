"""The embedded extremal-configuration dataset and its verification."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from importlib import resources

from .errors import InvalidSpec, SendovError
from .metrics import c_value, dist_exact
from .polyform import PolySpec, crits_from_list, to_decimal
from .roots import MEMBERSHIP_TOL, MembershipReport, check_membership

TOL_R = 1e-9
TOL_C = 1e-6
TOL_EXCESS = 1e-4
MEMBERSHIP_CAP = 401
# rows whose source flags its own digits as possibly unreliable
WARN_ONLY_TABLES = frozenset({9})


class DatasetError(SendovError, ValueError):
    """The embedded dataset is missing or malformed."""


@dataclass(frozen=True)
class ExtremalRecord:
    table_id: int
    n: int
    beta: str
    crits: tuple[dict, ...]
    expected_r: str
    expected_c: str
    offset: str | None = None
    scaled_excess: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExtremalRecord":
        try:
            rec = cls(
                table_id=int(data["table"]),
                n=int(data["n"]),
                beta=data["beta"],
                crits=tuple(dict(c) for c in data["critical_points"]),
                expected_r=data["r"],
                expected_c=data["c"],
                offset=data.get("offset"),
                scaled_excess=data.get("scaled_excess"),
            )
            total = sum(int(c["m"]) * (2 if c.get("pm") else 1) for c in rec.crits)
            for s in (rec.beta, rec.expected_r, rec.expected_c):
                if not to_decimal(s).is_finite():
                    raise DatasetError(f"non-finite entry {s!r}")
        except (KeyError, TypeError, ValueError, InvalidSpec) as exc:
            raise DatasetError(f"malformed record {data!r}") from exc
        if total != rec.n - 1:
            raise DatasetError(f"table {rec.table_id} n={rec.n}: multiplicities sum to {total}")
        return rec

    def to_dict(self) -> dict:
        data = {
            "table": self.table_id,
            "n": self.n,
            "beta": self.beta,
            "critical_points": [dict(c) for c in self.crits],
            "r": self.expected_r,
            "c": self.expected_c,
        }
        if self.offset is not None:
            data["offset"] = self.offset
            data["scaled_excess"] = self.scaled_excess
        return data

    def to_spec(self) -> PolySpec:
        return PolySpec(self.beta, crits_from_list(self.crits))

    @property
    def label(self) -> str:
        return f"table {self.table_id} n={self.n}"


def load_records(text: str | None = None) -> list[ExtremalRecord]:
    if text is None:
        text = resources.files("sendov").joinpath("data/tables.json").read_text()
    try:
        raw = json.loads(text)["records"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DatasetError("dataset is not a JSON object with 'records'") from exc
    return [ExtremalRecord.from_dict(r) for r in raw]


def _offset(text: str) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = 50
        if "/" in text:
            f = Fraction(text)
            return Decimal(f.numerator) / Decimal(f.denominator)
        return Decimal(text)


@dataclass
class RecordCheck:
    record: ExtremalRecord
    d: Decimal
    c: Decimal
    r_match: bool
    c_match: bool
    excess: Decimal | None = None
    excess_match: bool | None = None
    membership: MembershipReport | None = None
    skipped: str | None = None
    error: str | None = None

    @property
    def passed(self) -> bool:
        ok = self.r_match and self.c_match and self.excess_match is not False
        if self.membership is not None:
            ok = ok and self.membership.is_member
        return ok and self.error is None

    @property
    def warn_only(self) -> bool:
        return self.record.table_id in WARN_ONLY_TABLES

    def to_dict(self) -> dict:
        r = self.record
        return {
            "table": r.table_id,
            "n": r.n,
            "d": float(self.d),
            "expected_r": r.expected_r,
            "r_rel_err": float(abs(self.d - Decimal(r.expected_r)) / Decimal(r.expected_r)),
            "r_match": self.r_match,
            "c": float(self.c),
            "expected_c": r.expected_c,
            "c_rel_err": float(abs(self.c - Decimal(r.expected_c)) / Decimal(r.expected_c)),
            "c_match": self.c_match,
            "offset": r.offset,
            "scaled_excess": None if self.excess is None else float(self.excess),
            "expected_scaled_excess": r.scaled_excess,
            "excess_match": self.excess_match,
            "membership": self.membership.to_dict() if self.membership else {"skipped": self.skipped},
            "error": self.error,
            "passed": self.passed,
        }


@dataclass
class VerificationReport:
    checks: list[RecordCheck] = field(default_factory=list)

    @property
    def failures(self) -> list[RecordCheck]:
        return [c for c in self.checks if not c.passed and not c.warn_only]

    @property
    def warnings(self) -> list[RecordCheck]:
        return [c for c in self.checks if not c.passed and c.warn_only]

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        return {
            "records": len(self.checks),
            "passed": sum(c.passed for c in self.checks),
            "failed": len(self.failures),
            "warnings": len(self.warnings),
            "membership_checked": sum(c.membership is not None for c in self.checks),
        }

    def to_dict(self) -> dict:
        return {"summary": self.summary(), "records": [c.to_dict() for c in self.checks]}


def verify_record(rec: ExtremalRecord, tol_r: float = TOL_R, tol_c: float = TOL_C,
                  tol_excess: float = TOL_EXCESS, membership: bool = True,
                  precision: str = "auto", membership_tol: float = MEMBERSHIP_TOL) -> RecordCheck:
    spec = rec.to_spec()
    d = dist_exact(spec)
    c = c_value(spec.beta_dec, d).c_exact
    with localcontext() as ctx:
        ctx.prec = 50
        r_exp, c_exp = Decimal(rec.expected_r), Decimal(rec.expected_c)
        r_match = abs(d - r_exp) <= Decimal(repr(float(tol_r))) * abs(r_exp)
        c_match = abs(c - c_exp) <= Decimal(repr(float(tol_c))) * abs(c_exp)
        excess = excess_match = None
        if rec.offset is not None:
            excess = rec.n * (c - _offset(rec.offset))
            gap = abs(excess - Decimal(rec.scaled_excess))
            excess_match = gap <= Decimal(repr(float(tol_excess)))
    check = RecordCheck(rec, d, c, bool(r_match), bool(c_match), excess,
                        None if excess_match is None else bool(excess_match))
    if membership:
        try:
            check.membership = check_membership(spec, membership_tol, precision)
        except SendovError as exc:
            check.error = f"{type(exc).__name__}: {exc}"
    else:
        check.skipped = "above membership cap (use --deep)"
    return check


def verify_tables(records: list[ExtremalRecord] | None = None, max_n: int | None = None,
                  tol_r: float = TOL_R, tol_c: float = TOL_C,
                  membership_cap: int | None = MEMBERSHIP_CAP, precision: str = "auto",
                  progress=None) -> VerificationReport:
    """Recompute ``d`` and ``c`` for every record (``n <= max_n``) and certify
    membership for ``n <= membership_cap`` (``None`` lifts the cap)."""
    records = load_records() if records is None else records
    report = VerificationReport()
    for rec in records:
        if max_n is not None and rec.n > max_n:
            continue
        run_membership = membership_cap is None or rec.n <= membership_cap
        check = verify_record(rec, tol_r, tol_c, membership=run_membership, precision=precision)
        report.checks.append(check)
        if progress:
            progress(check)
    return report
