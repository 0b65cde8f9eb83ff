"""Bound reports and the rules for deciding whether an inequality holds."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional

import mpmath

from .numeric import rational_str, real_str, to_real

DEFAULT_TOL = 1e-9

EXACT = "exact"
MONTE_CARLO = "monte-carlo"


@dataclass
class BoundReport:
    """One checked instance of an inequality ``lhs <= rhs``."""

    statement_id: str
    lhs: mpmath.mpf
    rhs: mpmath.mpf
    satisfied: bool
    method: str = EXACT
    params: dict[str, Any] = field(default_factory=dict)
    lhs_exact: Optional[Fraction] = None
    rhs_exact: Optional[Fraction] = None
    samples: Optional[int] = None
    seed: Optional[int] = None
    notes: list[str] = field(default_factory=list)
    # satisfied only within the relative tolerance
    warning: bool = False
    # False when the hypotheses of the statement are not met; informational row
    applicable: bool = True
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def slack(self) -> mpmath.mpf:
        return self.rhs - self.lhs

    @property
    def violated(self) -> bool:
        return self.applicable and self.method == EXACT and not self.satisfied

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.statement_id,
            "params": _jsonable(self.params),
            "lhs": real_str(self.lhs),
            "rhs": real_str(self.rhs),
            "slack": real_str(self.slack),
            "satisfied": self.satisfied,
            "method": self.method,
            "notes": list(self.notes),
        }
        if self.lhs_exact is not None:
            d["lhs_exact"] = rational_str(self.lhs_exact)
        if self.rhs_exact is not None:
            d["rhs_exact"] = rational_str(self.rhs_exact)
        if self.samples is not None:
            d["samples"] = self.samples
        if self.seed is not None:
            d["seed"] = self.seed
        if self.warning:
            d["warning"] = "satisfied within tolerance only"
        if not self.applicable:
            d["applicable"] = False
        if self.extra:
            d["extra"] = _jsonable(self.extra)
        return d


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return rational_str(obj) if obj.denominator != 1 else str(obj.numerator)
    if isinstance(obj, mpmath.mpf):
        return real_str(obj)
    if isinstance(obj, float):
        return real_str(obj)
    if hasattr(obj, "entries"):
        return [_jsonable(x) for x in obj.entries]
    return obj


def judge(
    statement_id: str,
    lhs,
    rhs,
    *,
    exact: Optional[bool] = None,
    tol: float = DEFAULT_TOL,
    lhs_exact: Optional[Fraction] = None,
    rhs_exact: Optional[Fraction] = None,
    **kwargs,
) -> BoundReport:
    """Build a report for ``lhs <= rhs``.

    ``exact`` is the verdict of an exact comparison when the caller has one;
    otherwise the real values are compared with relative tolerance ``tol``.
    """
    lhs, rhs = to_real(lhs), to_real(rhs)
    if lhs_exact is not None and rhs_exact is not None and exact is None:
        exact = lhs_exact <= rhs_exact
    warning = False
    if exact is not None:
        satisfied = exact
    else:
        slack = rhs - lhs
        satisfied = slack >= -tol * abs(rhs)
        warning = satisfied and slack < 0
    return BoundReport(
        statement_id,
        lhs,
        rhs,
        bool(satisfied),
        lhs_exact=lhs_exact,
        rhs_exact=rhs_exact,
        warning=warning,
        **kwargs,
    )


def all_satisfied(reports: Iterable[BoundReport]) -> bool:
    return all(r.satisfied for r in reports)
