"""Exact hypergeometric law and the moment/tail bounds checked against it.

``xi ~ (N, n, l)`` counts marked items in an ``n``-draw without replacement
from ``N`` items of which ``l`` are marked.  The balanced regime is
``N = 2n`` with ``1 <= l <= n``; there ``E xi = l/2`` and ``2(xi - l/2)`` has
the law of ``eps_1 + ... + eps_l`` under the zero-sum sign constraint.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .combinatorics import binomial, remark35_condition
from .constrained_moments import ENUMERATION_CAP, iter_colex_masks, _check_space
from .errors import ParameterError, PreconditionError
from .numeric import Order, Scalar, abs_pow, as_order, to_real
from .reports import DEFAULT_TOL, BoundReport, judge

SQRT2_BOUND = "prop31-sqrt2"
CONST2_BOUND = "prop31-const2"


@dataclass(frozen=True)
class HypergeomParams:
    N: int
    n: int
    ell: int

    def __post_init__(self):
        if not (0 <= self.n <= self.N and 0 <= self.ell <= self.N):
            raise ParameterError(f"invalid hypergeometric parameters {self}")

    @classmethod
    def balanced(cls, n: int, ell: int) -> "HypergeomParams":
        return cls(2 * n, n, ell)

    @property
    def is_balanced(self) -> bool:
        return self.N == 2 * self.n and 1 <= self.ell <= self.n

    @property
    def support(self) -> range:
        return range(max(0, self.n + self.ell - self.N), min(self.n, self.ell) + 1)

    def as_dict(self) -> dict:
        return {"N": self.N, "n": self.n, "ell": self.ell}


def _require_balanced(params: HypergeomParams) -> None:
    if not params.is_balanced:
        raise ParameterError(f"need N = 2n and 1 <= ell <= n, got {params}")


def pmf(params: HypergeomParams) -> tuple[Fraction, ...]:
    """``P(xi = k)`` for ``k = 0..l``, exact; zero off the support."""
    N, n, ell = params.N, params.n, params.ell
    total = binomial(N, n)
    return tuple(Fraction(binomial(ell, k) * binomial(N - ell, n - k), total) for k in range(ell + 1))


def mean(params: HypergeomParams) -> Fraction:
    return sum((k * q for k, q in enumerate(pmf(params))), Fraction(0))


def central_moment(params: HypergeomParams, p) -> Scalar:
    p = as_order(p)
    probs = pmf(params)
    mu = mean(params)
    terms = (q * abs_pow(k - mu, p) for k, q in enumerate(probs) if q)
    if isinstance(p, int):
        return sum(terms, Fraction(0))
    return mpmath.fsum(to_real(t) if isinstance(t, Fraction) else t for t in terms)


def _scaled_power_bound(ell: int, p: Order) -> Scalar:
    """``(p l / 4)**(p/2)``; exact only through its square for integer p."""
    return mpmath.power(to_real(Fraction(ell, 4)) * to_real(p), to_real(p) / 2)


def _moment_bound_reports(
    hp: HypergeomParams, p: Order, constants: Sequence[tuple[str, int]], tol: float, **kw
) -> list[BoundReport]:
    """Reports for ``E|xi - E xi|^p <= sqrt(c2) * (p l / 4)^(p/2)`` for each squared constant c2."""
    m = central_moment(hp, p)
    base = _scaled_power_bound(hp.ell, p)
    out = []
    for sid, c2 in constants:
        rhs = mpmath.sqrt(c2) * base
        if isinstance(p, int):
            exact = m * m <= c2 * Fraction(p * hp.ell, 4) ** p
            out.append(judge(sid, to_real(m), rhs, exact=exact, lhs_exact=m, **kw))
        else:
            out.append(judge(sid, m, rhs, tol=tol, **kw))
    return out


def prop31_check(params: HypergeomParams, p, tol: float = DEFAULT_TOL) -> list[BoundReport]:
    """``E|xi - E xi|^p`` against ``sqrt(2) (pl/4)^(p/2)`` and ``2 (pl/4)^(p/2)``."""
    _require_balanced(params)
    p = as_order(p)
    return _moment_bound_reports(
        params, p, [(SQRT2_BOUND, 2), (CONST2_BOUND, 4)], tol,
        params={**params.as_dict(), "p": p},
    )


def remark35_check(params: HypergeomParams, p, tol: float = DEFAULT_TOL) -> BoundReport:
    """The constant-2 moment bound for general ``(N, n, l)``.

    Marked not applicable (informational) when the ratio condition
    ``C(N-l, n-k) / C(N, n) <= 1`` fails for some k.
    """
    p = as_order(p)
    cond = remark35_condition(params.N, params.n, params.ell)
    (rep,) = _moment_bound_reports(
        params, p, [("rem35-bound", 4)], tol,
        params={**params.as_dict(), "p": p},
        extra={
            "ratio_condition": cond.ratio_condition,
            "max_ratio": cond.max_ratio,
            "threshold": cond.threshold,
            "sufficient_condition": cond.sufficient,
        },
    )
    if not cond.ratio_condition:
        rep.applicable = False
        rep.notes.append("ratio condition fails; bound reported for reference only")
    return rep


def cor33_check(n: int, ell: int, p, tol: float = DEFAULT_TOL) -> BoundReport:
    """``E_S|eps_1 + ... + eps_l|^p <= (2 p l)^(p/2)`` via ``X = 2(xi - E xi)``."""
    params = HypergeomParams.balanced(n, ell)
    _require_balanced(params)
    p = as_order(p)
    m = central_moment(params, p)
    kw = {"params": {"n": n, "ell": ell, "N": 2 * n, "p": p}}
    if isinstance(p, int):
        lhs = 2**p * m
        exact = lhs * lhs <= Fraction(2 * p * ell) ** p
        rhs = mpmath.power(2 * p * ell, mpmath.mpf(p) / 2)
        return judge("cor33", to_real(lhs), rhs, exact=exact, lhs_exact=lhs, **kw)
    lhs = mpmath.power(2, p) * m
    return judge("cor33", lhs, mpmath.power(2 * p * ell, p / 2), tol=tol, **kw)


def omega_frequencies(n: int, ell: int, cap: int = ENUMERATION_CAP) -> tuple[Fraction, ...]:
    """Fraction of balanced sign vectors (length 2n) with exactly k of the first l signs positive."""
    _check_space(2 * n, cap)
    low = (1 << ell) - 1
    hits = Counter(bin(m & low).count("1") for m in iter_colex_masks(2 * n, n))
    total = sum(hits.values())
    return tuple(Fraction(hits.get(k, 0), total) for k in range(ell + 1))


def identity_check(n: int, ell: int, cap: int = ENUMERATION_CAP) -> bool:
    """Whether the sign-space frequencies equal the (2n, n, l) pmf exactly."""
    if not 0 <= ell <= 2 * n:
        raise ParameterError(f"need 0 <= ell <= 2n, got n={n}, ell={ell}")
    return omega_frequencies(n, ell, cap) == pmf(HypergeomParams.balanced(n, ell))


def tail_probability(params: HypergeomParams, t) -> Fraction:
    """``P(|xi - E xi| > t)``, strict, exact."""
    t = Fraction(t)
    if t < 0:
        raise ParameterError(f"t must be >= 0, got {t}")
    mu = mean(params)
    return sum((q for k, q in enumerate(pmf(params)) if abs(k - mu) > t), Fraction(0))


@dataclass
class Psi2Record:
    """Empirical sub-Gaussian constant ``c`` in ``P(|xi - E xi| > t) <= exp(-c t^2 / l)``.

    ``c_emp`` is the largest constant that works at every grid point with a
    nonzero tail (``+inf`` when there is none; then ``vacuous`` is set).
    ``rows`` holds, per t, the exact tail, the per-point constant, the
    reference ``exp(-2 t^2 / n)`` and whether the fitted curve beats it.
    """

    params: HypergeomParams
    c_emp: mpmath.mpf
    vacuous: bool
    rows: list[dict] = field(default_factory=list)


def empirical_psi2_constant(params: HypergeomParams, t_grid: Optional[Sequence] = None) -> Psi2Record:
    if params.N != 2 * params.n:
        raise PreconditionError(f"empirical psi2 constants need N = 2n, got {params}")
    ell, n = params.ell, params.n
    if t_grid is None:
        t_grid = range(1, math.ceil(ell / 2) + 1)
    t_grid = [Fraction(t) for t in t_grid]
    if any(t < 1 for t in t_grid):
        raise ParameterError("grid points must be >= 1")
    per_t = []
    for t in t_grid:
        tail = tail_probability(params, t)
        c_t = -ell * mpmath.log(to_real(tail)) / to_real(t) ** 2 if tail else mpmath.inf
        per_t.append((t, tail, c_t))
    finite = [c for _, tail, c in per_t if tail]
    c_emp = min(finite) if finite else mpmath.inf
    rows = []
    for t, tail, c_t in per_t:
        tr = to_real(t)
        classical = mpmath.exp(-2 * tr**2 / n) if n else mpmath.mpf(0)
        fitted = mpmath.exp(-c_emp * tr**2 / ell) if ell and c_emp != mpmath.inf else mpmath.mpf(0)
        rows.append({
            "t": t,
            "tail": tail,
            "c_t": c_t,
            "fitted_bound": fitted,
            "classical_bound": classical,
            "beats_classical": fitted <= classical,
        })
    return Psi2Record(params, c_emp, not finite, rows)
