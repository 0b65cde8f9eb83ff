"""Binomial coefficients and the elementary analytic bounds used alongside them.

Integers are Python ints (arbitrary precision) and rationals are
``fractions.Fraction``, so every binomial identity is checked exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .errors import ParameterError
from .numeric import to_real
from .reports import BoundReport, judge

STIRLING_TOL = 1e-12
# working precision for closed forms compared at STIRLING_TOL
_HI_PREC = 113


def binomial(n: int, k: int) -> int:
    """C(n, k), zero outside ``0 <= k <= n``."""
    if n < 0:
        raise ParameterError(f"binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def central_binomial(n: int) -> int:
    return binomial(2 * n, n)


def stirling_sandwich_check(n: int, tol: float = STIRLING_TOL) -> list[BoundReport]:
    """Check ``4**n / sqrt(2*pi*n) <= C(2n, n) <= 4**n / sqrt(pi*n)``.

    Returns the lower and upper halves as separate reports.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    c = central_binomial(n)
    with mpmath.workprec(max(_HI_PREC, mpmath.mp.prec)):
        four_n = mpmath.mpf(4) ** n
        lower = four_n / mpmath.sqrt(2 * mpmath.pi * n)
        upper = four_n / mpmath.sqrt(mpmath.pi * n)
        mid = mpmath.mpf(c)
        params = {"n": n}
        return [
            judge("stirling-lower", lower, mid, tol=tol, rhs_exact=Fraction(c), params=params),
            judge("stirling-upper", mid, upper, tol=tol, lhs_exact=Fraction(c), params=params),
        ]


def binomial_ratio_bound_check(n: int, ell: int, tol: float = STIRLING_TOL) -> list[BoundReport]:
    """Check ``C(2n-l, n-k) / C(2n, n) <= 2 / 2**l <= 1`` for every k in [0, l].

    Every k is tried in exact arithmetic; the maximizing k is recorded.  The
    intermediate Stirling step at ``k = floor(l/2)`` is reported separately
    since it involves pi.
    """
    if not (1 <= ell <= n):
        raise ParameterError(f"need 1 <= ell <= n, got n={n}, ell={ell}")
    denom = central_binomial(n)
    # common denominator C(2n, n): compare numerators only
    nums = [binomial(2 * n - ell, n - k) for k in range(ell + 1)]
    k_star = max(range(ell + 1), key=nums.__getitem__)
    worst = Fraction(nums[k_star], denom)
    bound = Fraction(2, 2**ell)
    params = {"n": n, "ell": ell}

    m = n - ell // 2
    at_floor = Fraction(nums[ell // 2], denom)
    with mpmath.workprec(max(_HI_PREC, mpmath.mp.prec)):
        stirling_rhs = (
            mpmath.mpf(2) ** (2 * n - ell)
            / mpmath.sqrt(mpmath.pi * m)
            * mpmath.sqrt(2 * mpmath.pi * n)
            / mpmath.mpf(4) ** n
        )
        step = judge(
            "eq12-stirling-step", to_real(at_floor), stirling_rhs, tol=tol,
            lhs_exact=at_floor, params=params,
        )
        step_to_bound = judge(
            "eq12-stirling-to-bound", stirling_rhs, to_real(bound), tol=tol,
            rhs_exact=bound, params=params,
        )
    ratio = judge(
        "eq12-ratio", worst, bound, lhs_exact=worst, rhs_exact=bound, params=params,
        extra={"argmax_k": k_star, "floor_half_ell_is_max": nums[ell // 2] == nums[k_star]},
    )
    unit = judge("eq12-unit", bound, 1, lhs_exact=bound, rhs_exact=Fraction(1), params=params)
    return [ratio, step, step_to_bound, unit]


def gamma_upper_bound_check(x, tol: float = 1e-9) -> BoundReport:
    """Check ``Gamma(x) <= x**(x-1)`` for ``x >= 1``.

    Integer ``x`` is decided exactly as ``(x-1)! <= x**(x-1)``.
    """
    xq = Fraction(x) if not isinstance(x, mpmath.mpf) else None
    if (xq is not None and xq < 1) or (xq is None and x < 1):
        raise ParameterError(f"x must be >= 1, got {x}")
    if xq is not None and xq.denominator == 1:
        m = int(xq)
        g, b = math.factorial(m - 1), m ** (m - 1)
        return judge(
            "gamma-bound", g, b, lhs_exact=Fraction(g), rhs_exact=Fraction(b),
            params={"x": m},
        )
    xr = to_real(xq) if xq is not None else mpmath.mpf(x)
    return judge(
        "gamma-bound", mpmath.gamma(xr), mpmath.power(xr, xr - 1), tol=tol,
        params={"x": xr},
    )


@dataclass(frozen=True)
class Remark35Result:
    """Outcome of the extended-regime condition for an (N, n, l) hypergeometric.

    ``ratio_condition`` is the direct test ``max_k C(N-l, n-k)/C(N, n) <= 1``;
    ``sufficient`` is ``l >= threshold`` with the real-valued
    ``threshold = N - log2(sqrt(pi) * C(N, n))``.  Truthiness follows the
    direct test.
    """

    N: int
    n: int
    ell: int
    ratio_condition: bool
    max_ratio: Fraction
    threshold: mpmath.mpf
    sufficient: bool

    def __bool__(self) -> bool:
        return self.ratio_condition


def remark35_condition(N: int, n: int, ell: int) -> Remark35Result:
    if not (0 <= n <= N and 0 <= ell <= N):
        raise ParameterError(f"need 0 <= n, ell <= N, got N={N}, n={n}, ell={ell}")
    total = binomial(N, n)
    max_ratio = max(Fraction(binomial(N - ell, n - k), total) for k in range(ell + 1))
    threshold = N - mpmath.log(mpmath.sqrt(mpmath.pi) * total, 2)
    return Remark35Result(
        N, n, ell,
        ratio_condition=max_ratio <= 1,
        max_ratio=max_ratio,
        threshold=threshold,
        sufficient=ell >= threshold,
    )
