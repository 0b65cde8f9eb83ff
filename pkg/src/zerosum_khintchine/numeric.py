"""Exact/real conversions and moment arithmetic shared across modules.

Reals are ``mpmath.mpf`` at the ambient ``mpmath.mp.prec`` (53 bits unless
raised by the caller or the ``--precision-bits`` CLI flag).
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from numbers import Integral, Real as _Real
from typing import Mapping, Union

import mpmath

from .errors import ParameterError

Order = Union[int, mpmath.mpf]
Scalar = Union[Fraction, mpmath.mpf]


def to_real(x) -> mpmath.mpf:
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def real_str(x) -> str:
    """Decimal string that round-trips at the current working precision."""
    x = to_real(x)
    if mpmath.isinf(x) or mpmath.isnan(x):
        return str(x)
    return mpmath.nstr(x, mpmath.libmp.repr_dps(mpmath.mp.prec), strip_zeros=False)


def rational_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def as_order(p) -> Order:
    """Normalize a moment order: integers stay exact, anything else is real.

    Integral values given as floats or fractions (``4.0``, ``Fraction(6)``)
    are treated as integers so that they take the exact path.
    """
    if isinstance(p, Integral):
        q = int(p)
    elif isinstance(p, (Fraction, _Real, mpmath.mpf, str)):
        r = Fraction(p) if not isinstance(p, mpmath.mpf) else None
        if r is not None and r.denominator == 1:
            q = int(r)
        else:
            q = mpmath.mpf(p) if r is None else to_real(r)
    else:
        raise ParameterError(f"unsupported moment order {p!r}")
    if q < 2:
        raise ParameterError(f"moment order must be >= 2, got {p}")
    return q


def is_exact_order(p: Order) -> bool:
    return isinstance(p, int)


def abs_pow(x: Fraction, p: Order) -> Scalar:
    """``|x|**p``; exact for integer ``p``, with ``0**p = 0`` on the real path."""
    if isinstance(p, int):
        return abs(x) ** p
    if x == 0:
        return mpmath.mpf(0)
    return mpmath.power(to_real(abs(x)), p)


def moment_from_counts(counts: Mapping[int, int], scale: int, p: Order) -> Scalar:
    """Average of ``|s/scale|**p`` where integer ``s`` occurs ``counts[s]`` times."""
    total = sum(counts.values())
    if isinstance(p, int):
        return Fraction(sum(c * abs(s) ** p for s, c in counts.items()), total * scale**p)
    acc = mpmath.fsum(c * mpmath.power(abs(s), p) for s, c in counts.items() if s)
    return acc / (total * mpmath.power(scale, p))


def root(x: Scalar, p: Order) -> mpmath.mpf:
    """``x**(1/p)`` as a real."""
    x = to_real(x)
    if x == 0:
        return mpmath.mpf(0)
    return mpmath.root(x, p) if isinstance(p, int) else mpmath.power(x, 1 / mpmath.mpf(p))


def root_le_sqrt(moment: Fraction, p: int, radicand: Fraction) -> bool:
    """Exact test of ``moment**(1/p) <= sqrt(radicand)`` for integer ``p``.

    Both sides are nonnegative, so raise to the power ``2p``.
    """
    assert moment >= 0 and radicand >= 0
    return moment * moment <= radicand**p


def root_le_affine_surd(moment: Fraction, p: int, base: Fraction, coef: Fraction, q: int) -> bool:
    """Exact test of ``moment**(1/p) <= base + coef*sqrt(q)``; base, coef, q >= 0.

    Expands ``(base + coef*sqrt(q))**p = X + Y*sqrt(q)`` with rational X, Y >= 0,
    then decides ``moment - X <= Y*sqrt(q)`` by squaring.
    """
    assert moment >= 0 and base >= 0 and coef >= 0 and q >= 0
    X = Fraction(0)
    Y = Fraction(0)
    for j in range(p + 1):
        term = comb(p, j) * base ** (p - j) * coef**j * Fraction(q) ** (j // 2)
        if j % 2:
            Y += term
        else:
            X += term
    d = moment - X
    if d <= 0:
        return True
    return d * d <= Y * Y * q
