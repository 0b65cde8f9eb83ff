"""Moments of weighted Rademacher sums conditioned on a zero total.

The sign space is ``{eps in {-1,+1}^N : sum(eps) = 0}``, identified with the
set of positions carrying ``+1``.  Those sets are walked in colex order as
bitmasks (Gosper's hack), so any contiguous rank range can be processed on
its own and the partial histograms merged by addition.

Sums are kept as integers over the common denominator of the weights:
``sum(a_i eps_i) * D = 2 * sum_{i in P} A_i - sum(A)`` with ``A = a * D``.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import mpmath

from .combinatorics import binomial
from .errors import CapacityError, ConstraintInfeasibleError, ParameterError
from .numeric import Order, Scalar, as_order, moment_from_counts, root, root_le_sqrt, to_real
from .reports import DEFAULT_TOL, BoundReport, judge
from .weights import WeightLike, WeightVector, as_weights

ENUMERATION_CAP = 24
CUBE_CAP = 20


class SignVector(tuple):
    """A point of ``{-1, +1}^N``; ``is_balanced`` tells whether it sums to zero."""

    def __new__(cls, entries: Sequence[int]):
        entries = tuple(int(e) for e in entries)
        if any(e not in (-1, 1) for e in entries):
            raise ParameterError(f"sign vector entries must be +-1: {entries}")
        return super().__new__(cls, entries)

    @property
    def is_balanced(self) -> bool:
        return sum(self) == 0

    def plus_positions(self) -> tuple[int, ...]:
        """0-based positions of the +1 entries."""
        return tuple(i for i, e in enumerate(self) if e == 1)

    def __repr__(self) -> str:
        return "(" + ",".join("+" if e == 1 else "-" for e in self) + ")"


def _check_space(N: int, cap: int) -> None:
    if N < 2 or N % 2:
        raise ConstraintInfeasibleError(f"zero-sum signs need even N >= 2, got N={N}")
    if N > cap:
        raise CapacityError(
            f"N={N} exceeds the enumeration cap {cap}; use the Monte Carlo "
            "estimators in permutation_model instead"
        )


def zero_sum_count(N: int) -> int:
    return binomial(N, N // 2)


# --- colex bitmask machinery -------------------------------------------------


def colex_unrank(rank: int, k: int) -> int:
    """Bitmask of the k-subset with the given colex rank."""
    mask = 0
    for i in range(k, 0, -1):
        c = i - 1
        while binomial(c + 1, i) <= rank:
            c += 1
        rank -= binomial(c, i)
        mask |= 1 << c
    return mask


def colex_rank(mask: int) -> int:
    rank, i, pos = 0, 0, 0
    while mask:
        if mask & 1:
            i += 1
            rank += binomial(pos, i)
        mask >>= 1
        pos += 1
    return rank


def iter_colex_masks(N: int, k: int, start: int = 0, stop: Optional[int] = None) -> Iterator[int]:
    """k-subsets of ``range(N)`` as bitmasks, colex ranks ``[start, stop)``."""
    total = binomial(N, k)
    stop = total if stop is None else min(stop, total)
    if start >= stop:
        return
    if k == 0:
        yield 0
        return
    x = colex_unrank(start, k)
    for _ in range(stop - start):
        yield x
        c = x & -x
        r = x + c
        x = (((r ^ x) >> 2) // c) | r


def partition_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    """Split ``range(total)`` into at most ``parts`` contiguous chunks."""
    parts = max(1, min(parts, total))
    step, extra = divmod(total, parts)
    out, lo = [], 0
    for i in range(parts):
        hi = lo + step + (i < extra)
        out.append((lo, hi))
        lo = hi
    return out


def _byte_tables(ints: Sequence[int]) -> list[list[int]]:
    tables = []
    for off in range(0, len(ints), 8):
        chunk = ints[off : off + 8]
        t = [0] * 256
        for m in range(1, 256):
            low = (m & -m).bit_length() - 1
            t[m] = t[m & (m - 1)] + (chunk[low] if low < len(chunk) else 0)
        tables.append(t)
    return tables


def _subset_sum_histogram(ints: Sequence[int], masks) -> Counter:
    tables = _byte_tables(ints)
    hist: Counter = Counter()
    if len(tables) == 1:
        (t0,) = tables
        for m in masks:
            hist[t0[m]] += 1
    elif len(tables) == 2:
        t0, t1 = tables
        for m in masks:
            hist[t0[m & 255] + t1[m >> 8]] += 1
    else:
        for m in masks:
            s, j = 0, 0
            while m:
                s += tables[j][m & 255]
                m >>= 8
                j += 1
            hist[s] += 1
    return hist


def _range_histogram(ints: tuple[int, ...], start: int, stop: int) -> Counter:
    N = len(ints)
    total = sum(ints)
    sub = _subset_sum_histogram(ints, iter_colex_masks(N, N // 2, start, stop))
    return Counter({2 * s - total: c for s, c in sub.items()})


def signed_sum_histogram(
    a: WeightLike,
    cap: int = ENUMERATION_CAP,
    start: int = 0,
    stop: Optional[int] = None,
    workers: int = 1,
) -> tuple[Counter, int]:
    """Histogram of ``D * sum(a_i eps_i)`` over balanced eps in colex ranks ``[start, stop)``.

    Returns ``(counts, D)``.  With ``workers > 1`` the range is split across
    processes; merging is plain addition, so the result does not depend on
    the split.
    """
    a = as_weights(a)
    _check_space(a.N, cap)
    ints, D = a.scaled
    total = zero_sum_count(a.N)
    stop = total if stop is None else min(stop, total)
    if workers <= 1:
        return _range_histogram(ints, start, stop), D
    hist: Counter = Counter()
    chunks = [(lo + start, hi + start) for lo, hi in partition_ranges(stop - start, workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_range_histogram, *zip(*[(ints, lo, hi) for lo, hi in chunks])):
            hist.update(part)
    return hist, D


@lru_cache(maxsize=256)
def _cached_histogram(a: WeightVector, cap: int) -> tuple[Counter, int]:
    return signed_sum_histogram(a, cap)


# --- public operations -------------------------------------------------------


def enumerate_zero_sum_signs(
    N: int, cap: int = ENUMERATION_CAP, start: int = 0, stop: Optional[int] = None
) -> Iterator[SignVector]:
    """Balanced sign vectors of length N in colex order of their +1 positions."""
    _check_space(N, cap)
    for mask in iter_colex_masks(N, N // 2, start, stop):
        yield SignVector([1 if mask >> i & 1 else -1 for i in range(N)])


def weighted_sum(a: WeightLike, eps: Sequence[int]) -> Fraction:
    a = as_weights(a)
    if len(eps) != a.N:
        raise ParameterError(f"length mismatch: {a.N} weights, {len(eps)} signs")
    return sum((x * e for x, e in zip(a, eps)), Fraction(0))


def exact_moment(a: WeightLike, p, cap: int = ENUMERATION_CAP, workers: int = 1) -> Scalar:
    """Uniform average of ``|sum a_i eps_i|**p`` over balanced sign vectors.

    Exact (``Fraction``) for integer p; an ``mpmath.mpf`` otherwise.
    """
    a = as_weights(a)
    p = as_order(p)
    if workers > 1:
        hist, D = signed_sum_histogram(a, cap, workers=workers)
    else:
        hist, D = _cached_histogram(a, cap)
    return moment_from_counts(hist, D, p)


def second_moment_closed_form(a: WeightLike) -> Fraction:
    """``(N ||a||^2 - (sum a)^2) / (N - 1)``.

    Agrees with ``exact_moment(a, 2)``; a denominator of ``N(N-1)`` does not
    (for ``a = (1, -1)`` it gives 2 where enumeration gives 4).
    """
    a = as_weights(a)
    if a.N < 2 or a.N % 2:
        raise ConstraintInfeasibleError(f"need even N >= 2, got N={a.N}")
    return (a.N * a.sq_norm - a.total**2) / (a.N - 1)


def second_moment_printed_form(a: WeightLike) -> Fraction:
    """The same expression with denominator ``N(N-1)``; kept to document the mismatch."""
    a = as_weights(a)
    return (a.N * a.sq_norm - a.total**2) / (a.N * (a.N - 1))


def khintchine_rhs(a: WeightLike, p) -> mpmath.mpf:
    """``sqrt(2p) * sqrt(||a||^2 - N * mean^2)``."""
    a = as_weights(a)
    p = as_order(p)
    return mpmath.sqrt(2 * to_real(p if isinstance(p, int) else p)) * mpmath.sqrt(
        to_real(a.centered_sq_norm)
    )


def verify_main_theorem(
    a: WeightLike, p, cap: int = ENUMERATION_CAP, tol: float = DEFAULT_TOL
) -> list[BoundReport]:
    """Check both links of

        (E|sum a eps|^p)^(1/p) <= sqrt(2p) (||a||^2 - N b^2)^(1/2)
                               <= sqrt(2p) (E|sum a eps|^2)^(1/2)

    over the balanced sign space.  Integer p is decided exactly by raising
    to the power 2p; other p use relative tolerance ``tol``.
    """
    a = as_weights(a)
    p = as_order(p)
    mp_ = exact_moment(a, p, cap)
    m2 = exact_moment(a, 2, cap)
    R = a.centered_sq_norm
    params = {"N": a.N, "p": p, "a": a}
    rhs = khintchine_rhs(a, p)
    if isinstance(p, int):
        first = judge(
            "eq4-chain-1", root(mp_, p), rhs, exact=root_le_sqrt(mp_, p, 2 * p * R),
            params=params, extra={"moment_exact": mp_},
        )
    else:
        first = judge("eq4-chain-1", root(mp_, p), rhs, tol=tol, params=params)
    two_p = 2 * to_real(p)
    second = judge(
        "eq4-chain-2", rhs, mpmath.sqrt(two_p * to_real(m2)), exact=R <= m2,
        params=params, extra={"centered_sq_norm": R, "second_moment": m2},
    )
    return [first, second]


def cube_moment(a: WeightLike, p, cap: int = CUBE_CAP) -> Scalar:
    """``E|sum a_i eps_i|**p`` with independent signs (all 2^N vectors)."""
    a = as_weights(a)
    p = as_order(p)
    if a.N > cap:
        raise CapacityError(f"N={a.N} exceeds the cube enumeration cap {cap}")
    ints, D = a.scaled
    total = sum(ints)
    sub = _subset_sum_histogram(ints, range(1 << a.N))
    hist = Counter({2 * s - total: c for s, c in sub.items()})
    return moment_from_counts(hist, D, p)


def classical_khintchine_check(
    a: WeightLike, p, cap: int = CUBE_CAP, tol: float = DEFAULT_TOL
) -> BoundReport:
    """Unconstrained bound ``(E|sum a eps|^p)^(1/p) <= sqrt(p) ||a||_2``."""
    a = as_weights(a)
    p = as_order(p)
    m = cube_moment(a, p, cap)
    rhs = mpmath.sqrt(to_real(p) * to_real(a.sq_norm))
    params = {"N": a.N, "p": p, "a": a}
    if isinstance(p, int):
        return judge("eq1", root(m, p), rhs, exact=root_le_sqrt(m, p, p * a.sq_norm), params=params)
    return judge("eq1", root(m, p), rhs, tol=tol, params=params)
