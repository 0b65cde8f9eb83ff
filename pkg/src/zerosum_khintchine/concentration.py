"""Concentration on the symmetric group under the Hamming metric.

Exact checks enumerate every permutation (``N <= 7`` for the tail bound,
whose Lipschitz preconditions need all pairs; ``N <= 8`` for the moment
bound).  Monte Carlo checks never report a violation, only whether the
sample is consistent with the bound at four standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .errors import CapacityError, ParameterError, PreconditionError
from .numeric import as_order, moment_from_counts, root, root_le_affine_surd, to_real
from .permutation_model import (
    PERMUTATION_CAP,
    Permutation,
    SeededSampler,
    _sample_abs_bilinear,
    all_permutations,
    bilinear_histogram,
    bilinear_values,
    monte_carlo_moment,
)
from .reports import DEFAULT_TOL, EXACT, MONTE_CARLO, BoundReport, judge
from .weights import WeightLike, as_weights

LIPSCHITZ_CAP = 7
MAUREY_CONSTANT = 32
SIGMAS = 4.0


def hamming_distance(sigma: Sequence[int], pi: Sequence[int]) -> int:
    """Number of points where the two permutations disagree."""
    if len(sigma) != len(pi):
        raise ParameterError(f"size mismatch: {len(sigma)} vs {len(pi)}")
    return sum(1 for s, t in zip(sigma, pi) if s != t)


@dataclass(frozen=True)
class PermutationFunctional:
    """A real function on permutations of ``{1..N}``.

    ``evaluator`` takes a 1-based :class:`Permutation` and returns an exact
    rational.  ``table`` optionally returns ``(values, D)`` with integer
    ``values`` aligned with :func:`all_permutations` and common denominator
    ``D``; ``sampler_values`` optionally maps a 0-based batch of
    permutations to floats.  Both are fast paths only.
    """

    N: int
    evaluator: Callable[[Permutation], Fraction]
    lipschitz: Optional[Fraction] = None
    name: str = "f"
    table: Optional[Callable[[], tuple[np.ndarray, int]]] = None
    sampler_values: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, sigma: Sequence[int]) -> Fraction:
        return Fraction(self.evaluator(Permutation(sigma)))

    def exact_table(self) -> tuple[np.ndarray, int]:
        if self.table is not None:
            return self.table()
        vals = [self(Permutation.from_zero_based(row)) for row in all_permutations(self.N)]
        D = lcm(*(v.denominator for v in vals))
        ints = [int(v * D) for v in vals]
        dtype = np.int64 if max(map(abs, ints)) < 2**62 else object
        return np.array(ints, dtype=dtype), D

    def sample(self, perms: np.ndarray) -> np.ndarray:
        if self.sampler_values is not None:
            return self.sampler_values(perms)
        return np.array([float(self(Permutation.from_zero_based(r))) for r in perms])


def bilinear_functional(a: WeightLike, b: WeightLike) -> PermutationFunctional:
    """``sigma -> |sum_i a_sigma(i) b_i|`` with declared Lipschitz bound ``2 |a|_inf |b|_inf``."""
    a, b = as_weights(a), as_weights(b)
    if a.N != b.N:
        raise ParameterError(f"length mismatch: {a.N} vs {b.N}")
    A = np.array([float(x) for x in a])
    B = np.array([float(x) for x in b])

    def evaluator(sigma):
        return abs(sum((a[s - 1] * bi for s, bi in zip(sigma, b)), Fraction(0)))

    def table():
        vals, D = bilinear_values(a, b, LIPSCHITZ_CAP + 1)
        return abs(vals), D

    return PermutationFunctional(
        a.N, evaluator, lipschitz=2 * a.sup_norm * b.sup_norm, name="bilinear",
        table=table, sampler_values=lambda perms: np.abs(A[perms] @ B),
    )


def constant_functional(N: int, c=0) -> PermutationFunctional:
    c = Fraction(c)
    return PermutationFunctional(N, lambda sigma: c, lipschitz=Fraction(0), name="constant")


@lru_cache(maxsize=None)
def _distance_matrix(N: int) -> np.ndarray:
    P = all_permutations(N)
    return (P[:, None, :] != P[None, :, :]).sum(axis=-1).astype(np.int8)


def lipschitz_constant_bruteforce(f: PermutationFunctional, N: Optional[int] = None) -> Fraction:
    """``max |f(s) - f(t)| / d(s, t)`` over all pairs of distinct permutations, exact."""
    N = f.N if N is None else N
    if N != f.N:
        raise ParameterError(f"functional is defined on N={f.N}, asked for N={N}")
    if N > LIPSCHITZ_CAP:
        raise CapacityError(f"N={N} exceeds the pairwise Lipschitz cap {LIPSCHITZ_CAP}")
    if N < 2:
        return Fraction(0)
    vals, D = f.exact_table()
    dist = _distance_matrix(N)
    # maximize |df| / d as |df| * (M / d) with M = lcm(2..N), in one pass
    M = lcm(*range(2, N + 1))
    weight = np.array([0, 0] + [M // d for d in range(2, N + 1)], dtype=np.int64)
    if vals.dtype != object and int(np.abs(vals).max()) * 2 * M >= 2**62:
        vals = vals.astype(object)
    best = 0
    chunk = max(1, 2_000_000 // len(vals))
    for lo in range(0, len(vals), chunk):
        diff = np.abs(vals[lo : lo + chunk, None] - vals[None, :])
        best = max(best, int((diff * weight[dist[lo : lo + chunk]]).max()))
    return Fraction(best, M * D)


def _best_exponent_constant(N: int, rows: list[tuple[Fraction, object]]) -> mpmath.mpf:
    """Smallest K with ``mu_t <= 2 exp(-t^2 / (K N))`` at every t of the grid."""
    ks = [
        to_real(t) ** 2 / (N * mpmath.log(2 / to_real(mu)))
        for t, mu in rows
        if mu and to_real(mu) < 2
    ]
    return max(ks) if ks else mpmath.mpf(0)


def maurey_tail_check(
    f: PermutationFunctional,
    N: Optional[int] = None,
    t_grid: Sequence = (1,),
    mode: str = "exact",
    sampler: Optional[SeededSampler] = None,
    trials: int = 100_000,
    rescale: bool = True,
    tol: float = DEFAULT_TOL,
) -> list[BoundReport]:
    """``mu(|g - E g| >= t) <= 2 exp(-t^2 / (32 N))`` for each grid t.

    ``g = f / L`` where L is the brute-forced Lipschitz constant (exact mode)
    or the declared one (Monte Carlo beyond the cap).  Without ``rescale``
    f itself must already be 1-Lipschitz.
    """
    N = f.N if N is None else N
    if N != f.N:
        raise ParameterError(f"functional is defined on N={f.N}, asked for N={N}")
    t_grid = [Fraction(t) for t in t_grid]
    if any(t <= 0 for t in t_grid):
        raise ParameterError("grid points must be positive")

    if mode == "exact" or N <= LIPSCHITZ_CAP:
        L = lipschitz_constant_bruteforce(f)
        if f.lipschitz is not None and L > f.lipschitz:
            raise PreconditionError(f"declared Lipschitz bound {f.lipschitz} < brute-force value {L}")
        source = "brute-force"
    else:
        if f.lipschitz is None:
            raise PreconditionError("Monte Carlo mode needs a declared Lipschitz bound")
        L = Fraction(f.lipschitz)
        source = "declared"
    if rescale:
        scale = L if L > 0 else Fraction(1)
    else:
        if L > 1:
            raise PreconditionError(f"f is not 1-Lipschitz (constant {L})")
        scale = Fraction(1)
    base = {"N": N, "functional": f.name, "lipschitz": L, "lipschitz_source": source, "scale": scale}

    def bound(t):
        return 2 * mpmath.exp(-to_real(t) ** 2 / (MAUREY_CONSTANT * N))

    if mode == "exact":
        if N > LIPSCHITZ_CAP:
            raise CapacityError(f"exact mode needs N <= {LIPSCHITZ_CAP}, got {N}")
        vals, D = f.exact_table()
        total = len(vals)
        if vals.dtype != object and int(np.abs(vals).max()) * total >= 2**62:
            vals = vals.astype(object)
        # |g - Eg| >= t  <=>  |total*v - sum(v)| >= t * D * scale * total, all integers but t
        s = int(vals.sum())
        centered = np.abs(vals * total - s)
        top = int(centered.max())
        rows, reports = [], []
        for t in t_grid:
            thr = t * D * scale * total
            cut = -(-thr.numerator // thr.denominator)
            hits = 0 if cut > top else int((centered >= cut).sum())
            mu = Fraction(hits, total)
            rows.append((t, mu))
            reports.append(judge(
                "eq7", to_real(mu), bound(t), tol=tol, lhs_exact=mu,
                params={**base, "t": t}, extra={"mean": Fraction(s, D * total) / scale},
            ))
        K = _best_exponent_constant(N, rows)
        for r in reports:
            r.extra["best_exponent_constant"] = K
        return reports

    if mode != "mc":
        raise ParameterError(f"unknown mode {mode!r}")
    if sampler is None:
        raise ParameterError("mc mode needs a sampler")
    if trials < 2:
        raise ParameterError(f"need at least 2 trials, got {trials}")
    perms = sampler.permutations(N, trials)
    g = f.sample(perms) / float(scale)
    dev = np.abs(g - g.mean())
    reports = []
    for t in t_grid:
        mu = float((dev >= float(t)).mean())
        se = math.sqrt(mu * (1 - mu) / trials)
        rhs = bound(t)
        consistent = mu - SIGMAS * se <= rhs
        reports.append(BoundReport(
            "eq7", mpmath.mpf(mu), rhs, consistent, method=MONTE_CARLO,
            params={**base, "t": t}, samples=trials, seed=sampler.seed,
            notes=[("consistent" if consistent else "inconsistent") + " at 4 sigma"],
            extra={"stderr": se, "stream": list(sampler.stream)},
        ))
    return reports


def lipschitz_bound_check(a: WeightLike, b: WeightLike) -> BoundReport:
    """Brute-force Lipschitz constant of ``|sum a_sigma(i) b_i|`` against ``2 |a|_inf |b|_inf``."""
    f = bilinear_functional(a, b)
    L = lipschitz_constant_bruteforce(f)
    return judge("cor52-lipschitz", to_real(L), to_real(f.lipschitz), lhs_exact=L, rhs_exact=f.lipschitz, params={"N": f.N})


def cor52_check(
    a: WeightLike,
    b: WeightLike,
    p,
    mode: str = "exact",
    sampler: Optional[SeededSampler] = None,
    trials: int = 100_000,
    tol: float = DEFAULT_TOL,
) -> list[BoundReport]:
    """``(E f^p)^(1/p) <= E f + 4 sqrt(p N) |a|_inf |b|_inf`` with ``f = |sum a_sigma(i) b_i|``.

    The second report is the weaker form with ``sqrt(E f^2)`` in place of ``E f``.
    """
    a, b = as_weights(a), as_weights(b)
    if a.N != b.N:
        raise ParameterError(f"length mismatch: {a.N} vs {b.N}")
    p = as_order(p)
    N = a.N
    C = 4 * a.sup_norm * b.sup_norm
    dev = to_real(C) * mpmath.sqrt(to_real(p) * N)
    params = {"N": N, "p": p, "a": a, "b": b}

    if mode == "exact":
        if N > PERMUTATION_CAP:
            raise CapacityError(f"exact mode needs N <= {PERMUTATION_CAP}, got {N}")
        hist, D = bilinear_histogram(a, b)
        mp_ = moment_from_counts(hist, D, p)
        m1 = moment_from_counts(hist, D, 1)
        m2 = moment_from_counts(hist, D, 2)
        lhs = root(mp_, p)
        rhs = to_real(m1) + dev
        if isinstance(p, int):
            main = judge("eq10", lhs, rhs, exact=root_le_affine_surd(mp_, p, m1, C, p * N), params=params)
        else:
            main = judge("eq10", lhs, rhs, tol=tol, params=params)
        main.extra.update({"mean_abs": m1, "moment": mp_})
        chained = judge("eq10-chained", lhs, mpmath.sqrt(to_real(m2)) + dev, tol=tol, params=params)
        return [main, chained]

    if mode != "mc":
        raise ParameterError(f"unknown mode {mode!r}")
    if sampler is None:
        raise ParameterError("mc mode needs a sampler")
    if trials < 2:
        raise ParameterError(f"need at least 2 trials, got {trials}")
    f = _sample_abs_bilinear(a, b, trials, sampler, 1 << 16)
    pf = float(p)
    vp, v1, v2 = f**pf, f, f**2
    est = {k: (float(v.mean()), float(v.std(ddof=1) / math.sqrt(trials))) for k, v in (("p", vp), ("1", v1), ("2", v2))}
    lhs = mpmath.power(est["p"][0], 1 / mpmath.mpf(pf)) if est["p"][0] > 0 else mpmath.mpf(0)
    out = []
    for sid, (centre, se) in (("eq10", est["1"]), ("eq10-chained", (math.sqrt(est["2"][0]), 0.0))):
        if sid == "eq10-chained":
            # delta method for sqrt of the second-moment estimate
            se = est["2"][1] / (2 * centre) if centre else 0.0
        rhs = mpmath.mpf(centre) + dev
        upper = (mpmath.mpf(centre + SIGMAS * se) + dev) ** pf
        consistent = est["p"][0] - SIGMAS * est["p"][1] <= upper
        out.append(BoundReport(
            sid, lhs, rhs, bool(consistent), method=MONTE_CARLO, params=params,
            samples=trials, seed=sampler.seed,
            notes=[("consistent" if consistent else "inconsistent") + " at 4 sigma"],
            extra={"moment_estimate": est["p"][0], "moment_stderr": est["p"][1]},
        ))
    return out
