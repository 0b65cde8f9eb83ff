"""The symmetric-group view of the balanced sign space.

Permutations are 1-based at every public surface.  Exact averages over the
group enumerate all ``N!`` permutations (``N <= 8``); beyond that the
seeded Monte Carlo estimators take over.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
import numpy as np

from .constrained_moments import SignVector
from .errors import CapacityError, ConstraintInfeasibleError, ParameterError
from .numeric import Scalar, as_order, moment_from_counts, root, to_real
from .weights import WeightLike, WeightVector, as_weights

PERMUTATION_CAP = 8

M_INTERPRETATION = (
    "M(a,b,p) read as the L_p norm over uniform permutations of "
    "sigma -> |sum_i a_sigma(i) b_i| (an interpretation; M is not otherwise defined)"
)


class Permutation(tuple):
    """A bijection of ``{1, ..., N}`` stored as ``(sigma(1), ..., sigma(N))``."""

    def __new__(cls, mapping: Sequence[int]):
        mapping = tuple(int(x) for x in mapping)
        if sorted(mapping) != list(range(1, len(mapping) + 1)):
            raise ParameterError(f"not a permutation of 1..{len(mapping)}: {mapping}")
        return super().__new__(cls, mapping)

    @classmethod
    def identity(cls, N: int) -> "Permutation":
        return cls(range(1, N + 1))

    @classmethod
    def from_zero_based(cls, mapping: Sequence[int]) -> "Permutation":
        return cls(int(x) + 1 for x in mapping)

    @property
    def N(self) -> int:
        return len(self)

    def inverse(self) -> "Permutation":
        inv = [0] * len(self)
        for i, s in enumerate(self, start=1):
            inv[s - 1] = i
        return Permutation(inv)

    def __call__(self, i: int) -> int:
        return self[i - 1]


def split_signs(N: int) -> WeightVector:
    """``(1, ..., 1, -1, ..., -1)`` with N/2 of each."""
    if N < 2 or N % 2:
        raise ConstraintInfeasibleError(f"need even N >= 2, got N={N}")
    n = N // 2
    return WeightVector((Fraction(1),) * n + (Fraction(-1),) * n)


def f_a(sigma: Sequence[int], a: WeightLike) -> Fraction:
    """``|sum_{i<=n} a_sigma(i) - sum_{i>n} a_sigma(i)|`` with ``N = 2n``."""
    a = as_weights(a)
    sigma = sigma if isinstance(sigma, Permutation) else Permutation(sigma)
    if sigma.N != a.N:
        raise ParameterError(f"length mismatch: permutation of {sigma.N}, {a.N} weights")
    if a.N % 2:
        raise ConstraintInfeasibleError(f"need even N, got N={a.N}")
    n = a.N // 2
    head = sum((a[s - 1] for s in sigma[:n]), Fraction(0))
    tail = sum((a[s - 1] for s in sigma[n:]), Fraction(0))
    return abs(head - tail)


def sigma_to_sign_vector(sigma: Sequence[int]) -> SignVector:
    """``eps_i = +1`` iff ``sigma(i) <= n``.

    Pointwise, ``f_a(sigma) = |weighted_sum(a, sigma_to_sign_vector(sigma^-1))|``;
    the map pushes the uniform measure on permutations onto the uniform
    measure on balanced signs (every fiber has ``n! * n!`` elements), which
    is what equates the two moment computations.
    """
    sigma = sigma if isinstance(sigma, Permutation) else Permutation(sigma)
    if sigma.N % 2:
        raise ConstraintInfeasibleError(f"need even N, got N={sigma.N}")
    n = sigma.N // 2
    return SignVector([1 if s <= n else -1 for s in sigma])


@lru_cache(maxsize=None)
def all_permutations(N: int) -> np.ndarray:
    """Every permutation of ``range(N)`` (0-based) in lexicographic order, shape ``(N!, N)``."""
    if N > PERMUTATION_CAP:
        raise CapacityError(f"N={N} exceeds the permutation enumeration cap {PERMUTATION_CAP}")
    arr = np.array(list(itertools.permutations(range(N))), dtype=np.int64).reshape(-1, N)
    arr.setflags(write=False)
    return arr


def _int_array(ints: Sequence[int], bound: int) -> np.ndarray:
    # int64 only when every partial sum provably fits
    if bound < 2**62:
        return np.array(ints, dtype=np.int64)
    return np.array(ints, dtype=object)


def bilinear_values(a: WeightLike, b: WeightLike, cap: int = PERMUTATION_CAP) -> tuple[np.ndarray, int]:
    """``D * sum_i a_sigma(i) b_i`` for every permutation, as integers; returns ``(values, D)``."""
    a, b = as_weights(a), as_weights(b)
    if a.N != b.N:
        raise ParameterError(f"length mismatch: {a.N} vs {b.N}")
    if a.N > cap:
        raise CapacityError(f"N={a.N} exceeds the permutation enumeration cap {cap}")
    A, Da = a.scaled
    B, Db = b.scaled
    bound = a.N * max(map(abs, A)) * max(map(abs, B))
    perms = all_permutations(a.N)
    vals = _int_array(A, bound)[perms] @ _int_array(B, bound)
    return vals, Da * Db


def bilinear_histogram(a: WeightLike, b: WeightLike, cap: int = PERMUTATION_CAP) -> tuple[Counter, int]:
    vals, D = bilinear_values(a, b, cap)
    uniq, counts = np.unique(vals, return_counts=True)
    return Counter({int(v): int(c) for v, c in zip(uniq, counts)}), D


def permutation_moment_exact(a: WeightLike, p, cap: int = PERMUTATION_CAP) -> Scalar:
    """Average of ``f_a**p`` over all ``N!`` permutations."""
    a = as_weights(a)
    p = as_order(p)
    hist, D = bilinear_histogram(a, split_signs(a.N), cap)
    return moment_from_counts(hist, D, p)


def bilinear_moment_exact(a: WeightLike, b: WeightLike, p, cap: int = PERMUTATION_CAP) -> Scalar:
    """Average of ``|sum_i a_sigma(i) b_i|**p`` over all permutations."""
    hist, D = bilinear_histogram(a, b, cap)
    return moment_from_counts(hist, D, as_order(p))


# --- sampling ----------------------------------------------------------------


@dataclass
class SeededSampler:
    """Deterministic source of uniform permutations.

    Backed by numpy's PCG64 seeded from ``SeedSequence(seed)``; ``stream``
    names a spawned substream (``()`` for the root).  Shuffles are
    Fisher-Yates, so every permutation is equally likely.
    """

    seed: int
    stream: tuple[int, ...] = ()
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._rng = np.random.Generator(np.random.PCG64(ss))

    def spawn(self, k: int) -> list["SeededSampler"]:
        """``k`` independent substreams, each reproducible from (seed, stream)."""
        return [SeededSampler(self.seed, self.stream + (i,)) for i in range(k)]

    def permutations(self, N: int, count: int) -> np.ndarray:
        """``count`` uniform permutations of ``range(N)``, one per row."""
        if N < 1:
            raise ParameterError(f"N must be >= 1, got {N}")
        out = np.tile(np.arange(N, dtype=np.int64), (count, 1))
        rows = np.arange(count)
        for i in range(N - 1, 0, -1):
            j = self._rng.integers(0, i + 1, size=count)
            tmp = out[rows, i].copy()
            out[rows, i] = out[rows, j]
            out[rows, j] = tmp
        return out


def sample_permutation(sampler: SeededSampler, N: int) -> Permutation:
    return Permutation.from_zero_based(sampler.permutations(N, 1)[0])


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int
    stream: tuple[int, ...] = ()

    def within(self, target, k: float = 4.0) -> bool:
        """Whether ``target`` lies within ``k`` standard errors of the estimate."""
        gap = abs(self.estimate - float(target))
        return gap <= k * self.stderr or math.isclose(self.estimate, float(target), rel_tol=1e-12, abs_tol=1e-12)


def _sample_abs_bilinear(a: WeightVector, b: WeightVector, trials: int, sampler: SeededSampler, batch: int) -> np.ndarray:
    A = np.array([float(x) for x in a])
    B = np.array([float(x) for x in b])
    out = np.empty(trials)
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        perms = sampler.permutations(a.N, m)
        out[done : done + m] = np.abs(A[perms] @ B)
        done += m
    return out


def monte_carlo_moment(
    a: WeightLike,
    b: WeightLike,
    p,
    trials: int,
    sampler: SeededSampler,
    batch: int = 1 << 16,
) -> MonteCarloEstimate:
    """Sample mean of ``|sum_i a_sigma(i) b_i|**p`` with its standard error."""
    a, b = as_weights(a), as_weights(b)
    if a.N != b.N:
        raise ParameterError(f"length mismatch: {a.N} vs {b.N}")
    if trials < 2:
        raise ParameterError(f"need at least 2 trials, got {trials}")
    p = as_order(p)
    f = _sample_abs_bilinear(a, b, trials, sampler, batch)
    vals = f ** (p if isinstance(p, int) else float(p))
    return MonteCarloEstimate(
        float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials)), trials, sampler.seed, sampler.stream
    )


# --- M(a, b, p) exploration ----------------------------------------------


@dataclass(frozen=True)
class MRecord:
    """``M(a,b,p)``, ``M(a,b,2)`` and their ratio for one instance."""

    N: int
    p: object
    M_p: mpmath.mpf
    M_2: mpmath.mpf
    ratio: mpmath.mpf
    mode: str
    samples: Optional[int] = None
    seed: Optional[int] = None
    note: str = M_INTERPRETATION


def m_explorer(
    a: WeightLike,
    b: WeightLike,
    p,
    mode: str = "exact",
    trials: int = 100_000,
    sampler: Optional[SeededSampler] = None,
) -> MRecord:
    a, b = as_weights(a), as_weights(b)
    p = as_order(p)
    if mode == "exact":
        mp_ = bilinear_moment_exact(a, b, p)
        m2 = bilinear_moment_exact(a, b, 2)
        samples = seed = None
    elif mode == "mc":
        if sampler is None:
            raise ParameterError("mc mode needs a sampler")
        s1, s2 = sampler.spawn(2)
        mp_ = monte_carlo_moment(a, b, p, trials, s1).estimate
        m2 = monte_carlo_moment(a, b, 2, trials, s2).estimate
        samples, seed = trials, sampler.seed
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    Mp, M2 = root(mp_, p), mpmath.sqrt(to_real(m2))
    ratio = Mp / M2 if M2 else mpmath.mpf(1) if Mp == 0 else mpmath.inf
    return MRecord(a.N, p, Mp, M2, ratio, mode, samples, seed)
