"""Exact rational weight vectors and their derived quantities."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import lcm
from numbers import Integral
from pathlib import Path
from typing import Iterable, Sequence, Union

from .errors import ParameterError

Rational = Union[int, Fraction]
WeightLike = Union["WeightVector", Sequence[Union[int, str, Fraction]]]


@dataclass(frozen=True)
class WeightVector:
    """A length-N vector of exact rationals.

    Evenness is not enforced here; operations that need N = 2n check it.
    """

    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.entries:
            raise ParameterError("weight vector must be nonempty")
        object.__setattr__(self, "entries", tuple(_fraction(x) for x in self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def N(self) -> int:
        return len(self.entries)

    @cached_property
    def total(self) -> Fraction:
        return sum(self.entries, Fraction(0))

    @cached_property
    def mean(self) -> Fraction:
        return self.total / self.N

    @cached_property
    def sq_norm(self) -> Fraction:
        return sum((x * x for x in self.entries), Fraction(0))

    @cached_property
    def sup_norm(self) -> Fraction:
        return max(abs(x) for x in self.entries)

    @cached_property
    def centered_sq_norm(self) -> Fraction:
        """``||a||^2 - N*mean^2``, i.e. the squared norm of ``a - mean*1``."""
        r = self.sq_norm - self.N * self.mean**2
        assert r >= 0, "Cauchy-Schwarz violated"
        return r

    @cached_property
    def scaled(self) -> tuple[tuple[int, ...], int]:
        """Integer numerators over the least common denominator ``D``."""
        d = lcm(*(x.denominator for x in self.entries))
        return tuple(int(x * d) for x in self.entries), d

    def __neg__(self) -> "WeightVector":
        return WeightVector(tuple(-x for x in self.entries))

    def shift(self, c: Rational) -> "WeightVector":
        return WeightVector(tuple(x + c for x in self.entries))

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.entries) + ")"


def _fraction(x) -> Fraction:
    # numpy scalars would otherwise survive as numerator/denominator types
    if isinstance(x, Integral):
        return Fraction(int(x))
    q = Fraction(x)
    return Fraction(int(q.numerator), int(q.denominator))


def as_weights(a: WeightLike) -> WeightVector:
    if isinstance(a, WeightVector):
        return a
    try:
        return WeightVector(tuple(_fraction(x) for x in a))
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParameterError(f"cannot read weights {a!r}: {exc}") from None


def parse_weights(text: str) -> WeightVector:
    """Parse ``"1,-1/2,3"`` or a path to a file with one rational per line."""
    path = Path(text)
    if path.is_file():
        items = [ln.strip() for ln in path.read_text().splitlines()]
        items = [x for x in items if x and not x.startswith("#")]
    else:
        items = [x.strip() for x in text.split(",") if x.strip()]
    return as_weights(items)


def random_rational_weights(
    rng: random.Random,
    N: int,
    num_range: tuple[int, int] = (-9, 9),
    den_range: tuple[int, int] = (1, 9),
) -> WeightVector:
    """Numerators uniform on ``num_range``, denominators uniform on ``den_range``."""
    return WeightVector(
        tuple(Fraction(rng.randint(*num_range), rng.randint(*den_range)) for _ in range(N))
    )


def random_weight_stream(seed: int, sizes: Iterable[int], count: int) -> list[WeightVector]:
    """``count`` vectors for each size in ``sizes``, in grid order."""
    rng = random.Random(seed)
    return [random_rational_weights(rng, N) for N in sizes for _ in range(count)]
