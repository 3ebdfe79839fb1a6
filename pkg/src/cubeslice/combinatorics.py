"""Exact enumeration and counting helpers.

Subsets of ``[n]`` are visited in reflected binary Gray-code order so that a
running weighted sum ``w . 1_K`` changes by a single weight per step.  The
same walk drives the sign-vector sums over ``{-1, +1}^n``.

Masks are plain integers; bit ``i`` stands for coordinate ``i`` (0-based).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from ._config import check_dimension
from .errors import CubeSliceError

__all__ = [
    "SubsetCursor",
    "SignVector",
    "EulerianTable",
    "gray_code",
    "gray_steps",
    "enumerate_subsets",
    "enumerate_sign_vectors",
    "eulerian",
    "eulerian_explicit",
    "binomial",
    "factorial",
]


def gray_code(i: int) -> int:
    return i ^ (i >> 1)


def _check_range(n: int, start: int, stop: int | None) -> int:
    total = 1 << n
    stop = total if stop is None else stop
    if not 0 <= start <= stop <= total:
        raise CubeSliceError(f"invalid enumeration range [{start}, {stop}) for n={n}")
    return stop


def gray_steps(n: int, start: int = 0, stop: int | None = None) -> Iterator[tuple[int, int]]:
    """Yield ``(mask, flipped)`` for Gray indices ``start <= i < stop``.

    ``flipped`` is the bit toggled relative to the previous mask, or ``-1`` for
    the first mask of the range.  Splitting ``[0, 2^n)`` into consecutive
    ranges visits every mask exactly once.
    """
    stop = _check_range(n, start, stop)
    if start == stop:
        return
    prev = gray_code(start)
    yield prev, -1
    for i in range(start + 1, stop):
        # Gray(i) differs from Gray(i-1) in the lowest set bit of i.
        bit = (i & -i).bit_length() - 1
        prev ^= 1 << bit
        yield prev, bit


@dataclass(frozen=True, slots=True)
class SubsetCursor:
    """One state of a Gray-code subset walk."""

    dimension: int
    mask: int
    flipped: int | None
    running_sum: Fraction | None = None

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.dimension) if self.mask >> i & 1)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def indicator(self) -> tuple[int, ...]:
        """The characteristic vector ``1_K`` as a 0/1 tuple."""
        return tuple(self.mask >> i & 1 for i in range(self.dimension))


def enumerate_subsets(
    n: int,
    weights: Sequence[Fraction] | None = None,
    *,
    start: int = 0,
    stop: int | None = None,
    cap: int | None = None,
) -> Iterator[SubsetCursor]:
    """Walk all subsets of ``[n]`` in Gray order, starting from the empty set.

    When ``weights`` is given, each cursor carries ``w . 1_K`` updated with one
    addition or subtraction per step.  ``start``/``stop`` select a contiguous
    range of Gray indices so the walk can be partitioned across workers.
    """
    if n < 1:
        raise CubeSliceError(f"dimension must be positive, got {n}")
    check_dimension(n, cap)
    if weights is not None and len(weights) != n:
        raise CubeSliceError(f"expected {n} weights, got {len(weights)}")
    total: Fraction | None = None
    for mask, bit in gray_steps(n, start, stop):
        if weights is not None:
            if bit < 0:
                total = sum((Fraction(weights[i]) for i in range(n) if mask >> i & 1), Fraction(0))
            elif mask >> bit & 1:
                total += weights[bit]
            else:
                total -= weights[bit]
        yield SubsetCursor(n, mask, None if bit < 0 else bit, total)


@dataclass(frozen=True, slots=True)
class SignVector:
    dimension: int
    signs: tuple[int, ...]
    parity: int

    def __post_init__(self) -> None:
        if len(self.signs) != self.dimension or any(s not in (-1, 1) for s in self.signs):
            raise CubeSliceError(f"invalid sign vector {self.signs!r}")
        if self.parity != math.prod(self.signs):
            raise CubeSliceError("parity must equal the product of the signs")


def enumerate_sign_vectors(
    n: int, filter: str = "all", *, cap: int | None = None
) -> Iterator[SignVector]:
    """Yield the vertices of ``[-1, 1]^n`` with their parities.

    ``filter="last_negative"`` keeps only vectors whose last entry is ``-1``.
    """
    if n < 1:
        raise CubeSliceError(f"dimension must be positive, got {n}")
    if filter not in ("all", "last_negative"):
        raise CubeSliceError(f"unknown sign-vector filter {filter!r}")
    check_dimension(n, cap)
    free = n if filter == "all" else n - 1
    tail = () if filter == "all" else (-1,)
    for mask in range(1 << free):
        # bit set means -1; lexicographic in (+ before -) from the first coordinate
        signs = tuple(-1 if mask >> (free - 1 - i) & 1 else 1 for i in range(free)) + tail
        yield SignVector(n, signs, math.prod(signs))


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def factorial(n: int) -> int:
    return math.factorial(n)


class EulerianTable:
    """Memoized triangle of Eulerian numbers ``A(n, k)``.

    Rows are built with ``A(n, k) = (k + 1) A(n-1, k) + (n - k) A(n-1, k-1)``
    starting from ``A(0, 0) = 1``.
    """

    def __init__(self) -> None:
        self.rows: list[list[int]] = [[1]]

    @property
    def max_n(self) -> int:
        return len(self.rows) - 1

    def row(self, n: int) -> list[int]:
        if n < 0:
            raise CubeSliceError(f"n must be nonnegative, got {n}")
        while len(self.rows) <= n:
            m = len(self.rows)
            prev = self.rows[-1]
            new = []
            for k in range(m):
                left = prev[k] if k < len(prev) else 0
                right = prev[k - 1] if 0 < k <= len(prev) else 0
                new.append((k + 1) * left + (m - k) * right)
            self.rows.append(new)
        return self.rows[n]

    def __call__(self, n: int, k: int) -> int:
        row = self.row(n)
        if k < 0 or k >= len(row):
            return 0
        return row[k]


_TABLE = EulerianTable()


def eulerian(n: int, k: int) -> int:
    """Number of permutations of ``[n]`` with exactly ``k`` ascents."""
    if n < 0:
        raise CubeSliceError(f"n must be nonnegative, got {n}")
    return _TABLE(n, k)


def eulerian_explicit(n: int, k: int) -> int:
    """Alternating-sum form of ``A(n, k)``, kept as an independent cross-check."""
    if n < 1 or k < 0 or k >= n:
        return 1 if n == 0 and k == 0 else 0
    return sum((-1) ** j * math.comb(n + 1, j) * (k + 1 - j) ** n for j in range(k + 2))
