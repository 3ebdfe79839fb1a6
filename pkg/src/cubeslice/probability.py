"""Distributions of weighted sums of independent uniform and beta variables.

``Y = sum c_i X_i`` with ``X_i`` uniform on ``[l_i, u_i]`` is an affine image
of the unit-cube picture: ``Y = z0 + w . U`` with ``w_i = c_i (u_i - l_i)``,
``z0 = sum c_i l_i`` and ``U`` uniform on ``I^n``.  The CDF is a slice volume
and the density is the rational part of the matching section volume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .combinatorics import enumerate_subsets
from .errors import CubeSliceError
from .geometry import (
    SectionQuery,
    SliceQuery,
    WeightVector,
    as_rational,
    section_volume,
    slice_volume,
)
from .polynomial import MultiPoly, integrate_poly_slice

__all__ = [
    "UniformSumDistribution",
    "BetaProductDensity",
    "cdf",
    "pdf",
    "quantile",
    "beta_cdf",
    "sample",
    "density_pieces",
]


@dataclass(frozen=True)
class UniformSumDistribution:
    """Law of ``sum c_i X_i`` with independent ``X_i ~ U[l_i, u_i]``.

    ``lowers``/``uppers`` default to 0 and 1, which gives the canonical case
    ``c_i = w_i`` on the unit cube.
    """

    coefficients: tuple[Fraction, ...]
    lowers: tuple[Fraction, ...] | None = None
    uppers: tuple[Fraction, ...] | None = None
    weights: WeightVector = field(init=False, repr=False)
    offset: Fraction = field(init=False, repr=False)

    def __post_init__(self) -> None:
        cs = tuple(as_rational(c) for c in self.coefficients)
        n = len(cs)
        if n == 0:
            raise CubeSliceError("distribution needs at least one variable")
        ls = tuple(as_rational(x) for x in self.lowers) if self.lowers is not None else (Fraction(0),) * n
        us = tuple(as_rational(x) for x in self.uppers) if self.uppers is not None else (Fraction(1),) * n
        if len(ls) != n or len(us) != n:
            raise CubeSliceError("coefficients, lowers and uppers must have equal length")
        if any(c == 0 for c in cs):
            raise CubeSliceError("coefficients must be nonzero")
        if any(u <= l for l, u in zip(ls, us)):
            raise CubeSliceError("each upper bound must exceed its lower bound")
        set_ = object.__setattr__
        set_(self, "coefficients", cs)
        set_(self, "lowers", ls)
        set_(self, "uppers", us)
        set_(self, "weights", WeightVector(tuple(c * (u - l) for c, l, u in zip(cs, ls, us))))
        set_(self, "offset", sum((c * l for c, l in zip(cs, ls)), Fraction(0)))

    @classmethod
    def canonical(cls, weights: Sequence) -> "UniformSumDistribution":
        return cls(tuple(as_rational(w) for w in weights))

    @classmethod
    def centered(cls, half_widths: Sequence) -> "UniformSumDistribution":
        """Sum of ``X_i ~ U[-a_i, a_i]``."""
        a = [as_rational(x) for x in half_widths]
        return cls((Fraction(1),) * len(a), tuple(-x for x in a), tuple(a))

    @classmethod
    def from_dict(cls, data: Mapping) -> "UniformSumDistribution":
        try:
            coeffs = data["coeffs"]
        except (KeyError, TypeError):
            raise CubeSliceError("distribution spec needs a 'coeffs' list") from None
        return cls(tuple(coeffs), data.get("lowers"), data.get("uppers"))

    def to_dict(self) -> dict:
        return {
            "coeffs": [str(c) for c in self.coefficients],
            "lowers": [str(x) for x in self.lowers],
            "uppers": [str(x) for x in self.uppers],
        }

    @property
    def dimension(self) -> int:
        return len(self.coefficients)

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        w = self.weights
        return self.offset + w.negative_level, self.offset + w.positive_level


@dataclass(frozen=True)
class BetaProductDensity:
    """Independent ``Beta(alpha_i, beta_i)`` marginals with integer parameters."""

    alphas: tuple[int, ...]
    betas: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.alphas) != len(self.betas) or not self.alphas:
            raise CubeSliceError("alphas and betas must be nonempty and of equal length")
        for p in (*self.alphas, *self.betas):
            if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or p < 1:
                raise CubeSliceError(
                    f"beta parameters must be integers >= 1 (non-integer parameters are not supported), got {p!r}"
                )
        object.__setattr__(self, "alphas", tuple(int(a) for a in self.alphas))
        object.__setattr__(self, "betas", tuple(int(b) for b in self.betas))

    @property
    def dimension(self) -> int:
        return len(self.alphas)

    def density(self) -> MultiPoly:
        """``prod x_i^(a_i-1) (1-x_i)^(b_i-1) / B(a_i, b_i)`` as an exact polynomial."""
        n = self.dimension
        out = MultiPoly.constant(n)
        for i, (a, b) in enumerate(zip(self.alphas, self.betas)):
            x = MultiPoly.variable(n, i)
            one_minus = MultiPoly.constant(n) - x
            inv_beta = Fraction(math.factorial(a + b - 1), math.factorial(a - 1) * math.factorial(b - 1))
            out = out * (x ** (a - 1)) * (one_minus ** (b - 1)) * inv_beta
        return out


def cdf(d: UniformSumDistribution, z) -> Fraction:
    """Exact ``P[Y <= z]``."""
    return slice_volume(SliceQuery(d.weights, as_rational(z) - d.offset)).magnitude


def pdf(d: UniformSumDistribution, z) -> Fraction:
    """Exact density of ``Y`` at ``z``.

    This is the rational magnitude of the section volume: the ``||w||_2`` in
    the section volume is exactly the factor relating distance along the
    normal to the level ``z``, so it cancels.  At a breakpoint the value
    follows the ``truncated_power(0, 0) == 0`` convention.
    """
    return section_volume(SectionQuery(d.weights, as_rational(z) - d.offset)).magnitude


def density_pieces(d: UniformSumDistribution) -> list[tuple[Fraction, Fraction, tuple[Fraction, ...]]]:
    """The density as an explicit polynomial between consecutive vertex levels.

    Returns ``(a, b, coeffs)`` triples such that ``pdf(z) = sum(coeffs[j] * z**j)``
    on the open interval ``(a, b)``.  Each vertex level ``s`` of the support
    switches on one term ``+-(z - s)^(n-1)``, so the coefficient vector is
    updated once per distinct level instead of re-summing ``2^n`` terms per
    evaluation.
    """
    w = d.weights.absolute()
    n = w.dimension
    base = d.offset + d.weights.negative_level
    signs: dict[Fraction, int] = {}
    for cur in enumerate_subsets(n, w.components):
        level = base + cur.running_sum
        signs[level] = signs.get(level, 0) + (-1 if cur.size & 1 else 1)
    scale = 1 / (math.factorial(n - 1) * w.product)
    coeffs = [Fraction(0)] * n
    levels = sorted(signs)
    out = []
    for a, b in zip(levels, levels[1:]):
        k = signs[a]
        if k:
            # k * (z - a)^(n-1) expanded in powers of z
            for j in range(n):
                coeffs[j] += k * math.comb(n - 1, j) * (-a) ** (n - 1 - j)
        out.append((a, b, tuple(scale * c for c in coeffs)))
    return out


def quantile(d: UniformSumDistribution, q, tol) -> Fraction:
    """Smallest-bracket bisection for ``cdf(z) = q`` on the exact CDF.

    Returns the midpoint of a bracket ``[lo, hi]`` of width at most ``tol``
    with ``cdf(lo) <= q <= cdf(hi)``; an exact hit is returned as is.
    """
    q, tol = as_rational(q), as_rational(tol)
    if not 0 <= q <= 1:
        raise CubeSliceError(f"quantile level must lie in [0, 1], got {q}")
    if tol <= 0:
        raise CubeSliceError(f"tolerance must be positive, got {tol}")
    lo, hi = d.support
    if q == 0:
        return lo
    if q == 1:
        return hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        c = cdf(d, mid)
        if c == q:
            return mid
        if c < q:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def beta_cdf(w, b: BetaProductDensity, z) -> Fraction:
    """Exact ``P[w . X <= z]`` for independent integer-parameter beta ``X_i``."""
    if not isinstance(w, WeightVector):
        w = WeightVector.of(w)
    if w.dimension != b.dimension:
        raise CubeSliceError("weights and beta parameters differ in length")
    return integrate_poly_slice(b.density(), SliceQuery(w, as_rational(z)))


def sample(d: UniformSumDistribution, seed: int, count: int) -> np.ndarray:
    """``count`` draws of ``Y`` from a PCG64 generator seeded with ``seed``.

    The generator is ``numpy.random.Generator(PCG64(seed))``; each row of an
    ``(count, n)`` uniform block is mapped to ``[l_i, u_i]`` and combined.
    """
    if count < 0:
        raise CubeSliceError(f"count must be nonnegative, got {count}")
    rng = np.random.Generator(np.random.PCG64(seed))
    n = d.dimension
    lows = np.array([float(x) for x in d.lowers])
    widths = np.array([float(u - l) for l, u in zip(d.lowers, d.uppers)])
    coeffs = np.array([float(c) for c in d.coefficients])
    out = np.empty(count)
    chunk = 1 << 16
    for start in range(0, count, chunk):
        stop = min(count, start + chunk)
        u = rng.random((stop - start, n))
        out[start:stop] = (lows + widths * u) @ coeffs
    return out
