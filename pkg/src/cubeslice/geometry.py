"""Volumes of slices, slabs and sections of the unit cube.

Every closed form here is an alternating sum of truncated powers over the
subsets of ``[n]`` (or over sign vectors in ``{-1, 1}^n``).  The sums are
evaluated exactly: weights and levels are scaled by a common denominator so
the 2^n-term loop runs on Python integers, and the result is returned as a
``Fraction``.  A float path based on ``math.fsum`` exists for exploratory use
and is always labelled approximate.

Two cubes are supported: the unit cube ``I^n = [0, 1]^n`` and the centred
cube ``C^n = [-1/2, 1/2]^n``.  Section volumes are carried as a rational
magnitude ``r`` with the value ``r * ||w||_2``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from ._config import check_dimension
from .combinatorics import gray_steps
from .errors import CubeSliceError, DegenerateNormalError, OrderingError

__all__ = [
    "Cube",
    "Scale",
    "WeightVector",
    "ReductionRecord",
    "SliceQuery",
    "SlabQuery",
    "SectionQuery",
    "VolumeValue",
    "as_rational",
    "truncated_power",
    "normalize_weights",
    "reflect_to_positive",
    "subset_power_sum",
    "sign_power_sum",
    "slice_volume",
    "slab_between",
    "slab_volume_centered",
    "section_volume",
    "central_section_volume",
    "eulerian_slab_volume",
    "identity_residual",
]


class Cube(str, enum.Enum):
    UNIT = "unit"
    CENTERED = "centered"


class Scale(str, enum.Enum):
    UNIT = "unit"
    L2NORM = "l2norm"


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions, decimal strings and ``"p/q"`` strings exactly.

    Floats are accepted and converted exactly (binary expansion), which is
    rarely what a caller wants; prefer strings for decimal input.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise CubeSliceError(f"not a rational number: {x!r}")
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise CubeSliceError(f"not a rational number: {x!r}") from None
    try:
        return Fraction(x)
    except (TypeError, ValueError, OverflowError):
        raise CubeSliceError(f"not a rational number: {x!r}") from None


def _lcm_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, v.denominator)
    return d


@dataclass(frozen=True)
class WeightVector:
    """A hyperplane normal with every component nonzero."""

    components: tuple[Fraction, ...]
    dimension: int = field(init=False)
    neg_set: frozenset[int] = field(init=False)
    l1: Fraction = field(init=False)
    l2sq: Fraction = field(init=False)
    linf: Fraction = field(init=False)
    product: Fraction = field(init=False)

    def __post_init__(self) -> None:
        comps = tuple(as_rational(c) for c in self.components)
        if not comps:
            raise DegenerateNormalError("degenerate normal vector: no components")
        if any(c == 0 for c in comps):
            raise DegenerateNormalError(
                "zero component in weight vector; use normalize_weights to drop it"
            )
        set_ = object.__setattr__
        set_(self, "components", comps)
        set_(self, "dimension", len(comps))
        set_(self, "neg_set", frozenset(i for i, c in enumerate(comps) if c < 0))
        set_(self, "l1", sum((abs(c) for c in comps), Fraction(0)))
        set_(self, "l2sq", sum((c * c for c in comps), Fraction(0)))
        set_(self, "linf", max(abs(c) for c in comps))
        set_(self, "product", math.prod(comps, start=Fraction(1)))

    @classmethod
    def of(cls, values: Iterable) -> "WeightVector":
        return cls(tuple(as_rational(v) for v in values))

    def __len__(self) -> int:
        return self.dimension

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, i: int) -> Fraction:
        return self.components[i]

    @property
    def negative_level(self) -> Fraction:
        """``w . 1_N``: the smallest value of ``w . x`` on ``I^n``."""
        return sum((c for c in self.components if c < 0), Fraction(0))

    @property
    def positive_level(self) -> Fraction:
        """``w . 1_{[n] \\ N}``: the largest value of ``w . x`` on ``I^n``."""
        return sum((c for c in self.components if c > 0), Fraction(0))

    @property
    def total(self) -> Fraction:
        return sum(self.components, Fraction(0))

    def absolute(self) -> "WeightVector":
        return WeightVector(tuple(abs(c) for c in self.components))

    def negated(self) -> "WeightVector":
        return WeightVector(tuple(-c for c in self.components))

    def permuted(self, order: Sequence[int]) -> "WeightVector":
        return WeightVector(tuple(self.components[i] for i in order))

    def max_last(self) -> "WeightVector":
        """Move a component of largest modulus to the end, negating so it is positive."""
        j = max(range(self.dimension), key=lambda i: abs(self.components[i]))
        order = [i for i in range(self.dimension) if i != j] + [j]
        out = self.permuted(order)
        return out.negated() if out.components[-1] < 0 else out


@dataclass(frozen=True)
class ReductionRecord:
    """How a raw weight list was reduced by dropping zero components.

    Slice volumes are unchanged by the reduction.  A section of the original
    cube is a unit-height cylinder over the reduced section, so its volume is
    unchanged as well.
    """

    original_dimension: int
    kept: tuple[int, ...]
    dropped: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "original_dimension": self.original_dimension,
            "kept": list(self.kept),
            "dropped": list(self.dropped),
        }


def normalize_weights(raw: Sequence) -> tuple[WeightVector, ReductionRecord]:
    values = [as_rational(v) for v in raw]
    if not values:
        raise DegenerateNormalError("degenerate normal vector: empty weight list")
    kept = tuple(i for i, v in enumerate(values) if v != 0)
    if not kept:
        raise DegenerateNormalError("degenerate normal vector: all components are zero")
    dropped = tuple(i for i, v in enumerate(values) if v == 0)
    return WeightVector(tuple(values[i] for i in kept)), ReductionRecord(len(values), kept, dropped)


def _coerce_cube(cube) -> Cube:
    try:
        return Cube(cube)
    except ValueError:
        raise CubeSliceError(f"unknown cube {cube!r}; expected 'unit' or 'centered'") from None


@dataclass(frozen=True)
class SliceQuery:
    """The body ``{x in cube : w . x <= level}``."""

    weights: WeightVector
    level: Fraction
    cube: Cube = Cube.UNIT

    def __post_init__(self) -> None:
        object.__setattr__(self, "level", as_rational(self.level))
        object.__setattr__(self, "cube", _coerce_cube(self.cube))

    def on_unit_cube(self) -> "SliceQuery":
        """The equivalent query on ``I^n`` (shift ``x -> x + 1/2``)."""
        if self.cube is Cube.UNIT:
            return self
        return SliceQuery(self.weights, self.level + self.weights.total / 2, Cube.UNIT)

    def to_dict(self) -> dict:
        return {
            "weights": [str(c) for c in self.weights],
            "level": str(self.level),
            "cube": self.cube.value,
        }


@dataclass(frozen=True)
class SectionQuery:
    """The hyperplane piece ``{x in cube : w . x = level}``."""

    weights: WeightVector
    level: Fraction
    cube: Cube = Cube.UNIT

    def __post_init__(self) -> None:
        object.__setattr__(self, "level", as_rational(self.level))
        object.__setattr__(self, "cube", _coerce_cube(self.cube))

    def on_unit_cube(self) -> "SectionQuery":
        if self.cube is Cube.UNIT:
            return self
        return SectionQuery(self.weights, self.level + self.weights.total / 2, Cube.UNIT)

    to_dict = SliceQuery.to_dict


@dataclass(frozen=True)
class SlabQuery:
    """The central slab ``{x in C^n : |w . x| <= thickness / 2}``."""

    weights: WeightVector
    thickness: Fraction

    def __post_init__(self) -> None:
        theta = as_rational(self.thickness)
        if theta <= 0:
            raise CubeSliceError(f"slab thickness must be positive, got {theta}")
        object.__setattr__(self, "thickness", theta)

    def to_dict(self) -> dict:
        return {"weights": [str(c) for c in self.weights], "thickness": str(self.thickness)}


@dataclass(frozen=True)
class VolumeValue:
    """A volume ``magnitude`` (times ``||w||_2`` when ``scale`` is L2NORM).

    ``magnitude`` is ``None`` for results of the float path, which are marked
    ``approximate``.
    """

    magnitude: Fraction | None
    scale: Scale
    float_value: float
    norm_sq: Fraction = Fraction(1)
    approximate: bool = False

    @classmethod
    def unit(cls, r: Fraction) -> "VolumeValue":
        return cls(r, Scale.UNIT, float(r))

    @classmethod
    def l2(cls, r: Fraction, norm_sq: Fraction) -> "VolumeValue":
        return cls(r, Scale.L2NORM, float(r) * math.sqrt(norm_sq), norm_sq)

    @classmethod
    def approx(cls, value: float, scale: Scale, norm_sq: Fraction = Fraction(1)) -> "VolumeValue":
        return cls(None, scale, value, norm_sq, approximate=True)

    @property
    def value(self) -> float:
        return self.float_value

    def to_dict(self) -> dict:
        return {
            "exact": None if self.magnitude is None else str(self.magnitude),
            "scale": self.scale.value,
            "float": self.float_value,
            "approximate": self.approximate,
        }


def truncated_power(r, p: int) -> Fraction:
    """``max(r, 0) ** p``, with the exponent-zero case equal to ``[r > 0]``."""
    r = as_rational(r)
    if p < 0:
        raise CubeSliceError(f"exponent must be nonnegative, got {p}")
    if r <= 0:
        return Fraction(0)
    return r**p


# ---------------------------------------------------------------------------
# 2^n kernels


def _int_subset_sum(weights: tuple[int, ...], z: int, p: int, start: int, stop: int) -> int:
    """``sum_K (-1)^|K| (z - w . 1_K)_+^p`` over Gray indices in ``[start, stop)``."""
    n = len(weights)
    total = 0
    s = 0
    sign = 1
    for mask, bit in gray_steps(n, start, stop):
        if bit < 0:
            s = sum(weights[i] for i in range(n) if mask >> i & 1)
            sign = -1 if bin(mask).count("1") & 1 else 1
        else:
            s = s + weights[bit] if mask >> bit & 1 else s - weights[bit]
            sign = -sign
        r = z - s
        if r > 0:
            total += sign * r**p
    return total


def _int_signed_power_sum(values: tuple[int, ...], z: int, p: int, start: int, stop: int) -> int:
    """Same walk without truncation: ``sum_K (-1)^|K| (z + w . 1_K)^p``."""
    n = len(values)
    total = 0
    s = 0
    sign = 1
    for mask, bit in gray_steps(n, start, stop):
        if bit < 0:
            s = sum(values[i] for i in range(n) if mask >> i & 1)
            sign = -1 if bin(mask).count("1") & 1 else 1
        else:
            s = s + values[bit] if mask >> bit & 1 else s - values[bit]
            sign = -sign
        total += sign * (z + s) ** p
    return total


def _ranges(n: int, chunks: int) -> list[tuple[int, int]]:
    total = 1 << n
    chunks = max(1, min(chunks, total))
    bounds = [total * i // chunks for i in range(chunks + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(chunks)]


def _partitioned(kernel, ints: tuple[int, ...], z: int, p: int, chunks: int, workers: int | None) -> int:
    parts = _ranges(len(ints), chunks)
    if workers and workers > 1 and len(parts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(kernel, ints, z, p, a, b) for a, b in parts]
            return sum(f.result() for f in futures)
    return sum(kernel(ints, z, p, a, b) for a, b in parts)


def _integerize(values: Sequence[Fraction], extra: Fraction) -> tuple[tuple[int, ...], int, int]:
    d = _lcm_denominator([*values, extra])
    ints = tuple(int(v * d) for v in values)
    return ints, int(extra * d), d


def subset_power_sum(
    weights: Sequence[Fraction],
    z,
    p: int,
    *,
    truncate: bool = True,
    chunks: int = 1,
    workers: int | None = None,
    cap: int | None = None,
) -> Fraction:
    """Exact ``sum_{K subset [n]} (-1)^|K| (z - w . 1_K)_+^p``.

    With ``truncate=False`` the plain powers ``(z + w . 1_K)^p`` are summed
    instead (note the sign of the weights).  ``chunks`` partitions the Gray
    index range; ``workers`` evaluates the chunks in separate processes.  The
    result does not depend on either.
    """
    ws = [as_rational(w) for w in weights]
    n = len(ws)
    if n < 1:
        raise CubeSliceError("need at least one weight")
    check_dimension(n, cap)
    ints, zi, d = _integerize(ws, as_rational(z))
    kernel = _int_subset_sum if truncate else _int_signed_power_sum
    total = _partitioned(kernel, ints, zi, p, chunks, workers)
    return Fraction(total, d**p)


def _float_subset_terms(weights: Sequence[float], z: float, p: int) -> list[float]:
    n = len(weights)
    terms = []
    s = 0.0
    sign = 1.0
    for mask, bit in gray_steps(n):
        if bit >= 0:
            s = s + weights[bit] if mask >> bit & 1 else s - weights[bit]
            sign = -sign
        r = z - s
        if r > 0:
            terms.append(sign * r**p)
    return terms


def _float_sum(terms: list[float]) -> float:
    # fsum is correctly rounded; the ascending sort keeps partials small as well
    return math.fsum(sorted(terms, key=abs))


def sign_power_sum(
    values: Sequence[Fraction],
    p: int,
    *,
    last_negative: bool = False,
    chunks: int = 1,
    cap: int | None = None,
) -> Fraction:
    """Exact ``sum_s eps_s (v . s)_+^p`` over ``s`` in ``{-1, 1}^m``.

    With ``last_negative`` only sign vectors whose final entry is ``-1`` are
    summed.  The sum is reduced to a subset sum: flipping the coordinates in
    ``K`` of the all-plus vector gives ``v . s = v . 1 - 2 v . 1_K`` and
    ``eps_s = (-1)^|K|``.
    """
    vs = [as_rational(v) for v in values]
    m = len(vs)
    if m < 1:
        raise CubeSliceError("need at least one value")
    check_dimension(m, cap)
    if last_negative:
        head, base = vs[:-1], sum(vs[:-1], Fraction(0)) - vs[-1]
        sign = -1
        if not head:
            return sign * truncated_power(base, p)
    else:
        head, base, sign = vs, sum(vs, Fraction(0)), 1
    return sign * subset_power_sum([2 * v for v in head], base, p, chunks=chunks, cap=cap)


def _float_sign_sum(values: Sequence[float], p: int, last_negative: bool = False) -> float:
    if last_negative:
        head = list(values[:-1])
        base = sum(head) - values[-1]
        if not head:
            return -(max(base, 0.0) ** p if base > 0 else 0.0)
        return -_float_sum(_float_subset_terms([2 * v for v in head], base, p))
    return _float_sum(_float_subset_terms([2 * v for v in values], sum(values), p))


# ---------------------------------------------------------------------------
# slices and slabs


def reflect_to_positive(q: SliceQuery) -> SliceQuery:
    """Map a unit-cube query to one with all-positive weights and equal volume."""
    if q.cube is not Cube.UNIT:
        raise CubeSliceError("reflect_to_positive expects a query on the unit cube")
    w = q.weights
    return SliceQuery(w.absolute(), q.level - w.negative_level, Cube.UNIT)


def slice_volume(q: SliceQuery, *, float_only: bool = False, chunks: int = 1, workers: int | None = None) -> VolumeValue:
    q = q.on_unit_cube()
    w, z = q.weights, q.level
    if z <= w.negative_level:
        return VolumeValue.unit(Fraction(0))
    if z >= w.positive_level:
        return VolumeValue.unit(Fraction(1))
    check_dimension(w.dimension)
    r = reflect_to_positive(q)
    n = w.dimension
    if float_only:
        fw = [float(c) for c in r.weights]
        total = _float_sum(_float_subset_terms(fw, float(r.level), n))
        return VolumeValue.approx(total / (math.factorial(n) * math.prod(fw)), Scale.UNIT)
    s = subset_power_sum(r.weights.components, r.level, n, chunks=chunks, workers=workers)
    return VolumeValue.unit(s / (math.factorial(n) * r.weights.product))


def slab_between(weights: WeightVector, z1, z2, cube: Cube | str = Cube.UNIT, *, float_only: bool = False) -> VolumeValue:
    """Volume of ``{x in cube : z1 <= w . x <= z2}``."""
    z1, z2 = as_rational(z1), as_rational(z2)
    if z1 > z2:
        raise OrderingError(f"slab levels out of order: {z1} > {z2}")
    upper = slice_volume(SliceQuery(weights, z2, cube), float_only=float_only)
    lower = slice_volume(SliceQuery(weights, z1, cube), float_only=float_only)
    if float_only or upper.approximate or lower.approximate:
        return VolumeValue.approx(upper.float_value - lower.float_value, Scale.UNIT)
    return VolumeValue.unit(upper.magnitude - lower.magnitude)


SLAB_VARIANTS = ("polya", "altA", "altB")


def slab_volume_centered(
    q: SlabQuery, variant: str = "polya", *, fast_paths: bool = True, float_only: bool = False
) -> VolumeValue:
    """Central slab of ``C^n`` via one of three equivalent sign-vector sums.

    ``polya`` sums over all of ``{-1, 1}^(n+1)`` with ``v = (w, theta)``;
    ``altA`` sums over the half with last sign ``-1`` plus the constant 1;
    ``altB`` uses ``v' = (theta, w)`` with the largest ``|w_i|`` moved last and
    made positive, plus the constant ``theta / w_n``.
    """
    if variant not in SLAB_VARIANTS:
        raise CubeSliceError(f"unknown slab variant {variant!r}; expected one of {SLAB_VARIANTS}")
    w, theta = q.weights, q.thickness
    n = w.dimension
    if fast_paths and theta >= w.l1:
        return VolumeValue.unit(Fraction(1))
    check_dimension(n + 1)
    if variant == "altB":
        w = w.max_last()
        v = (theta, *w.components)
    else:
        v = (*w.components, theta)
    denom_scale = 2**n if variant == "polya" else 2 ** (n - 1)
    last_negative = variant != "polya"
    if variant == "polya":
        lead = Fraction(0)
    elif variant == "altA":
        lead = Fraction(1)
    else:
        lead = theta / w.components[-1]
    if float_only:
        s = _float_sign_sum([float(x) for x in v], n, last_negative)
        val = float(lead) + s / (denom_scale * math.factorial(n) * float(w.product))
        return VolumeValue.approx(val, Scale.UNIT)
    s = sign_power_sum(v, n, last_negative=last_negative)
    return VolumeValue.unit(lead + s / (denom_scale * math.factorial(n) * w.product))


# ---------------------------------------------------------------------------
# sections


def section_volume(q: SectionQuery, *, float_only: bool = False, chunks: int = 1) -> VolumeValue:
    """``(n-1)``-volume of the hyperplane section; zero when it misses the cube."""
    q = q.on_unit_cube()
    w, z = q.weights, q.level
    n = w.dimension
    if z < w.negative_level or z > w.positive_level:
        return VolumeValue.l2(Fraction(0), w.l2sq)
    check_dimension(n)
    pos = w.absolute()
    zp = z - w.negative_level
    if float_only:
        fw = [float(c) for c in pos]
        total = _float_sum(_float_subset_terms(fw, float(zp), n - 1))
        mag = total / (math.factorial(n - 1) * math.prod(fw))
        return VolumeValue.approx(mag * math.sqrt(float(w.l2sq)), Scale.L2NORM, w.l2sq)
    s = subset_power_sum(pos.components, zp, n - 1, chunks=chunks)
    return VolumeValue.l2(s / (math.factorial(n - 1) * pos.product), w.l2sq)


SECTION_VARIANTS = ("full", "reduced")


def central_section_volume(
    weights: WeightVector, variant: str = "full", *, fast_paths: bool = True, float_only: bool = False
) -> VolumeValue:
    """Section of ``C^n`` through the origin with normal ``w``.

    ``full`` sums over all sign vectors; ``reduced`` moves the largest
    ``|w_i|`` last (made positive) and sums over the half with last sign
    ``-1``.  When ``||w||_inf >= ||w||_1 / 2`` the section is a parallelotope
    and the magnitude is ``1 / ||w||_inf``.
    """
    if variant not in SECTION_VARIANTS:
        raise CubeSliceError(f"unknown section variant {variant!r}; expected one of {SECTION_VARIANTS}")
    w = weights
    n = w.dimension
    if fast_paths and 2 * w.linf >= w.l1:
        return VolumeValue.l2(1 / w.linf, w.l2sq)
    check_dimension(n)
    if variant == "reduced":
        w = w.max_last()
        lead = 1 / w.components[-1]
        denom_scale = Fraction(2) ** (n - 2)
    else:
        lead = Fraction(0)
        denom_scale = Fraction(2) ** (n - 1)
    last_negative = variant == "reduced"
    if float_only:
        s = _float_sign_sum([float(c) for c in w], n - 1, last_negative)
        mag = float(lead) + s / (float(denom_scale) * math.factorial(n - 1) * float(w.product))
        return VolumeValue.approx(mag * math.sqrt(float(w.l2sq)), Scale.L2NORM, w.l2sq)
    s = sign_power_sum(w.components, n - 1, last_negative=last_negative)
    mag = lead + s / (denom_scale * math.factorial(n - 1) * w.product)
    return VolumeValue.l2(mag, w.l2sq)


# ---------------------------------------------------------------------------
# applications


def eulerian_slab_volume(n: int, k: int) -> Fraction:
    """Volume of ``{x in I^n : k <= sum(x) <= k + 1}``."""
    if n < 1:
        raise CubeSliceError(f"n must be positive, got {n}")
    if not 0 <= k < n:
        raise CubeSliceError(f"k must satisfy 0 <= k < n, got k={k}, n={n}")
    ones = WeightVector((Fraction(1),) * n)
    return slab_between(ones, k, k + 1).magnitude


def identity_residual(w: Sequence, lam, p: int) -> Fraction:
    """``sum_K (-1)^|K| (lam + w . 1_K)^p`` minus its closed form.

    The closed form is 0 for ``p < n`` and ``(-1)^n n! prod(w)`` for ``p = n``.
    Zero, negative and fractional entries are all allowed.
    """
    ws = [as_rational(x) for x in w]
    n = len(ws)
    if n < 1:
        raise CubeSliceError("need at least one weight")
    if p < 0 or p > n:
        raise CubeSliceError(f"identity is stated for 0 <= p <= n, got p={p}, n={n}")
    lhs = subset_power_sum(ws, as_rational(lam), p, truncate=False)
    rhs = (-1) ** n * math.factorial(n) * math.prod(ws, start=Fraction(1)) if p == n else Fraction(0)
    return lhs - rhs
