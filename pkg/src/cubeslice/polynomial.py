"""Sparse multivariate polynomials over the rationals and their exact integrals.

Integration over a cube slice follows the signed simplicial decomposition:
for every ``K`` the integrand is pulled back by ``x = A x' + 1_K`` and
integrated over the corner simplex ``{x' >= 0, |w| . x' <= z - w . 1_K}``
with the closed-form monomial moments.  Differentiating each term in ``z``
gives the section integral.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from ._config import check_dimension
from .combinatorics import gray_steps
from .errors import CubeSliceError, DimensionMismatchError
from .geometry import (
    Cube,
    SectionQuery,
    SliceQuery,
    VolumeValue,
    WeightVector,
    as_rational,
    truncated_power,
)

__all__ = [
    "Monomial",
    "MultiPoly",
    "compose_affine",
    "integrate_monomial_simplex",
    "integrate_poly_slice",
    "integrate_poly_section",
    "integrate_via_expansion",
    "MAX_INTEGRATION_DEGREE",
    "MAX_INTEGRATION_DIMENSION",
]

MAX_INTEGRATION_DEGREE = 40
MAX_INTEGRATION_DIMENSION = 20

Monomial = tuple[int, ...]


class MultiPoly:
    """Polynomial in ``dim`` variables stored as ``{exponents: coefficient}``.

    Zero coefficients are never stored.  Instances are treated as immutable.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Mapping[Sequence[int], object] | None = None):
        if dim < 1:
            raise CubeSliceError(f"polynomial dimension must be positive, got {dim}")
        self.dim = dim
        clean: dict[Monomial, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != dim:
                raise DimensionMismatchError(
                    f"exponent vector {exps} does not have length {dim}"
                )
            if any(e < 0 for e in exps):
                raise CubeSliceError(f"negative exponent in {exps}")
            c = clean.get(exps, Fraction(0)) + as_rational(coeff)
            if c:
                clean[exps] = c
            else:
                clean.pop(exps, None)
        self.terms = clean

    # construction helpers

    @classmethod
    def constant(cls, dim: int, value=1) -> "MultiPoly":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def variable(cls, dim: int, i: int) -> "MultiPoly":
        exps = [0] * dim
        exps[i] = 1
        return cls(dim, {tuple(exps): 1})

    @classmethod
    def monomial(cls, exponents: Sequence[int], coeff=1) -> "MultiPoly":
        return cls(len(exponents), {tuple(exponents): coeff})

    # ring operations

    def _check(self, other: "MultiPoly") -> None:
        if not isinstance(other, MultiPoly):
            raise TypeError(f"expected MultiPoly, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionMismatchError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return MultiPoly(self.dim, out)

    def __neg__(self) -> "MultiPoly":
        return self.scale(-1)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        self._check(other)
        out: dict[Monomial, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return MultiPoly(self.dim, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        out = MultiPoly.constant(self.dim)
        for _ in range(k):
            out = out * self
        return out

    def scale(self, factor) -> "MultiPoly":
        factor = as_rational(factor)
        if factor == 0:
            return MultiPoly(self.dim)
        return MultiPoly(self.dim, {e: c * factor for e, c in self.terms.items()})

    def evaluate(self, point: Sequence) -> Fraction:
        if len(point) != self.dim:
            raise DimensionMismatchError(f"point has {len(point)} coordinates, expected {self.dim}")
        xs = [as_rational(x) for x in point]
        return sum(
            (c * math.prod((x**a for x, a in zip(xs, e)), start=Fraction(1)) for e, c in self.terms.items()),
            Fraction(0),
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiPoly) and self.dim == other.dim and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.dim, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return f"MultiPoly({self.dim}, 0)"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(e) if a)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return f"MultiPoly({self.dim}, {' + '.join(parts)})"

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    # serialization

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "terms": [
                {"exponents": list(e), "coeff": str(c)} for e, c in sorted(self.terms.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "MultiPoly":
        try:
            dim = int(data["dim"])
            terms: dict[Monomial, Fraction] = {}
            for t in data["terms"]:
                e = tuple(int(x) for x in t["exponents"])
                terms[e] = terms.get(e, Fraction(0)) + as_rational(t["coeff"])
        except (KeyError, TypeError) as exc:
            raise CubeSliceError(f"malformed polynomial JSON: {exc}") from None
        return cls(dim, terms)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MultiPoly":
        return cls.from_dict(json.loads(text))


@lru_cache(maxsize=4096)
def _binomial_row(power: int, sign: int, shift: Fraction) -> tuple[Fraction, ...]:
    """Coefficients of ``(sign * x + shift)^power`` by ascending degree."""
    return tuple(
        math.comb(power, j) * sign**j * shift ** (power - j) for j in range(power + 1)
    )


def compose_affine(f: MultiPoly, signs: Sequence[int], shift: Sequence) -> MultiPoly:
    """Expand ``g(x) = f(A x + t)`` with ``A = diag(signs)``.

    ``shift`` is usually a 0/1 vector but any rationals are accepted.
    """
    if len(signs) != f.dim or len(shift) != f.dim:
        raise DimensionMismatchError("signs and shift must match the polynomial dimension")
    if any(s not in (-1, 1) for s in signs):
        raise CubeSliceError(f"signs must be +1 or -1, got {signs}")
    ts = [as_rational(t) for t in shift]
    out: dict[Monomial, Fraction] = {}
    for exps, coeff in f.terms.items():
        partial: dict[Monomial, Fraction] = {(): coeff}
        for a, s, t in zip(exps, signs, ts):
            row = _binomial_row(a, s, t)
            partial = {
                e + (j,): c * r for e, c in partial.items() for j, r in enumerate(row) if r
            }
        for e, c in partial.items():
            out[e] = out.get(e, Fraction(0)) + c
    return MultiPoly(f.dim, out)


def _positive_weights(w) -> tuple[Fraction, ...]:
    ws = tuple(as_rational(x) for x in w)
    if any(x <= 0 for x in ws):
        raise CubeSliceError("simplex integration requires all weights to be positive")
    return ws


def integrate_monomial_simplex(w, c, alpha: Sequence[int]) -> Fraction:
    """Integral of ``prod x_i^alpha_i`` over ``{x >= 0, w . x <= c}`` (``w > 0``)."""
    ws = _positive_weights(w)
    if len(alpha) != len(ws):
        raise DimensionMismatchError("exponent vector and weights differ in length")
    n, deg = len(ws), sum(alpha)
    num = truncated_power(c, n + deg) * math.prod(math.factorial(a) for a in alpha)
    return num / (math.factorial(n + deg) * math.prod((x ** (a + 1) for x, a in zip(ws, alpha)), start=Fraction(1)))


def _poly_mul_trunc(p: list[Fraction], q: Sequence[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _moment_rows(f: MultiPoly, w: WeightVector):
    """Per-monomial, per-variable degree generating rows for shift 0 and shift 1.

    For variable ``i`` with exponent ``a``, sign ``s`` and shift ``k`` the row
    holds ``C(a, j) s^j k^(a-j) j! / |w_i|^(j+1)`` at index ``j``: the simplex
    moment weights of the expanded ``(s x + k)^a``.
    """
    absw = [abs(c) for c in w]
    signs = [1 if c > 0 else -1 for c in w]
    rows = []
    for exps, coeff in f.terms.items():
        per_var = []
        for a, s, aw in zip(exps, signs, absw):
            pair = []
            for k in (0, 1):
                row = _binomial_row(a, s, Fraction(k))
                pair.append([r * math.factorial(j) / aw ** (j + 1) for j, r in enumerate(row)])
            per_var.append(pair)
        rows.append((coeff, per_var))
    return rows


def _guard(f: MultiPoly, w: WeightVector, max_degree: int, max_dim: int) -> None:
    if f.dim != w.dimension:
        raise DimensionMismatchError(f"polynomial has {f.dim} variables, weights have {w.dimension}")
    if f.dim > max_dim:
        raise CubeSliceError(f"integration supports n <= {max_dim}, got {f.dim}")
    check_dimension(f.dim)
    if f.degree > max_degree:
        raise CubeSliceError(f"integration supports total degree <= {max_degree}, got {f.degree}")


def _to_unit(f: MultiPoly, q):
    if q.cube is Cube.UNIT:
        return f, q
    return compose_affine(f, [1] * f.dim, [Fraction(-1, 2)] * f.dim), q.on_unit_cube()


def _signed_simplex_sum(f: MultiPoly, w: WeightVector, z: Fraction, order: int) -> Fraction:
    """``sum_K (-1)^(|K|+|N|) d^order/dz^order  int_simplex f(A x' + 1_K)``, order 0 or 1."""
    n = w.dimension
    rows = _moment_rows(f, w)
    parity_n = len(w.neg_set) & 1
    fact = [math.factorial(m) for m in range(n + f.degree + 1)]
    total = Fraction(0)
    s = Fraction(0)
    size = 0
    for mask, bit in gray_steps(n):
        if bit >= 0:
            if mask >> bit & 1:
                s += w[bit]
                size += 1
            else:
                s -= w[bit]
                size -= 1
        c = z - s
        if c <= 0:
            continue
        term = Fraction(0)
        for coeff, per_var in rows:
            gen = [coeff]
            for i, pair in enumerate(per_var):
                gen = _poly_mul_trunc(gen, pair[mask >> i & 1])
            for d, g in enumerate(gen):
                if g:
                    m = n + d - order
                    term += g * c**m / fact[m]
        total += -term if (size + parity_n) & 1 else term
    return total


def integrate_poly_slice(
    f: MultiPoly,
    q: SliceQuery,
    *,
    max_degree: int = MAX_INTEGRATION_DEGREE,
    max_dim: int = MAX_INTEGRATION_DIMENSION,
) -> Fraction:
    """Exact integral of ``f`` over ``{x in cube : w . x <= z}``."""
    _guard(f, q.weights, max_degree, max_dim)
    f, q = _to_unit(f, q)
    if f.is_zero():
        return Fraction(0)
    return _signed_simplex_sum(f, q.weights, q.level, 0)


def integrate_poly_section(
    f: MultiPoly,
    q: SectionQuery,
    *,
    max_degree: int = MAX_INTEGRATION_DEGREE,
    max_dim: int = MAX_INTEGRATION_DIMENSION,
) -> VolumeValue:
    """Integral of ``f`` over the section ``{w . x = z}`` as ``r * ||w||_2``.

    The rational part ``r`` is the exact ``z``-derivative of the slice
    integral.  At a level where some ``z - w . 1_K`` vanishes, the vanishing
    term contributes nothing, matching ``truncated_power(0, 0) == 0``.
    """
    _guard(f, q.weights, max_degree, max_dim)
    f, q = _to_unit(f, q)
    if f.is_zero():
        return VolumeValue.l2(Fraction(0), q.weights.l2sq)
    return VolumeValue.l2(_signed_simplex_sum(f, q.weights, q.level, 1), q.weights.l2sq)


def integrate_via_expansion(f: MultiPoly, q: SliceQuery) -> Fraction:
    """Reference route: expand ``f(A x' + 1_K)`` and sum monomial simplex integrals.

    Slower than :func:`integrate_poly_slice`; kept for cross-checking.
    """
    _guard(f, q.weights, MAX_INTEGRATION_DEGREE, MAX_INTEGRATION_DIMENSION)
    f, q = _to_unit(f, q)
    w = q.weights
    n = w.dimension
    signs = [1 if c > 0 else -1 for c in w]
    absw = [abs(c) for c in w]
    total = Fraction(0)
    for mask, _ in gray_steps(n):
        ind = [mask >> i & 1 for i in range(n)]
        c = q.level - sum((w[i] for i in range(n) if ind[i]), Fraction(0))
        if c <= 0:
            continue
        g = compose_affine(f, signs, ind)
        part = sum(
            (coeff * integrate_monomial_simplex(absw, c, e) for e, coeff in g.terms.items()),
            Fraction(0),
        )
        total += -part if (sum(ind) + len(w.neg_set)) & 1 else part
    return total
