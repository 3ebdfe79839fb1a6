from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeslice.errors import CubeSliceError, DimensionMismatchError
from cubeslice.geometry import SectionQuery, SliceQuery, WeightVector, section_volume, slice_volume
from cubeslice.polynomial import (
    MultiPoly,
    compose_affine,
    integrate_monomial_simplex,
    integrate_poly_section,
    integrate_poly_slice,
    integrate_via_expansion,
)

from oracles import square_poly_integral, square_poly_section
from strategies import rationals, weight_lists

F = Fraction


def x(dim, i):
    return MultiPoly.variable(dim, i)


def polys(dim: int, max_terms: int = 4, max_exp: int = 3):
    term = st.tuples(st.tuples(*[st.integers(0, max_exp)] * dim), rationals(-5, 5, 4))
    return st.lists(term, max_size=max_terms).map(
        lambda ts: sum((MultiPoly.monomial(e, c) for e, c in ts), MultiPoly(dim))
    )


def q_slice(ws, z, cube="unit"):
    return SliceQuery(WeightVector.of(ws), z, cube)


# -- arithmetic -----------------------------------------------------------------


def test_product_of_sum_and_difference():
    x1, x2 = x(2, 0), x(2, 1)
    assert (x1 + x2) * (x1 - x2) == x1 * x1 - x2 * x2


def test_evaluate_and_scale():
    f = x(2, 0) * x(2, 1)
    assert f.evaluate((2, 3)) == 6
    z = f.scale(0)
    assert z.is_zero() and z.terms == {}
    assert (f * 3).evaluate((1, 1)) == 3 and (2 * f).evaluate((1, 1)) == 2


def test_power_and_degree():
    f = (x(2, 0) + MultiPoly.constant(2)) ** 3
    assert f.degree == 3 and f.evaluate((1, 0)) == 8
    assert MultiPoly(2).degree == 0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        x(2, 0) + x(3, 0)
    with pytest.raises(DimensionMismatchError):
        MultiPoly(2, {(1,): 1})
    with pytest.raises(CubeSliceError):
        MultiPoly(1, {(-1,): 1})


@given(polys(3))
def test_json_round_trip(f):
    assert MultiPoly.from_json(f.to_json()) == f
    assert MultiPoly.from_dict(f.to_dict()) == f


def test_from_dict_malformed():
    with pytest.raises(CubeSliceError):
        MultiPoly.from_dict({"terms": []})


@given(polys(2), polys(2), st.tuples(rationals(), rationals()))
def test_ring_operations_agree_with_evaluation(f, g, pt):
    assert (f * g).evaluate(pt) == f.evaluate(pt) * g.evaluate(pt)
    assert (f - g).evaluate(pt) == f.evaluate(pt) - g.evaluate(pt)


# -- affine composition ---------------------------------------------------------


def test_compose_examples():
    assert compose_affine(x(1, 0), [-1], [1]) == MultiPoly.constant(1) - x(1, 0)
    sq = compose_affine(x(1, 0) ** 2, [1], [1])
    assert sq == x(1, 0) ** 2 + x(1, 0) * 2 + MultiPoly.constant(1)
    g = compose_affine(x(2, 0) * x(2, 1), [-1, 1], [1, 0])
    assert g == x(2, 1) - x(2, 0) * x(2, 1)


@given(polys(3), st.tuples(*[st.sampled_from([-1, 1])] * 3), st.tuples(*[rationals()] * 3), st.tuples(*[rationals()] * 3))
def test_compose_matches_substitution(f, signs, shift, pt):
    g = compose_affine(f, signs, shift)
    assert g.evaluate(pt) == f.evaluate([s * p + t for s, p, t in zip(signs, pt, shift)])


# -- simplex and slice integrals ------------------------------------------------


def test_simplex_examples():
    assert integrate_monomial_simplex([1], 1, [1]) == F(1, 2)
    assert integrate_monomial_simplex([1, 1], 1, [1, 1]) == F(1, 24)
    assert integrate_monomial_simplex([1, 2, 3], -1, [0, 1, 2]) == 0
    with pytest.raises(CubeSliceError):
        integrate_monomial_simplex([1, -1], 1, [0, 0])


def test_simplex_matches_iterated_integral():
    # int_0^1 int_0^{1-x} x y dy dx, done by hand: int_0^1 x (1-x)^2 / 2 dx
    assert integrate_monomial_simplex([1, 1], 1, [1, 1]) == F(1, 2) * (F(1, 2) - F(2, 3) + F(1, 4))


def test_slice_integral_examples():
    f = x(2, 0) * x(2, 1)
    assert integrate_poly_slice(f, q_slice([1, 1], 2)) == F(1, 4)
    assert integrate_poly_slice(f, q_slice([1, 1], 1)) == F(1, 24)


@given(st.lists(st.integers(0, 5), min_size=1, max_size=5))
def test_full_cube_moments(alpha):
    n = len(alpha)
    f = MultiPoly.monomial(alpha)
    expected = math.prod((F(1, a + 1) for a in alpha), start=F(1))
    assert integrate_poly_slice(f, q_slice([1] * n, n)) == expected
    assert integrate_poly_slice(f, q_slice([F(1, 3)] * n, 5 * n)) == expected


@given(weight_lists(1, 5), rationals(-8, 8))
def test_constant_integrand_is_slice_volume(ws, z):
    q = q_slice(ws, z)
    assert integrate_poly_slice(MultiPoly.constant(len(ws)), q) == slice_volume(q).magnitude


@settings(max_examples=30)
@given(polys(2, max_terms=3), rationals(nonzero=True), rationals(nonzero=True), rationals(-12, 12))
def test_slice_integral_matches_symbolic_oracle(f, w1, w2, z):
    assert integrate_poly_slice(f, q_slice([w1, w2], z)) == square_poly_integral(f, w1, w2, z)


@given(polys(3, max_terms=3, max_exp=2), weight_lists(3, 3), rationals(-8, 8))
def test_factorized_route_matches_expansion(f, ws, z):
    q = q_slice(ws, z)
    assert integrate_poly_slice(f, q) == integrate_via_expansion(f, q)


@given(polys(3, max_terms=3), polys(3, max_terms=3), rationals(), rationals(), weight_lists(3, 3), rationals(-8, 8))
def test_linearity(f, g, a, b, ws, z):
    q = q_slice(ws, z)
    lhs = integrate_poly_slice(f * a + g * b, q)
    assert lhs == a * integrate_poly_slice(f, q) + b * integrate_poly_slice(g, q)


@given(polys(3, max_terms=3), weight_lists(3, 3), rationals(-8, 8))
def test_complementary_slices_cover_the_cube(f, ws, z):
    w = WeightVector.of(ws)
    full = integrate_poly_slice(f, SliceQuery(w, w.positive_level))
    below = integrate_poly_slice(f, SliceQuery(w, z))
    above = integrate_poly_slice(f, SliceQuery(w.negated(), -z))
    assert below + above == full


def test_centered_cube_integral():
    # x1^2 over C^2 is 1/12; x1 x2 is even under x -> -x, which swaps the two
    # halves {x1 + x2 <= 0} and {x1 + x2 >= 0}, and integrates to 0 overall
    f = x(2, 0) ** 2
    assert integrate_poly_slice(f, q_slice([1, 1], 5, "centered")) == F(1, 12)
    g = x(2, 0) * x(2, 1)
    assert integrate_poly_slice(g, q_slice([1, 1], 5, "centered")) == 0
    assert integrate_poly_slice(g, q_slice([1, 1], 0, "centered")) == 0
    # x1 over {x1 + x2 <= 0}: int_{-1/2}^{1/2} x (1/2 - x) dx = -1/12
    assert integrate_poly_slice(x(2, 0), q_slice([1, 1], 0, "centered")) == F(-1, 12)


def test_integration_guards():
    with pytest.raises(DimensionMismatchError):
        integrate_poly_slice(x(2, 0), q_slice([1, 1, 1], 1))
    with pytest.raises(CubeSliceError):
        integrate_poly_slice(x(1, 0) ** 41, q_slice([1], 1))


# -- section integrals ----------------------------------------------------------


def test_section_integral_examples():
    v = integrate_poly_section(x(2, 0), SectionQuery(WeightVector.of([1, 1]), 1))
    assert v.magnitude == F(1, 2) and v.value == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    v = integrate_poly_section(x(1, 0), SectionQuery(WeightVector.of([1]), F(1, 2)))
    assert v.magnitude == F(1, 2) and v.value == 0.5


@given(weight_lists(1, 6), rationals(-8, 8))
def test_constant_section_integral_is_section_volume(ws, z):
    q = SectionQuery(WeightVector.of(ws), z)
    assert integrate_poly_section(MultiPoly.constant(len(ws)), q).magnitude == section_volume(q).magnitude


@settings(max_examples=30)
@given(polys(2, max_terms=3), rationals(nonzero=True), rationals(nonzero=True), rationals(-12, 12))
def test_section_integral_matches_chord_oracle(f, w1, w2, z):
    got = integrate_poly_section(f, SectionQuery(WeightVector.of([w1, w2]), z)).magnitude
    assert got == square_poly_section(f, w1, w2, z)


@given(polys(3, max_terms=3), weight_lists(3, 3, positive=True), st.floats(0.05, 0.95))
def test_section_integral_is_slice_derivative(f, ws, t):
    w = WeightVector.of(ws)
    z = F(t).limit_denominator(500) * w.l1
    sec = integrate_poly_section(f, SectionQuery(w, z)).magnitude
    h = F(1, 10**6)
    fd = (integrate_poly_slice(f, SliceQuery(w, z + h)) - integrate_poly_slice(f, SliceQuery(w, z))) / h
    assert float(fd) == pytest.approx(float(sec), rel=1e-4, abs=1e-5)
