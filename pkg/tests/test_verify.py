from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cubeslice.errors import CubeSliceError, QuadratureError
from cubeslice.geometry import SlabQuery, WeightVector, slab_volume_centered
from cubeslice.probability import UniformSumDistribution
from cubeslice.verify import (
    MC_CHUNK,
    QuadratureConfig,
    RegionSpec,
    borwein_report,
    grid_check,
    grid_volume,
    iter_jsonl,
    mc_check,
    mc_volume,
    simpson_normalization,
    sinc_check,
    sinc_slab_integral,
    sinc_slab_quadrature,
)

from strategies import rationals, weight_lists

F = Fraction
BORWEIN_29 = 1 - F(54084649) ** 9 / (181440 * F(3234846615) ** 8)
PRIMES_TO_23 = [3, 5, 7, 11, 13, 17, 19, 23]


# -- regions --------------------------------------------------------------------


def test_region_membership_is_exact():
    r = RegionSpec.slice([1, 1], 1)
    assert r.contains([F(1, 2), F(1, 2)])
    assert not r.contains([F(1, 2), F(1, 2) + F(1, 10**30)])
    assert not r.contains([F(-1, 10), 0])
    c = RegionSpec.centered_slab([1, 1], 1)
    assert c.contains([F(1, 2), 0]) and not c.contains([F(1, 2), F(1, 100)])
    s = RegionSpec.section_slab([1, 2], 1, F(1, 10))
    assert s.lo == F(19, 20) and s.hi == F(21, 20)


def test_region_validation():
    with pytest.raises(CubeSliceError):
        RegionSpec.slab([1], 2, 1)
    with pytest.raises(CubeSliceError):
        RegionSpec.centered_slab([1], 0)
    with pytest.raises(CubeSliceError):
        RegionSpec.slice([], 0)


# -- Monte Carlo ------------------------------------------------------------------


def test_mc_half_square():
    est = mc_volume(RegionSpec.slice([1, 1], 1), 10**6, 11)
    assert est.agrees(F(1, 2))
    assert est.stderr == pytest.approx(math.sqrt(est.mean * (1 - est.mean) / 10**6))


def test_mc_below_support_has_no_hits():
    est = mc_volume(RegionSpec.slice([1, 2], -1), 10**5, 5)
    assert est.mean == 0 and est.stderr == 0


def test_mc_eulerian_slab():
    est = mc_volume(RegionSpec.slab([1, 1, 1], 1, 2), 10**6, 3)
    assert est.agrees(F(2, 3))


def test_mc_deterministic_and_partition_independent():
    r = RegionSpec.slab([1, -2, F(1, 3)], F(-1, 2), F(1, 2))
    a = mc_volume(r, 2 * MC_CHUNK + 17, 99)
    assert a == mc_volume(r, 2 * MC_CHUNK + 17, 99)
    # the first chunks are the same draws whatever the total sample count
    first = mc_volume(r, MC_CHUNK, 99).mean * MC_CHUNK
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(99, spawn_key=(1,))))
    s = rng.random((MC_CHUNK, 3)) @ np.array([1.0, -2.0, 1 / 3])
    second = np.count_nonzero((s >= -0.5) & (s <= 0.5))
    assert round(mc_volume(r, 2 * MC_CHUNK, 99).mean * 2 * MC_CHUNK) == round(first) + second


def test_mc_rejects_no_samples():
    with pytest.raises(CubeSliceError):
        mc_volume(RegionSpec.slice([1], 0), 0, 1)


# -- grid counting ----------------------------------------------------------------


def test_grid_examples():
    half = grid_volume(RegionSpec.slice([1, 1], 1), 256)
    assert abs(half - F(1, 2)) <= F(1, 128)
    assert grid_volume(RegionSpec.slab([1, 1, 1], -1, 4), 7) == 1
    assert grid_volume(RegionSpec.slab([1, 2, 3, 4], 0, 10), 9) == 1
    assert abs(grid_volume(RegionSpec.slice([1, 2, 3], 2), 128) - F(7, 36)) <= F(3, 128)


def test_grid_guards():
    with pytest.raises(CubeSliceError):
        grid_volume(RegionSpec.slice([1] * 5, 1), 8)
    with pytest.raises(CubeSliceError):
        grid_volume(RegionSpec.slice([1], 1), 513)


def _brute_grid(r: RegionSpec, R: int) -> Fraction:
    import itertools

    if r.cube.value == "centered":
        mids = [F(2 * j + 1, 2 * R) - F(1, 2) for j in range(R)]
    else:
        mids = [F(2 * j + 1, 2 * R) for j in range(R)]
    hits = sum(r.contains(p) for p in itertools.product(mids, repeat=r.dimension))
    return F(hits, R ** r.dimension)


@settings(max_examples=40)
@given(
    st.lists(rationals(nonzero=True), min_size=1, max_size=3),
    rationals(-6, 6),
    rationals(0, 4),
    st.sampled_from(["unit", "centered"]),
    st.integers(1, 9),
)
def test_grid_count_matches_brute_force(ws, lo, width, cube, R):
    r = RegionSpec.slab(ws, lo, lo + width, cube)
    assert grid_volume(r, R) == _brute_grid(r, R)
    s = RegionSpec.slice(ws, lo, cube)
    assert grid_volume(s, R) == _brute_grid(s, R)


@pytest.mark.parametrize(
    "ws,z",
    [([1, F(3, 2), F(5, 7)], F(6, 5)), ([1, 2, 3], 2), ([1, 1], F(1, 3)), ([F(2, 3), -1, F(5, 4)], F(1, 8))],
)
def test_grid_error_is_first_order(ws, z):
    # midpoint errors on polytopes fluctuate, but R * error stays bounded, so
    # the error envelope halves with every doubling of the resolution
    r = RegionSpec.slice(ws, z)
    exact = r.exact_volume()
    scaled = [abs(float(grid_volume(r, R) - exact)) * R for R in (8, 16, 32, 64, 128, 256, 512)]
    assert max(scaled) <= 1
    assert max(scaled[3:]) <= 2 * max(scaled[:3]) + 1e-3


# -- sinc quadrature --------------------------------------------------------------


def test_sinc_single_factor():
    assert sinc_slab_integral([1], 1) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(QuadratureError):
        sinc_slab_quadrature([1], 1, QuadratureConfig(abs_tol=1e-10, tail="bound"))


def test_sinc_prime_reciprocals():
    cfg = QuadratureConfig(abs_tol=1e-13)
    assert sinc_slab_integral([F(1, p) for p in PRIMES_TO_23], 1, cfg) == pytest.approx(1.0, abs=1e-13)
    v = sinc_slab_integral([F(1, p) for p in PRIMES_TO_23 + [29]], 1, cfg)
    assert v == pytest.approx(float(BORWEIN_29), abs=1e-13)
    assert abs(v - 1) > 1e-12


@pytest.mark.parametrize("tail", ["bound", "asymptotic"])
def test_sinc_tail_modes(tail):
    ws, theta = [F(1, 2), 2, F(3, 4)], F(7, 5)
    exact = slab_volume_centered(SlabQuery(WeightVector.of(ws), theta)).magnitude
    res = sinc_slab_quadrature(ws, theta, QuadratureConfig(abs_tol=1e-10, tail=tail))
    assert res.tail_mode == tail
    assert abs(res.value - float(exact)) <= 1e-10
    assert res.error_bound <= 1e-10


def test_sinc_bound_mode_truncation_meets_tail_bound():
    ws = [F(1, 3), 2, 5]
    tol = 1e-9
    res = sinc_slab_quadrature(ws, 1, QuadratureConfig(abs_tol=tol, tail="bound"))
    n, T = len(ws), res.truncation
    crude = 1 / (n * T**n * math.prod(float(w) for w in ws))
    assert crude * 2 / math.pi <= tol / 2
    assert res.tail_estimate == 0.0


def test_sinc_max_panels_guard():
    with pytest.raises(QuadratureError):
        sinc_slab_quadrature([1, 1], 1, QuadratureConfig(abs_tol=1e-12, max_panels=4))


@settings(max_examples=15)
@given(weight_lists(1, 5, positive=True), st.builds(F, st.integers(1, 40), st.integers(1, 4)))
def test_sinc_matches_exact_slab(ws, theta):
    rec = sinc_check(ws, theta, QuadratureConfig(abs_tol=1e-9))
    assert rec.passed, rec.to_dict()


def test_quadrature_config_validation():
    with pytest.raises(CubeSliceError):
        QuadratureConfig(abs_tol=0)
    with pytest.raises(CubeSliceError):
        QuadratureConfig(tail="guess")


# -- reports ----------------------------------------------------------------------


def test_borwein_report_rows():
    rows = borwein_report(3)
    assert len(rows) == 1 and rows[0].exact == 1 and rows[0].passed
    rows = borwein_report(29)
    assert [r.exact for r in rows[:-1]] == [1] * 8
    assert rows[-1].exact == BORWEIN_29 and rows[-1].first_below_one
    assert all(r.passed for r in rows)
    assert sum(r.first_below_one for r in rows) == 1
    with pytest.raises(CubeSliceError):
        borwein_report(2)


def test_check_records_json_lines():
    recs = [
        mc_check(RegionSpec.slice([1, 1], 1), 10**4, 1),
        grid_check(RegionSpec.centered_slab([1, 2], 1), 64),
        sinc_check([1, 2], F(1, 2)),
    ]
    lines = list(iter_jsonl(recs))
    for line, key in zip(lines, ["stderr", "tol", "tol"]):
        obj = json.loads(line)
        assert set(obj) == {"region", "exact", "estimate", key, "pass"}
        assert obj["pass"] is True


def test_simpson_normalization_irwin_hall():
    d = UniformSumDistribution.canonical([1] * 8)
    assert simpson_normalization(d) == pytest.approx(1.0, abs=1e-12)


def test_mc_seeded_trials_within_three_sigma():
    ws = [F(3, 2), -2, F(1, 3), 5, F(-7, 4), 1, F(2, 9), -3, F(5, 6), 4]
    r = RegionSpec.slab(ws, 0, F(5, 2))
    exact = r.exact_volume()
    assert F(1, 10) < exact < F(9, 10)
    hits = sum(mc_volume(r, 10**6, seed).agrees(exact) for seed in range(100))
    assert hits >= 99
