"""Independent numerical oracles for the closed-form volumes.

None of the estimators here call into the truncated-power kernels: Monte
Carlo and grid counting test membership point by point, and the sinc
quadrature integrates the Fourier-side representation of a central slab.
``RegionSpec.exact_volume`` is the only bridge to the closed forms and exists
so reports can put both numbers side by side.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from scipy.integrate import simpson

from .errors import CubeSliceError, QuadratureError
from .geometry import (
    Cube,
    SlabQuery,
    WeightVector,
    as_rational,
    normalize_weights,
    slab_between,
    slab_volume_centered,
    slice_volume,
    SliceQuery,
)
from .probability import UniformSumDistribution, density_pieces

__all__ = [
    "RegionKind",
    "RegionSpec",
    "McEstimate",
    "QuadratureConfig",
    "SincQuadrature",
    "CheckRecord",
    "BorweinRow",
    "mc_volume",
    "grid_volume",
    "sinc_slab_integral",
    "sinc_slab_quadrature",
    "borwein_report",
    "simpson_normalization",
    "mc_check",
    "grid_check",
    "sinc_check",
    "iter_jsonl",
]

MC_CHUNK = 1 << 16


class RegionKind(str, enum.Enum):
    SLICE = "slice"
    SLAB = "slab"
    CENTERED_SLAB = "centered_slab"
    SECTION_SLAB = "section_slab"


@dataclass(frozen=True)
class RegionSpec:
    """A cube region of the form ``{x in cube : lo <= w . x <= hi}``.

    ``lo`` is ``None`` for slices.  A section-adjacent slab is the thin slab
    ``|w . x - z| <= h / 2`` whose volume divided by ``h`` tends to the
    section density as ``h -> 0``.
    """

    kind: RegionKind
    weights: tuple[Fraction, ...]
    lo: Fraction | None
    hi: Fraction
    cube: Cube = Cube.UNIT

    @classmethod
    def slice(cls, weights: Sequence, level, cube=Cube.UNIT) -> "RegionSpec":
        return cls(RegionKind.SLICE, _rationals(weights), None, as_rational(level), Cube(cube))

    @classmethod
    def slab(cls, weights: Sequence, z1, z2, cube=Cube.UNIT) -> "RegionSpec":
        z1, z2 = as_rational(z1), as_rational(z2)
        if z1 > z2:
            raise CubeSliceError(f"slab levels out of order: {z1} > {z2}")
        return cls(RegionKind.SLAB, _rationals(weights), z1, z2, Cube(cube))

    @classmethod
    def centered_slab(cls, weights: Sequence, thickness) -> "RegionSpec":
        theta = as_rational(thickness)
        if theta <= 0:
            raise CubeSliceError("slab thickness must be positive")
        return cls(RegionKind.CENTERED_SLAB, _rationals(weights), -theta / 2, theta / 2, Cube.CENTERED)

    @classmethod
    def section_slab(cls, weights: Sequence, level, width, cube=Cube.UNIT) -> "RegionSpec":
        z, h = as_rational(level), as_rational(width)
        if h <= 0:
            raise CubeSliceError("slab width must be positive")
        return cls(RegionKind.SECTION_SLAB, _rationals(weights), z - h / 2, z + h / 2, Cube(cube))

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def contains(self, point: Sequence) -> bool:
        """Exact membership test for a rational point."""
        xs = [as_rational(x) for x in point]
        bound = Fraction(1, 2) if self.cube is Cube.CENTERED else Fraction(1)
        low = -bound if self.cube is Cube.CENTERED else Fraction(0)
        if len(xs) != self.dimension or any(x < low or x > bound for x in xs):
            return False
        s = sum((w * x for w, x in zip(self.weights, xs)), Fraction(0))
        return s <= self.hi and (self.lo is None or s >= self.lo)

    def exact_volume(self) -> Fraction:
        """Closed-form volume from the geometry kernels (for comparison only)."""
        w, _ = normalize_weights(self.weights)
        if self.kind is RegionKind.CENTERED_SLAB:
            return slab_volume_centered(SlabQuery(w, 2 * self.hi)).magnitude
        if self.lo is None:
            return slice_volume(SliceQuery(w, self.hi, self.cube)).magnitude
        return slab_between(w, self.lo, self.hi, self.cube).magnitude

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "weights": [str(w) for w in self.weights], "cube": self.cube.value}
        if self.lo is not None:
            out["lo"] = str(self.lo)
        out["hi"] = str(self.hi)
        return out


def _rationals(values: Sequence) -> tuple[Fraction, ...]:
    out = tuple(as_rational(v) for v in values)
    if not out:
        raise CubeSliceError("region needs at least one weight")
    return out


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int

    def agrees(self, exact, k: float = 3.0) -> bool:
        return abs(self.mean - float(exact)) <= k * self.stderr


def mc_volume(r: RegionSpec, samples: int, seed: int) -> McEstimate:
    """Hit-or-miss estimate of the region's volume.

    Chunk ``i`` of ``MC_CHUNK`` points draws from ``SeedSequence(seed,
    spawn_key=(i,))``, so the sample set depends only on ``seed`` and can be
    generated in any order or split across workers.
    """
    if samples < 1:
        raise CubeSliceError(f"samples must be positive, got {samples}")
    w = np.array([float(x) for x in r.weights])
    lo = -math.inf if r.lo is None else float(r.lo)
    hi = float(r.hi)
    shift = 0.5 if r.cube is Cube.CENTERED else 0.0
    hits = 0
    for i, start in enumerate(range(0, samples, MC_CHUNK)):
        size = min(MC_CHUNK, samples - start)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))
        s = (rng.random((size, len(w))) - shift) @ w
        hits += int(np.count_nonzero((s >= lo) & (s <= hi)))
    mean = hits / samples
    return McEstimate(mean, math.sqrt(mean * (1.0 - mean) / samples), samples, seed)


# ---------------------------------------------------------------------------
# grid counting

MAX_GRID_DIMENSION = 4
MAX_GRID_RESOLUTION = 512


def _count_axis(s, a_minus, b_minus, m: int, resolution: int):
    """Number of ``j in [0, R)`` with ``a - s <= m (2j + 1) <= b - s`` (``m > 0``).

    ``a_minus``/``b_minus`` are ``a - s`` and ``b - s``; ``a_minus`` may be
    ``None`` for an unbounded side.
    """
    t_hi = b_minus // m
    j_hi = np.minimum((t_hi - 1) // 2, resolution - 1)
    if a_minus is None:
        j_lo = np.zeros_like(j_hi)
    else:
        t_lo = -((-a_minus) // m)
        j_lo = np.maximum(-((1 - t_lo) // 2), 0)
    return np.maximum(j_hi - j_lo + 1, 0)


def grid_volume(r: RegionSpec, resolution: int) -> Fraction:
    """Midpoint-rule cell count on an ``R^n`` grid, as a fraction of the cube.

    Cell midpoints are rational, so membership is decided in exact integer
    arithmetic.  The coordinate with a nonzero weight is counted in closed
    form per grid line, the others are enumerated.
    """
    n = r.dimension
    if n > MAX_GRID_DIMENSION:
        raise CubeSliceError(f"grid_volume supports n <= {MAX_GRID_DIMENSION}, got {n}")
    if not 1 <= resolution <= MAX_GRID_RESOLUTION:
        raise CubeSliceError(f"resolution must be in [1, {MAX_GRID_RESOLUTION}], got {resolution}")
    ws = list(r.weights)
    lo, hi = r.lo, r.hi
    if r.cube is Cube.CENTERED:
        offset = sum(ws, Fraction(0)) / 2
        lo = None if lo is None else lo + offset
        hi = hi + offset
    # midpoint coordinate y_i = (2 j_i + 1) / (2R); scale so everything is integral
    d = 1
    for v in [*ws, hi] + ([] if lo is None else [lo]):
        d = math.lcm(d, v.denominator)
    W = [int(v * d) for v in ws]
    B = int(hi * d * 2 * resolution)
    A = None if lo is None else int(lo * d * 2 * resolution)
    nonzero = [i for i, x in enumerate(W) if x != 0]
    if not nonzero:
        inside = (A is None or A <= 0) and 0 <= B
        return Fraction(1 if inside else 0)
    k = nonzero[-1]
    m = W[k]
    others = [W[i] for i in range(n) if i != k]
    big = max([abs(x) for x in W] + [abs(B)] + ([abs(A)] if A is not None else []))
    dtype = np.int64 if big * 2 * resolution * (n + 1) < 2**62 else object
    odd = np.arange(1, 2 * resolution, 2, dtype=np.int64).astype(dtype)

    def count(s):
        if m > 0:
            a_m = None if A is None else A - s
            return _count_axis(s, a_m, B - s, m, resolution)
        # negate: -B + s <= |m| (2j+1) <= -A + s
        if A is None:
            # only the lower bound survives: |m|(2j+1) >= s - B
            t_lo = -((B - s) // (-m))
            j_lo = np.maximum(-((1 - t_lo) // 2), 0)
            return np.maximum(resolution - j_lo, 0)
        return _count_axis(s, s - B, s - A, -m, resolution)

    if not others:
        return Fraction(int(count(np.zeros(1, dtype=dtype)).sum()), resolution)
    lead, tail = others[:-2], others[-2:]
    inner = np.zeros(1, dtype=dtype)
    for wi in tail:
        inner = np.add.outer(inner, wi * odd).ravel()
    total = 0
    for combo in itertools.product(range(resolution), repeat=len(lead)):
        base = sum(wi * (2 * j + 1) for wi, j in zip(lead, combo))
        total += int(count(inner + base).sum())
    return Fraction(total, resolution**n)


# ---------------------------------------------------------------------------
# sinc quadrature


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for :func:`sinc_slab_integral`.

    ``tail`` selects how the integral beyond the truncation point ``T`` is
    handled: ``"bound"`` picks ``T`` so that ``1 / (n T^n prod w) <= abs_tol/2``
    and drops the tail; ``"asymptotic"`` adds an integration-by-parts estimate
    of the tail with a rigorous remainder bound, allowing much smaller ``T``;
    ``"auto"`` uses ``"bound"`` whenever it fits in ``max_panels``.
    """

    abs_tol: float = 1e-10
    truncation: float | None = None
    max_panels: int = 4_000_000
    tail: str = "auto"
    nodes: int = 16

    def __post_init__(self) -> None:
        if not self.abs_tol > 0:
            raise CubeSliceError("abs_tol must be positive")
        if self.tail not in ("auto", "bound", "asymptotic"):
            raise CubeSliceError(f"unknown tail mode {self.tail!r}")
        if self.truncation is not None and not self.truncation > 0:
            raise CubeSliceError("truncation must be positive")


@dataclass(frozen=True)
class SincQuadrature:
    value: float
    truncation: float
    panels: int
    tail_mode: str
    tail_estimate: float
    tail_bound: float
    quadrature_error: float

    @property
    def error_bound(self) -> float:
        return 2 / math.pi * (self.tail_bound + self.quadrature_error)


def _sinc(u: np.ndarray) -> np.ndarray:
    small = np.abs(u) < 1e-4
    safe = np.where(small, 1.0, u)
    return np.where(small, 1.0 - u * u / 6.0, np.sin(safe) / safe)


def _integrand(x: np.ndarray, a: np.ndarray, theta: float) -> np.ndarray:
    out = theta * _sinc(theta * x)
    for ai in a:
        out = out * _sinc(ai * x)
    return out


def _crude_tail(a: np.ndarray, T: float) -> float:
    n = len(a)
    return math.exp(-math.log(n) - n * math.log(T) - float(np.sum(np.log(a))))


def _asymptotic_tail(a: np.ndarray, theta: float, T: float) -> tuple[float, float]:
    """Estimate and bound ``int_T^inf sin(theta x)/x prod sinc(a_i x) dx``.

    The numerator ``sin(theta x) prod sin(a_i x)`` is a combination of
    ``cos`` or ``sin`` of frequencies ``theta + s . a``; for each one the
    integral of ``exp(i lam x) / x^m`` is expanded by repeated integration by
    parts, truncated where the remainder bound is smallest.
    """
    n = len(a)
    m = n + 1
    prod_a = float(np.prod(a))
    signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    lams = theta + signs @ a
    eps = np.prod(signs, axis=1)
    if m % 2 == 0:
        coef = (-1) ** (m // 2) * 2.0 ** (1 - m)
        take_real = True
    else:
        coef = (-1) ** ((m - 1) // 2) * 2.0 ** (1 - m)
        take_real = False
    estimate = 0.0
    bound = 0.0
    for lam, e in zip(lams, eps):
        if lam == 0.0:
            if take_real:
                estimate += e * T ** (1 - m) / (m - 1)
            continue
        # choose the number of integration-by-parts steps J minimising the remainder
        J, rem = 0, T ** (1 - m) / (m - 1)
        rising = 1.0
        while J < 60:
            rising_next = rising * (m + J)
            nxt = rising_next / abs(lam) ** (J + 1) * T ** (-m - J) / (m + J)
            if nxt >= rem:
                break
            J += 1
            rising = rising_next
            rem = nxt
        total = 0j
        rising = 1.0
        for j in range(J):
            total += rising / (1j * lam) ** (j + 1) * T ** (-m - j)
            rising *= m + j
        val = -np.exp(1j * lam * T) * total
        estimate += e * (val.real if take_real else val.imag)
        bound += rem
    scale = coef / prod_a
    return scale * estimate, abs(scale) * bound


def sinc_slab_quadrature(weights, theta, cfg: QuadratureConfig | None = None) -> SincQuadrature:
    """Evaluate ``(2/pi) int_0^inf sin(theta x)/x prod sin(w_i x)/(w_i x) dx``.

    ``[0, T]`` is cut at the zeros ``k pi / theta`` of the leading factor, each
    panel is split so a piece spans at most half a period of the fastest
    oscillation, and each piece gets Gauss-Legendre.  A lower-order rule on
    the same pieces provides the error estimate; pieces are refined until it
    is within ``abs_tol / 2`` or ``max_panels`` is exhausted.
    """
    cfg = cfg or QuadratureConfig()
    a = np.array(sorted(abs(float(as_rational(w))) for w in weights))
    if len(a) == 0 or np.any(a == 0):
        raise CubeSliceError("sinc quadrature needs nonzero weights")
    th = float(as_rational(theta))
    if th <= 0:
        raise CubeSliceError("thickness must be positive")
    n = len(a)
    width = math.pi / th
    tol_raw = cfg.abs_tol * math.pi / 2  # budget for the raw integral
    fastest = th + float(a.sum())
    sub = max(1, math.ceil(fastest / th))

    mode = cfg.tail
    if cfg.truncation is not None:
        K = max(1, math.ceil(cfg.truncation / width))
        if mode == "auto":
            mode = "bound" if _crude_tail(a, K * width) <= tol_raw / 2 else "asymptotic"
    else:
        log_t = (math.log(2 / (n * tol_raw)) - float(np.sum(np.log(a)))) / n
        K_bound = max(1, math.ceil(math.exp(log_t) / width)) if log_t < 700 else None
        if mode == "auto":
            mode = "bound" if K_bound is not None and K_bound * sub <= cfg.max_panels else "asymptotic"
        if mode == "bound":
            if K_bound is None or K_bound * sub > cfg.max_panels:
                raise QuadratureError(
                    "tolerance unachievable within max_panels using the crude tail bound"
                )
            K = K_bound
        else:
            K = max(1, math.ceil((n + 2) / (th * width)))
            while True:
                _, tb = _asymptotic_tail(a, th, K * width)
                if tb <= tol_raw / 2:
                    break
                K *= 2
                if K * sub > cfg.max_panels:
                    raise QuadratureError("tolerance unachievable within max_panels")
    T = K * width
    if mode == "bound":
        tail_est, tail_bound = 0.0, _crude_tail(a, T)
    else:
        tail_est, tail_bound = _asymptotic_tail(a, th, T)
    if tail_bound > tol_raw / 2:
        raise QuadratureError(f"tail bound {tail_bound:.3g} exceeds tolerance at T={T:.6g}")

    hi_x, hi_w = np.polynomial.legendre.leggauss(cfg.nodes)
    lo_x, lo_w = np.polynomial.legendre.leggauss(max(2, cfg.nodes * 2 // 3))
    while True:
        pieces = K * sub
        if pieces > cfg.max_panels:
            raise QuadratureError("tolerance unachievable within max_panels")
        h = width / sub
        hi_parts, lo_parts = [], []
        for start in range(0, pieces, 1 << 15):
            left = (np.arange(start, min(pieces, start + (1 << 15))) * h)[:, None]
            fx = _integrand(left + (hi_x + 1) * (h / 2), a, th)
            hi_parts.append(math.fsum(fx @ hi_w * (h / 2)))
            fl = _integrand(left + (lo_x + 1) * (h / 2), a, th)
            lo_parts.append(math.fsum(fl @ lo_w * (h / 2)))
        head = math.fsum(hi_parts)
        err = abs(head - math.fsum(lo_parts))
        if err <= tol_raw / 2:
            break
        sub *= 2
    value = 2 / math.pi * float(head + tail_est)
    return SincQuadrature(value, T, K * sub, mode, float(tail_est), float(tail_bound), float(err))


def sinc_slab_integral(weights, theta, cfg: QuadratureConfig | None = None) -> float:
    """Sinc-integral value of the central slab volume, accurate to ``cfg.abs_tol``."""
    return sinc_slab_quadrature(weights, theta, cfg).value


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class CheckRecord:
    region: dict
    exact: Fraction
    estimate: float
    passed: bool
    stderr: float | None = None
    tol: float | None = None

    def to_dict(self) -> dict:
        out = {"region": self.region, "exact": str(self.exact), "estimate": float(self.estimate)}
        if self.stderr is not None:
            out["stderr"] = self.stderr
        if self.tol is not None:
            out["tol"] = self.tol
        out["pass"] = bool(self.passed)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def mc_check(r: RegionSpec, samples: int, seed: int, k: float = 3.0) -> CheckRecord:
    exact = r.exact_volume()
    est = mc_volume(r, samples, seed)
    return CheckRecord(r.describe(), exact, est.mean, est.agrees(exact, k), stderr=est.stderr)


def grid_check(r: RegionSpec, resolution: int) -> CheckRecord:
    exact = r.exact_volume()
    est = grid_volume(r, resolution)
    tol = 2 / resolution
    return CheckRecord(r.describe(), exact, float(est), abs(est - exact) <= Fraction(2, resolution), tol=tol)


def sinc_check(weights: Sequence, theta, cfg: QuadratureConfig | None = None) -> CheckRecord:
    cfg = cfg or QuadratureConfig()
    w = WeightVector.of(weights)
    exact = slab_volume_centered(SlabQuery(w, theta)).magnitude
    est = sinc_slab_integral(w, theta, cfg)
    region = RegionSpec.centered_slab(w.components, theta).describe()
    return CheckRecord(region, exact, est, abs(est - float(exact)) <= cfg.abs_tol, tol=cfg.abs_tol)


@dataclass(frozen=True)
class BorweinRow:
    primes: tuple[int, ...]
    exact: Fraction
    estimate: float
    discrepancy: float
    tol: float
    passed: bool
    first_below_one: bool

    def to_dict(self) -> dict:
        return {
            "region": {"kind": "centered_slab", "weights": [f"1/{p}" for p in self.primes], "thickness": "1"},
            "primes": list(self.primes),
            "exact": str(self.exact),
            "estimate": float(self.estimate),
            "discrepancy": float(self.discrepancy),
            "tol": self.tol,
            "first_below_one": bool(self.first_below_one),
            "pass": bool(self.passed),
        }


def borwein_report(max_prime: int, cfg: QuadratureConfig | None = None) -> list[BorweinRow]:
    """Central slabs with weights ``1/3, 1/5, ..., 1/p`` and thickness 1.

    One row per prefix of odd primes up to ``max_prime``: exact volume,
    quadrature value and their difference.  The first prefix whose volume
    falls below 1 is flagged.
    """
    from sympy import primerange

    if max_prime < 3:
        raise CubeSliceError(f"max_prime must be at least 3, got {max_prime}")
    cfg = cfg or QuadratureConfig(abs_tol=1e-13)
    primes = list(primerange(3, max_prime + 1))
    rows = []
    flagged = False
    for i in range(1, len(primes) + 1):
        prefix = tuple(int(p) for p in primes[:i])
        w = WeightVector(tuple(Fraction(1, p) for p in prefix))
        exact = slab_volume_centered(SlabQuery(w, 1)).magnitude
        est = sinc_slab_integral(w, 1, cfg)
        disc = est - float(exact)
        first = not flagged and exact < 1
        flagged = flagged or first
        rows.append(BorweinRow(prefix, exact, est, disc, cfg.abs_tol, abs(disc) <= cfg.abs_tol, first))
    return rows


def _horner(coeffs: Sequence[Fraction], z: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def simpson_normalization(
    d: UniformSumDistribution, per_piece: int = 16, rtol: float = 1e-13, max_per_piece: int = 1 << 14
) -> float:
    """Composite Simpson integral of the exact density over its support.

    The density is a polynomial between consecutive vertex levels, so the rule
    is applied piece by piece to exact values of that polynomial (its own
    endpoint values, so breakpoint conventions play no part).  Each piece
    doubles its subinterval count until two successive Simpson values agree
    to ``rtol`` relative to the total mass.
    """
    pieces = []
    for a, b, coeffs in density_pieces(d):
        m = per_piece
        prev = None
        while True:
            zs = [a + (b - a) * Fraction(j, 2 * m) for j in range(2 * m + 1)]
            est = float(simpson([float(_horner(coeffs, z)) for z in zs], x=[float(z) for z in zs]))
            if prev is not None and (abs(est - prev) <= rtol or m >= max_per_piece):
                break
            prev, m = est, 2 * m
        pieces.append(est)
    return math.fsum(pieces)


def iter_jsonl(records) -> Iterator[str]:
    for rec in records:
        yield json.dumps(rec.to_dict())
