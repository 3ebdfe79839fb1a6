"""Exact volumes of slices, slabs and sections of the unit hypercube."""

from .combinatorics import eulerian, eulerian_explicit
from .errors import CubeSliceError
from .geometry import (
    Cube,
    SectionQuery,
    SlabQuery,
    SliceQuery,
    VolumeValue,
    WeightVector,
    central_section_volume,
    eulerian_slab_volume,
    identity_residual,
    normalize_weights,
    section_volume,
    slab_between,
    slab_volume_centered,
    slice_volume,
)
from .polynomial import MultiPoly, integrate_poly_section, integrate_poly_slice
from .probability import BetaProductDensity, UniformSumDistribution, cdf, pdf, quantile

__version__ = "0.1.0"

__all__ = [
    "BetaProductDensity",
    "CubeSliceError",
    "Cube",
    "MultiPoly",
    "SectionQuery",
    "SlabQuery",
    "SliceQuery",
    "UniformSumDistribution",
    "VolumeValue",
    "WeightVector",
    "cdf",
    "central_section_volume",
    "eulerian",
    "eulerian_explicit",
    "eulerian_slab_volume",
    "identity_residual",
    "integrate_poly_section",
    "integrate_poly_slice",
    "normalize_weights",
    "pdf",
    "quantile",
    "section_volume",
    "slab_between",
    "slab_volume_centered",
    "slice_volume",
]
