"""Exception hierarchy shared by the library and the command-line front end."""

from __future__ import annotations


class CubeSliceError(ValueError):
    """Base class for every validation failure raised by the package.

    ``code`` is a stable machine-readable identifier used by the CLI.
    """

    code = "invalid_parameter"


class DimensionCapError(CubeSliceError):
    code = "dimension_cap"


class DegenerateNormalError(CubeSliceError):
    code = "degenerate_normal"


class DimensionMismatchError(CubeSliceError):
    code = "dimension_mismatch"


class OrderingError(CubeSliceError):
    code = "level_ordering"


class QuadratureError(CubeSliceError):
    """Requested quadrature tolerance cannot be reached within the panel budget."""

    code = "tolerance_unachievable"
