from __future__ import annotations

import os

from .errors import DimensionCapError

ENV_MAX_DIMENSION = "CUBESLICE_MAX_DIM"
DEFAULT_MAX_DIMENSION = 30


def max_dimension() -> int:
    """Cap on n for exhaustive 2^n enumeration, overridable via the environment."""
    raw = os.environ.get(ENV_MAX_DIMENSION)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_DIMENSION
    try:
        value = int(raw)
    except ValueError:
        raise DimensionCapError(f"{ENV_MAX_DIMENSION} must be an integer, got {raw!r}") from None
    if value < 1:
        raise DimensionCapError(f"{ENV_MAX_DIMENSION} must be positive, got {value}")
    return value


def check_dimension(n: int, cap: int | None = None) -> None:
    limit = max_dimension() if cap is None else cap
    if n > limit:
        raise DimensionCapError(
            f"dimension too large for exhaustive enumeration: n={n} exceeds cap {limit}"
        )
