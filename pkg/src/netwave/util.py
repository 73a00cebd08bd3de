"""Small shared helpers: stable numeric formatting for file outputs."""

from __future__ import annotations

import math


def fmt9(x: float) -> str:
    """Format a number with 9 significant digits.

    Every numeric value written to CSV/JSON goes through this so that
    repeated runs (and minor dependency bumps) produce byte-identical
    files. Infinities come out as 'inf'/'-inf'.
    """
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".9g")


def round9(x: float) -> float:
    """Round to 9 significant digits (for values embedded in JSON)."""
    x = float(x)
    if not math.isfinite(x):
        return x
    return float(format(x, ".9g"))
