"""Formatting helpers for console output."""

import math
from typing import Optional


def format_db(value: Optional[float]) -> str:
    """PSNR in dB; identical images show as 'inf'."""
    if value is None:
        return "n/a"
    if math.isinf(value):
        return "inf"
    return f"{value:.2f} dB"


def format_float(value: Optional[float], decimals: int = 4) -> str:
    if value is None:
        return "n/a"
    return f"{value:.{decimals}f}"


def format_grid(dims) -> str:
    return " x ".join(str(d) for d in dims)
