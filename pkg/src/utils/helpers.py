"""Helper utility functions."""

import math
from datetime import timedelta

import humanize
import numpy as np


def round_half_away(values: np.ndarray | float) -> np.ndarray:
    """
    Round to the nearest integer, halves away from zero.

    Args:
        values: Scalar or array

    Returns:
        Float array of rounded values (e.g. 2.5 -> 3, -0.5 -> -1)
    """
    array = np.asarray(values, dtype=np.float64)
    return np.sign(array) * np.floor(np.abs(array) + 0.5)


def format_size(bytes_size: float) -> str:
    """
    Format bytes into human-readable size.

    Args:
        bytes_size: Size in bytes

    Returns:
        Formatted string (e.g., "262.1 kB")
    """
    return humanize.naturalsize(bytes_size)


def format_time(seconds: float) -> str:
    """
    Format a wall-clock duration.

    Args:
        seconds: Time in seconds

    Returns:
        Formatted string (e.g., "1 second and 250.00 milliseconds")
    """
    if seconds < 0 or not math.isfinite(seconds):
        return "unknown"
    return humanize.precisedelta(
        timedelta(seconds=seconds), minimum_unit="milliseconds", format="%0.2f"
    )


def format_ratio(value: float, decimals: int = 4) -> str:
    """Format a ratio or metric with fixed decimals, rendering infinity as 'inf'."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{decimals}f}"
