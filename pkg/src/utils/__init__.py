"""Utility functions and helpers."""

from src.utils.helpers import format_ratio, format_size, format_time, round_half_away

__all__ = [
    "format_ratio",
    "format_size",
    "format_time",
    "round_half_away",
]
