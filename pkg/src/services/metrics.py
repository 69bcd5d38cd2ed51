"""Fidelity metrics and comparison reports."""

import csv
import io
import logging
import math
from typing import Sequence

import numpy as np

from src.config import MAX_PIXEL, REPORT_DECIMALS
from src.exceptions import DimensionError, ValidationError
from src.models import Image, MetricsRow
from src.utils.helpers import format_ratio

logger = logging.getLogger(__name__)

CSV_HEADER = ("technique", "cr", "mse", "psnr")
TABLE_HEADER = ("Technique", "CR", "MSE", "PSNR")


def mse(a: Image, b: Image) -> float:
    """
    Mean squared error between two images of equal size.

    Raises:
        DimensionError: If the sizes differ
    """
    if a.pixels.shape != b.pixels.shape:
        raise DimensionError(
            f"Cannot compare {a.width}x{a.height} with {b.width}x{b.height}"
        )
    diff = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(m: float) -> float:
    """
    Peak signal-to-noise ratio in dB, 10 log10(255^2 / m).

    Returns:
        PSNR, or math.inf when m is zero

    Raises:
        ValidationError: If m is negative
    """
    if m < 0:
        raise ValidationError(f"MSE cannot be negative, got {m}")
    if m == 0:
        return math.inf
    return 10.0 * math.log10(MAX_PIXEL**2 / m)


def _cells(row: MetricsRow) -> list[str]:
    return [
        row.technique,
        format_ratio(row.cr, REPORT_DECIMALS),
        format_ratio(row.mse, REPORT_DECIMALS),
        format_ratio(row.psnr, REPORT_DECIMALS),
    ]


def build_report(rows: Sequence[MetricsRow]) -> tuple[str, str]:
    """
    Render rows as an aligned text table and as CSV.

    Args:
        rows: Report rows, already in the order they should appear

    Returns:
        Tuple of (table text, CSV text); both end with a newline
    """
    cells = [_cells(row) for row in rows]
    widths = [len(h) for h in TABLE_HEADER]
    for line in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, line)]

    def render(line: Sequence[str]) -> str:
        first = line[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(line[1:], widths[1:])]
        return "  ".join([first] + rest).rstrip()

    table = "\n".join([render(TABLE_HEADER)] + [render(line) for line in cells]) + "\n"

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(cells)
    return table, buffer.getvalue()
