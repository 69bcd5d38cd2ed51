"""Row-raster and Morton (Z-order) orderings of sub-block grids."""

import logging

import numpy as np

from src.exceptions import DimensionError
from src.models import BlockStack, ScanKind

logger = logging.getLogger(__name__)


def _part1by1(n: int) -> int:
    """Spread the low 16 bits of n to the even bit positions."""
    n &= 0x0000FFFF
    n = (n | (n << 8)) & 0x00FF00FF
    n = (n | (n << 4)) & 0x0F0F0F0F
    n = (n | (n << 2)) & 0x33333333
    n = (n | (n << 1)) & 0x55555555
    return n


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def raster_index(row: int, col: int, grid_cols: int, grid_rows: int | None = None) -> int:
    """
    Position of a grid cell in left-to-right, top-to-bottom order.

    Args:
        row: Cell row
        col: Cell column
        grid_cols: Grid width in cells
        grid_rows: Grid height in cells; a square grid when omitted

    Raises:
        DimensionError: If the cell lies outside the grid
    """
    rows = grid_cols if grid_rows is None else grid_rows
    if grid_cols < 1 or rows < 1 or not (0 <= row < rows and 0 <= col < grid_cols):
        raise DimensionError(f"Cell ({row}, {col}) is outside a {rows}x{grid_cols} grid")
    return row * grid_cols + col


def morton_index(row: int, col: int, side: int | None = None) -> int:
    """
    Position of a grid cell along the Morton curve.

    Column bits go to even positions and row bits to odd positions, so each
    quad is visited NW, NE, SW, SE.

    Args:
        row: Cell row
        col: Cell column
        side: Grid side; when given it must be a power of two containing the cell

    Raises:
        DimensionError: If the grid is not a power of two or the cell is outside it
    """
    if side is not None:
        if not _is_power_of_two(side):
            raise DimensionError(f"Morton order needs a power-of-two grid, got side {side}")
        if not (0 <= row < side and 0 <= col < side):
            raise DimensionError(f"Cell ({row}, {col}) is outside a {side}x{side} grid")
    if row < 0 or col < 0 or row > 0xFFFF or col > 0xFFFF:
        raise DimensionError(f"Cell ({row}, {col}) is out of range")
    return _part1by1(col) | (_part1by1(row) << 1)


def scan_permutation(grid_rows: int, grid_cols: int, kind: ScanKind) -> np.ndarray:
    """
    Raster indices listed in scan order.

    ``perm[k]`` is the raster index of the k-th block visited by the scan.

    Raises:
        DimensionError: If the grid is not square power-of-two for Morton order
    """
    count = grid_rows * grid_cols
    if kind is ScanKind.RASTER:
        return np.arange(count)
    if grid_rows != grid_cols or not _is_power_of_two(grid_rows):
        raise DimensionError(
            f"Morton order needs a square power-of-two grid, got {grid_rows}x{grid_cols}"
        )
    perm = np.empty(count, dtype=np.int64)
    for row in range(grid_rows):
        for col in range(grid_cols):
            perm[morton_index(row, col, grid_rows)] = raster_index(row, col, grid_cols, grid_rows)
    return perm


def order_stack(stack: BlockStack, kind: ScanKind) -> BlockStack:
    """
    Reorder a row-raster stack into scan order.

    Raises:
        DimensionError: If the stack is not in row-raster order or the grid
            does not support the scan
    """
    if stack.scan is not ScanKind.RASTER:
        raise DimensionError(f"Stack is already in {stack.scan.value} order")
    perm = scan_permutation(stack.grid_rows, stack.grid_cols, kind)
    return stack.with_blocks(stack.blocks[perm], kind)


def unorder_stack(stack: BlockStack, kind: ScanKind) -> BlockStack:
    """
    Return a scan-ordered stack to row-raster order.

    Raises:
        DimensionError: If the stack is not in ``kind`` order
    """
    if stack.scan is not kind:
        raise DimensionError(f"Stack is in {stack.scan.value} order, not {kind.value}")
    perm = scan_permutation(stack.grid_rows, stack.grid_cols, kind)
    blocks = np.empty_like(stack.blocks)
    blocks[perm] = stack.blocks
    return stack.with_blocks(blocks, ScanKind.RASTER)
