"""
Orthonormal 2-D Haar transforms and MAD-based wavelet shrinkage.

Every 2x2 block [[a, b], [c, d]] maps to

    LL = (a + b + c + d) / 2    LH = (a + b - c - d) / 2
    HL = (a - b + c - d) / 2    HH = (a - b - c + d) / 2

so the transform preserves the sum of squares at every level.
"""

import logging
import math

import numpy as np

from src.config import MAD_SCALE
from src.exceptions import DimensionError, ValidationError
from src.models import BlockStack, CoeffPlane, ScanKind, ShrinkMode, SubbandQuad

logger = logging.getLogger(__name__)


def _analysis(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One Haar step over the last two axes."""
    a = x[..., 0::2, 0::2]
    b = x[..., 0::2, 1::2]
    c = x[..., 1::2, 0::2]
    d = x[..., 1::2, 1::2]
    ll = (a + b + c + d) / 2.0
    lh = (a + b - c - d) / 2.0
    hl = (a - b + c - d) / 2.0
    hh = (a - b - c + d) / 2.0
    return ll, lh, hl, hh


def _synthesis(ll: np.ndarray, lh: np.ndarray, hl: np.ndarray, hh: np.ndarray) -> np.ndarray:
    """Inverse of _analysis over the last two axes."""
    rows, cols = ll.shape[-2:]
    out = np.empty(ll.shape[:-2] + (2 * rows, 2 * cols), dtype=np.float64)
    out[..., 0::2, 0::2] = (ll + lh + hl + hh) / 2.0
    out[..., 0::2, 1::2] = (ll + lh - hl - hh) / 2.0
    out[..., 1::2, 0::2] = (ll - lh + hl - hh) / 2.0
    out[..., 1::2, 1::2] = (ll - lh - hl + hh) / 2.0
    return out


def _as_plane(plane: CoeffPlane) -> np.ndarray:
    values = np.asarray(plane, dtype=np.float64)
    if values.ndim != 2 or values.size == 0:
        raise DimensionError(f"Expected a non-empty 2-D plane, got shape {values.shape}")
    return values


def haar_forward(plane: CoeffPlane) -> SubbandQuad:
    """
    Apply one level of the 2-D Haar transform.

    Args:
        plane: Plane with even width and height

    Returns:
        SubbandQuad with half-size LL, LH, HL and HH planes

    Raises:
        DimensionError: If a dimension is odd
    """
    values = _as_plane(plane)
    if values.shape[0] % 2 or values.shape[1] % 2:
        raise DimensionError(f"Haar step needs even dimensions, got {values.shape}")
    return SubbandQuad(*_analysis(values))


def haar_inverse(quad: SubbandQuad) -> CoeffPlane:
    """Invert one Haar level."""
    return _synthesis(quad.ll, quad.lh, quad.hl, quad.hh)


def pyramid_decompose(plane: CoeffPlane, levels: int) -> list[SubbandQuad]:
    """
    Decompose recursively on the LL band.

    Args:
        plane: Input plane
        levels: Number of levels, at least 1

    Returns:
        One SubbandQuad per level, finest first. Only the last quad's LL is
        needed for reconstruction.

    Raises:
        DimensionError: If 2**levels does not divide both dimensions
    """
    values = _as_plane(plane)
    if levels < 1:
        raise ValidationError(f"Pyramid needs at least one level, got {levels}")
    factor = 2**levels
    if values.shape[0] % factor or values.shape[1] % factor:
        raise DimensionError(
            f"{levels} levels need dimensions divisible by {factor}, got {values.shape}"
        )

    quads = []
    current = values
    for _ in range(levels):
        quad = haar_forward(current)
        quads.append(quad)
        current = quad.ll
    return quads


def pyramid_reconstruct(quads: list[SubbandQuad]) -> CoeffPlane:
    """Invert pyramid_decompose, reading the approximation from the deepest quad."""
    if not quads:
        raise ValidationError("Pyramid reconstruction needs at least one level")
    current = quads[-1].ll
    for quad in reversed(quads):
        current = haar_inverse(SubbandQuad(current, quad.lh, quad.hl, quad.hh))
    return current


def packet_decompose(plane: CoeffPlane, depth: int) -> BlockStack:
    """
    Build the full uniform wavelet-packet tree.

    Every subband is split again at each level. The result is a
    2**depth x 2**depth arrangement of subbands in row-raster order; a
    subband at grid cell (r, c) splits into (2r, 2c) LL, (2r, 2c+1) LH,
    (2r+1, 2c) HL and (2r+1, 2c+1) HH.

    Args:
        plane: Input plane
        depth: Number of packet levels, 0 returns the plane as a single block

    Returns:
        Row-raster BlockStack of 4**depth subbands

    Raises:
        DimensionError: If 2**depth does not divide both dimensions
    """
    values = _as_plane(plane)
    if depth < 0:
        raise ValidationError(f"Packet depth cannot be negative, got {depth}")
    factor = 2**depth
    if values.shape[0] % factor or values.shape[1] % factor:
        raise DimensionError(
            f"Depth {depth} needs dimensions divisible by {factor}, got {values.shape}"
        )

    blocks = values[np.newaxis, :, :]
    side = 1
    for _ in range(depth):
        ll, lh, hl, hh = _analysis(blocks)
        rows, cols = ll.shape[-2:]
        grid = np.empty((side, side, 2, 2, rows, cols), dtype=np.float64)
        grid[:, :, 0, 0] = ll.reshape(side, side, rows, cols)
        grid[:, :, 0, 1] = lh.reshape(side, side, rows, cols)
        grid[:, :, 1, 0] = hl.reshape(side, side, rows, cols)
        grid[:, :, 1, 1] = hh.reshape(side, side, rows, cols)
        side *= 2
        blocks = grid.transpose(0, 2, 1, 3, 4, 5).reshape(side * side, rows, cols)

    return BlockStack(blocks, side, side, ScanKind.RASTER)


def packet_reconstruct(stack: BlockStack, depth: int) -> CoeffPlane:
    """
    Invert packet_decompose.

    Args:
        stack: Row-raster stack of 4**depth subbands
        depth: Packet depth used to build the stack

    Returns:
        Reconstructed plane

    Raises:
        DimensionError: If the block count or order does not match depth
    """
    side = 2**depth
    if stack.n != side * side or stack.grid_rows != side or stack.grid_cols != side:
        raise DimensionError(f"Depth {depth} needs {side * side} blocks on a {side}x{side} grid")
    if stack.scan is not ScanKind.RASTER:
        raise DimensionError("Packet stack must be in row-raster order to reconstruct")

    blocks = np.asarray(stack.blocks)
    for _ in range(depth):
        rows, cols = blocks.shape[-2:]
        half = side // 2
        grid = blocks.reshape(half, 2, half, 2, rows, cols).transpose(0, 2, 1, 3, 4, 5)
        ll = grid[:, :, 0, 0].reshape(-1, rows, cols)
        lh = grid[:, :, 0, 1].reshape(-1, rows, cols)
        hl = grid[:, :, 1, 0].reshape(-1, rows, cols)
        hh = grid[:, :, 1, 1].reshape(-1, rows, cols)
        blocks = _synthesis(ll, lh, hl, hh)
        side = half
    return blocks[0].copy()


def mad_sigma(coeffs: CoeffPlane) -> float:
    """
    Estimate the noise standard deviation as median(|c|) / 0.6745.

    Raises:
        ValidationError: If the plane is empty
    """
    values = np.asarray(coeffs, dtype=np.float64)
    if values.size == 0:
        raise ValidationError("Cannot estimate sigma of an empty plane")
    return float(np.median(np.abs(values))) / MAD_SCALE


def universal_threshold(sigma: float, n: int) -> float:
    """Universal threshold sigma * sqrt(2 ln n)."""
    if n < 1:
        raise ValidationError(f"Threshold needs at least one coefficient, got n={n}")
    if sigma < 0:
        raise ValidationError(f"Sigma cannot be negative, got {sigma}")
    return sigma * math.sqrt(2.0 * math.log(n))


def shrink(plane: CoeffPlane, lam: float, mode: ShrinkMode) -> CoeffPlane:
    """
    Threshold coefficients.

    Hard: zero where |x| <= lam, keep otherwise. Soft: zero where
    |x| <= lam, otherwise move toward zero by lam keeping the sign.

    Args:
        plane: Coefficients
        lam: Threshold, non-negative
        mode: Shrinkage rule; NONE returns a copy

    Returns:
        Thresholded coefficients
    """
    if lam < 0:
        raise ValidationError(f"Threshold cannot be negative, got {lam}")
    values = np.asarray(plane, dtype=np.float64)
    if mode is ShrinkMode.HARD:
        return np.where(np.abs(values) <= lam, 0.0, values)
    if mode is ShrinkMode.SOFT:
        return np.sign(values) * np.maximum(np.abs(values) - lam, 0.0)
    return values.copy()


def _denoise(plane: np.ndarray, mode: ShrinkMode) -> np.ndarray:
    sigma = mad_sigma(plane)
    lam = universal_threshold(sigma, plane.size)
    logger.debug(f"Shrinking {plane.shape} subband: sigma={sigma:.4f} lambda={lam:.4f}")
    return shrink(plane, lam, mode)


def denoise_quad(quad: SubbandQuad, mode: ShrinkMode) -> SubbandQuad:
    """
    Shrink the three detail subbands, each with its own universal threshold.

    The LL band passes through untouched.
    """
    if mode is ShrinkMode.NONE:
        return quad
    lh, hl, hh = (_denoise(plane, mode) for plane in quad.details)
    return SubbandQuad(quad.ll, lh, hl, hh)


def sparsity_bound(n: int) -> float:
    """
    Relative excess energy, log2(n)**1.5 / sqrt(n), below which n coefficients count as noise.

    A subband whose mean square stays under sigma**2 * (1 + sparsity_bound(n))
    holds too little signal to tell apart from noise of level sigma.
    """
    if n < 1:
        raise ValidationError(f"Sparsity bound needs at least one coefficient, got n={n}")
    return math.log2(n) ** 1.5 / math.sqrt(n)


def denoise_packets(stack: BlockStack, mode: ShrinkMode) -> BlockStack:
    """
    Shrink the noise-dominated detail subbands of a packet stack once.

    The noise level is the MAD estimate of the all-highpass subband, which
    sits in the last grid cell. Every detail subband whose mean square
    is within that level's sparsity bound is shrunk with the universal
    threshold for its size; subbands carrying more energy hold signal and
    pass through, as does the all-lowpass subband at grid cell (0, 0).

    Raises:
        DimensionError: If the stack is not in row-raster order
    """
    if stack.scan is not ScanKind.RASTER:
        raise DimensionError("Packet shrinkage expects a row-raster stack")
    if mode is ShrinkMode.NONE or stack.n == 1:
        return stack

    blocks = np.array(stack.blocks, copy=True)
    size = int(blocks[0].size)
    sigma = mad_sigma(blocks[-1])
    lam = universal_threshold(sigma, size)
    ceiling = sigma * sigma * (1.0 + sparsity_bound(size))

    shrunk = 0
    for index in range(1, stack.n):
        if float(np.mean(blocks[index] ** 2)) <= ceiling:
            blocks[index] = shrink(blocks[index], lam, mode)
            shrunk += 1
    logger.debug(
        f"Shrunk {shrunk} of {stack.n - 1} detail packets: sigma={sigma:.4f} lambda={lam:.4f}"
    )
    return stack.with_blocks(blocks)
