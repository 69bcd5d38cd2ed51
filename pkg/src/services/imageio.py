"""Binary PGM reading and writing, noise injection, and spatial tiling."""

import logging

import numpy as np

from src.config import MAX_PIXEL, PGM_MAGIC
from src.exceptions import DimensionError, ImageFormatError, ValidationError
from src.models import BlockStack, Image, NoiseKind, NoiseSpec, ScanKind

logger = logging.getLogger(__name__)

_WHITESPACE = b" \t\r\n\v\f"


def _read_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """
    Read one whitespace-delimited header token, skipping '#' comments.

    Returns:
        Tuple of (token, position after the token)
    """
    size = len(data)
    while pos < size:
        if data[pos] in _WHITESPACE:
            pos += 1
        elif data[pos] == ord("#"):
            end = data.find(b"\n", pos)
            pos = size if end < 0 else end + 1
        else:
            break
    start = pos
    while pos < size and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
        pos += 1
    if start == pos:
        raise ImageFormatError("Truncated PGM header")
    return data[start:pos], pos


def load_pgm(data: bytes) -> Image:
    """
    Parse a binary (P5) PGM.

    Args:
        data: File contents

    Returns:
        Decoded Image

    Raises:
        ImageFormatError: If the header is malformed, maxval exceeds 255,
            the variant is not P5, or the payload is truncated
    """
    if len(data) < 2:
        raise ImageFormatError("Not a PGM file: too short")
    magic = data[:2]
    if magic != PGM_MAGIC:
        if magic in (b"P2", b"P1", b"P3", b"P4", b"P6"):
            raise ImageFormatError(f"Unsupported PGM variant {magic.decode()}, only P5 is read")
        raise ImageFormatError("Not a PGM file: bad magic")

    pos = 2
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _read_token(data, pos)
        try:
            value = int(token)
        except ValueError as e:
            raise ImageFormatError(f"Invalid PGM {name}: {token!r}") from e
        if value < 1:
            raise ImageFormatError(f"PGM {name} must be positive, got {value}")
        fields.append(value)
    width, height, maxval = fields

    if maxval > MAX_PIXEL:
        raise ImageFormatError(f"Only 8-bit PGM is supported, maxval is {maxval}")
    # Exactly one whitespace byte separates the header from the raster.
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise ImageFormatError("Truncated PGM header")
    pos += 1

    expected = width * height
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise ImageFormatError(
            f"Truncated PGM payload: expected {expected} bytes, got {len(payload)}"
        )

    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    if maxval < MAX_PIXEL and int(pixels.max()) > maxval:
        raise ImageFormatError(f"Pixel value exceeds declared maxval {maxval}")
    return Image(pixels)


def save_pgm(img: Image) -> bytes:
    """Serialize an image as binary PGM with maxval 255."""
    header = f"P5\n{img.width} {img.height}\n{MAX_PIXEL}\n".encode("ascii")
    return header + img.pixels.tobytes()


def add_salt_pepper(img: Image, spec: NoiseSpec) -> Image:
    """
    Corrupt pixels with salt-and-pepper noise.

    Each pixel is independently hit with probability ``spec.density``; a hit
    pixel becomes 0 or 255 with equal probability. The generator is numpy's
    PCG64 seeded with ``spec.seed``, so equal seeds give equal images.

    Args:
        img: Clean image
        spec: Noise parameters

    Returns:
        Noisy image

    Raises:
        ValidationError: If the noise kind is not salt-and-pepper
    """
    if spec.kind is not NoiseKind.SALT_PEPPER:
        raise ValidationError(f"Unsupported noise kind: {spec.kind}")

    rng = np.random.default_rng(spec.seed)
    hit = rng.random(img.pixels.shape) < spec.density
    salt = rng.random(img.pixels.shape) < 0.5

    noisy = img.pixels.copy()
    noisy[hit & salt] = MAX_PIXEL
    noisy[hit & ~salt] = 0
    logger.debug(f"Salt-and-pepper corrupted {int(hit.sum())} of {hit.size} pixels")
    return Image(noisy)


def tile(img: Image | np.ndarray, block: int) -> BlockStack:
    """
    Cut an image into square blocks in row-raster tile order.

    Args:
        img: Image, or a 2-D array of pixel or coefficient values
        block: Block side in pixels

    Returns:
        BlockStack of (height/block) x (width/block) blocks

    Raises:
        DimensionError: If block does not divide both dimensions
    """
    plane = np.asarray(img.pixels if isinstance(img, Image) else img, dtype=np.float64)
    height, width = plane.shape
    if block < 1 or height % block or width % block:
        raise DimensionError(f"Block {block} does not divide image size {width}x{height}")

    rows, cols = height // block, width // block
    blocks = plane.reshape(rows, block, cols, block).swapaxes(1, 2).reshape(-1, block, block)
    return BlockStack(blocks, rows, cols, ScanKind.RASTER)


def untile_plane(stack: BlockStack) -> np.ndarray:
    """Reassemble a row-raster stack into one real-valued plane."""
    if stack.scan is not ScanKind.RASTER:
        raise DimensionError("Stack must be in row-raster order to reassemble")
    bh, bw = stack.block_shape
    grid = stack.blocks.reshape(stack.grid_rows, stack.grid_cols, bh, bw)
    return grid.swapaxes(1, 2).reshape(stack.grid_rows * bh, stack.grid_cols * bw)


def untile(stack: BlockStack, width: int, height: int) -> Image:
    """
    Reassemble blocks into an image.

    Args:
        stack: Row-raster stack of pixel blocks
        width: Target width
        height: Target height

    Returns:
        Reassembled Image

    Raises:
        DimensionError: If the stack geometry does not cover width x height
    """
    plane = untile_plane(stack)
    if plane.shape != (height, width):
        raise DimensionError(
            f"Stack covers {plane.shape[1]}x{plane.shape[0]}, not {width}x{height}"
        )
    return Image(np.clip(np.rint(plane), 0, MAX_PIXEL).astype(np.uint8))
