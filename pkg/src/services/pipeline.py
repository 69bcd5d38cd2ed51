"""End-to-end compression and decompression for the seven techniques."""

import logging
import math
from typing import Optional

import numpy as np

from src.config import MAX_PIXEL
from src.exceptions import ContainerError, DimensionError, ValidationError
from src.models import (
    BlockStack,
    CodecConfig,
    CompressedArtifact,
    EnergyReport,
    Image,
    ScanKind,
    ShrinkMode,
    SubbandQuad,
    Technique,
)
from src.services import klt
from src.services.container import serialize
from src.services.entropy import entropy_decode, entropy_encode
from src.services.imageio import add_salt_pepper, tile, untile_plane
from src.services.quantizer import dequantize, plane_spec, quantize
from src.services.scan import order_stack, unorder_stack
from src.services.wavelet import (
    denoise_packets,
    denoise_quad,
    packet_decompose,
    packet_reconstruct,
    pyramid_decompose,
    pyramid_reconstruct,
)
from src.utils.helpers import round_half_away

logger = logging.getLogger(__name__)


def kept_for(n: int, target_cr: float) -> int:
    """
    Channels kept for a target compression ratio, max(1, floor(n / target_cr)).

    Raises:
        ValidationError: If target_cr exceeds the channel count
    """
    if target_cr > n:
        raise ValidationError(f"Target CR {target_cr} exceeds the {n} available channels")
    return max(1, math.floor(n / target_cr))


def packet_depth(width: int, height: int, block: int) -> int:
    """
    Packet depth whose subbands are ``block`` pixels wide.

    Raises:
        DimensionError: If the image is not a power-of-two multiple of block on both axes
    """
    if block < 1 or width % block or height % block:
        raise DimensionError(f"Block {block} does not divide image size {width}x{height}")
    side = width // block
    if height // block != side or side & (side - 1):
        raise DimensionError(
            f"Packet subbands of {block} need a square power-of-two grid, got "
            f"{width // block}x{height // block}"
        )
    return side.bit_length() - 1


def _pyramid_planes(quads: list[SubbandQuad]) -> list[np.ndarray]:
    """Coarsest LL first, then details from the coarsest level to the finest."""
    planes = [quads[-1].ll]
    for quad in reversed(quads):
        planes.extend(quad.details)
    return planes


def build_stack(
    plane: np.ndarray,
    block: int,
    scan: ScanKind,
    packets: bool,
    shrink: ShrinkMode = ShrinkMode.NONE,
) -> tuple[BlockStack, int]:
    """
    Turn an image plane into a scan-ordered stack of sub-blocks.

    Args:
        plane: Image plane as floats
        block: Sub-block side in pixels
        scan: Order the stack is returned in
        packets: Use Haar packet subbands (shrunk with ``shrink``) instead of spatial tiles
        shrink: Shrinkage for the packet details

    Returns:
        Tuple of (stack, packet depth); depth is 0 for spatial tiles
    """
    height, width = plane.shape
    if packets:
        depth = packet_depth(width, height, block)
        stack = denoise_packets(packet_decompose(plane, depth), shrink)
    else:
        depth = 0
        stack = tile(plane, block)
    return order_stack(stack, scan), depth


def _kept_channels(energy: EnergyReport, n: int, cfg: CodecConfig) -> int:
    if cfg.energy is not None:
        return energy.channels_for(cfg.energy) or 1
    return kept_for(n, cfg.target_cr)


def compress(img: Image, cfg: CodecConfig) -> CompressedArtifact:
    """
    Compress an image with one of the seven techniques.

    Args:
        img: Input image
        cfg: Technique and parameters; ``cfg.noise`` corrupts the input first

    Returns:
        CompressedArtifact, identical for identical inputs

    Raises:
        DimensionError: If the geometry does not fit the technique
        ValidationError: If the target CR cannot be met by the KLT
    """
    artifact, _ = encode(img, cfg)
    return artifact


def encode(img: Image, cfg: CodecConfig) -> tuple[CompressedArtifact, Optional[EnergyReport]]:
    """
    Compress an image and keep the eigen-energy of the full KLT fit.

    Args:
        img: Input image
        cfg: Technique and parameters; ``cfg.noise`` corrupts the input first

    Returns:
        Tuple of (artifact, energy report of all n channels); the report is
        None for techniques without a KLT
    """
    source = add_salt_pepper(img, cfg.noise) if cfg.noise is not None else img
    plane = source.pixels.astype(np.float64)
    technique = cfg.technique
    model = None
    energy = None
    depth = 0
    levels = 0
    block = cfg.block

    if technique is Technique.HAAR:
        levels = cfg.levels
        block = 0
        quads = [denoise_quad(q, cfg.shrink) for q in pyramid_decompose(plane, levels)]
        planes = _pyramid_planes(quads)
    else:
        stack, depth = build_stack(
            plane, cfg.block, technique.scan, technique.uses_packets, cfg.shrink
        )
        if technique.uses_klt:
            fitted = klt.fit(stack)
            energy = klt.energy_report(fitted)
            kept = _kept_channels(energy, fitted.n, cfg)
            model = klt.compact(klt.prune(fitted, kept))
            planes = list(klt.forward(stack, model).blocks[:kept])
        else:
            planes = list(stack.blocks)

    quant = tuple(plane_spec(p, cfg.bits) for p in planes)
    symbols = np.concatenate([quantize(p, q).ravel() for p, q in zip(planes, quant)])
    stream = entropy_encode(symbols)

    artifact = CompressedArtifact(
        technique=technique,
        width=img.width,
        height=img.height,
        block=block,
        depth=depth,
        levels=levels,
        shrink=cfg.shrink,
        bits=cfg.bits,
        quant=quant,
        stream=stream,
        symbol_count=int(symbols.size),
        klt=model,
    )
    logger.info(
        f"Compressed {img.width}x{img.height} with {technique.label}: "
        f"{len(planes)} planes, {stream.bit_count} payload bits"
        + (f", kept {model.kept}/{model.n} channels" if model is not None else "")
    )
    return artifact, energy


def _plane_shapes(artifact: CompressedArtifact) -> list[tuple[int, int]]:
    """Shapes of the quantized planes in stream order."""
    width, height = artifact.width, artifact.height
    if artifact.technique is Technique.HAAR:
        factor = 2**artifact.levels
        if artifact.levels < 1 or width % factor or height % factor:
            raise ContainerError(f"Invalid pyramid levels {artifact.levels} for {width}x{height}")
        shapes = [(height // factor, width // factor)]
        for level in range(artifact.levels, 0, -1):
            shapes.extend([(height // 2**level, width // 2**level)] * 3)
        return shapes

    block_shape, grid = _block_geometry(artifact)
    count = artifact.klt.kept if artifact.klt is not None else grid[0] * grid[1]
    return [block_shape] * count


def _block_geometry(artifact: CompressedArtifact) -> tuple[tuple[int, int], tuple[int, int]]:
    """Block shape and grid (rows, cols) of a stacked technique."""
    width, height = artifact.width, artifact.height
    if artifact.technique.uses_packets:
        side = 2**artifact.depth
        if width % side or height % side:
            raise ContainerError(f"Invalid packet depth {artifact.depth} for {width}x{height}")
        return (height // side, width // side), (side, side)
    block = artifact.block
    if block < 1 or width % block or height % block:
        raise ContainerError(f"Invalid block {block} for {width}x{height}")
    return (block, block), (height // block, width // block)


def decompress(artifact: CompressedArtifact) -> Image:
    """
    Decode an artifact back to an 8-bit image.

    Runs entropy decoding, dequantization, zero-filling of pruned channels,
    inverse KLT, inverse scan and inverse transform, then clamps to [0, 255]
    and rounds half away from zero.

    Raises:
        ContainerError: If the artifact does not describe a consistent stream
    """
    shapes = _plane_shapes(artifact)
    if len(shapes) != len(artifact.quant):
        raise ContainerError(
            f"Expected {len(shapes)} quantizer entries, found {len(artifact.quant)}"
        )
    count = sum(r * c for r, c in shapes)
    if count != artifact.symbol_count:
        raise ContainerError(f"Expected {count} symbols, header says {artifact.symbol_count}")

    stream = artifact.stream
    symbols = entropy_decode(stream.payload, stream.code_lengths, count, stream.bit_count)
    planes = []
    start = 0
    for shape, spec in zip(shapes, artifact.quant):
        size = shape[0] * shape[1]
        planes.append(dequantize(symbols[start : start + size].reshape(shape), spec))
        start += size

    technique = artifact.technique
    if technique is Technique.HAAR:
        quads = []
        for level in range(artifact.levels):
            base = 1 + 3 * (artifact.levels - 1 - level)
            lh, hl, hh = planes[base : base + 3]
            ll = planes[0] if level == artifact.levels - 1 else np.zeros_like(lh)
            quads.append(SubbandQuad(ll, lh, hl, hh))
        plane = pyramid_reconstruct(quads)
    else:
        block_shape, (rows, cols) = _block_geometry(artifact)
        if artifact.klt is not None:
            model = artifact.klt
            if model.n != rows * cols:
                raise ContainerError(f"KLT covers {model.n} channels, grid has {rows * cols}")
            channels = np.zeros((model.n,) + block_shape, dtype=np.float64)
            channels[: model.kept] = planes
            stack = BlockStack(channels, rows, cols, technique.scan)
            stack = klt.inverse(klt.zero_pruned(stack, model.kept), model)
        else:
            stack = BlockStack(np.stack(planes), rows, cols, technique.scan)
        stack = unorder_stack(stack, technique.scan)
        if technique.uses_packets:
            plane = packet_reconstruct(stack, artifact.depth)
        else:
            plane = untile_plane(stack)

    pixels = round_half_away(np.clip(plane, 0, MAX_PIXEL)).astype(np.uint8)
    return Image(pixels)


def compressed_size(artifact: CompressedArtifact) -> int:
    """Serialized container length in bytes."""
    return len(serialize(artifact))


def measured_cr(artifact: CompressedArtifact, img: Image) -> float:
    """Raw bytes (one per pixel) divided by serialized container bytes."""
    return img.size / compressed_size(artifact)
