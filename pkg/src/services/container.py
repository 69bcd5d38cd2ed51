"""
The .uic container.

Little-endian layout:

    fixed header     magic "UIC1", version, technique, shrink, scan, bits,
                     width, height, block, depth, levels, flags, reserved,
                     plane count, symbol count, bit count, table size,
                     payload length
    quant table      (step f32, offset f32) per plane
    KLT side info    n u32, kept u32, mean n*f32, kept columns n*kept f32,
                     kept eigenvalues kept*f32        (KLT techniques only)
    code table       (symbol i32, length u8) per entry
    payload          Huffman bits, MSB first
    trailer          CRC-32 of everything before it
"""

import logging
import struct
import zlib

import numpy as np

from src.config import FORMAT_VERSION, MAGIC
from src.exceptions import ContainerError, ValidationError
from src.models import (
    CompressedArtifact,
    EncodedStream,
    KltModel,
    QuantSpec,
    ScanKind,
    ShrinkMode,
    Technique,
)

logger = logging.getLogger(__name__)

FIXED_FMT = "<4sHBBBBIIIBBBBIIQII"
FIXED_SIZE = struct.calcsize(FIXED_FMT)
QUANT_FMT = "<ff"
QUANT_SIZE = struct.calcsize(QUANT_FMT)
KLT_HEAD_FMT = "<II"
KLT_HEAD_SIZE = struct.calcsize(KLT_HEAD_FMT)
TABLE_FMT = "<iB"
TABLE_SIZE = struct.calcsize(TABLE_FMT)
CRC_FMT = "<I"
CRC_SIZE = struct.calcsize(CRC_FMT)

FLAG_KLT = 0x01

_SHRINK_CODES = {ShrinkMode.NONE: 0, ShrinkMode.HARD: 1, ShrinkMode.SOFT: 2}
_SCAN_CODES = {None: 0, ScanKind.RASTER: 1, ScanKind.MORTON: 2}


def _crc32(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF


def _decode_enum(mapping: dict, code: int, what: str):
    for key, value in mapping.items():
        if value == code:
            return key
    raise ContainerError(f"Unknown {what} code {code}")


def header_size(artifact: CompressedArtifact) -> int:
    """Bytes taken by the fixed header and the per-plane quant table."""
    return FIXED_SIZE + QUANT_SIZE * len(artifact.quant)


def serialize(artifact: CompressedArtifact) -> bytes:
    """
    Serialize an artifact to container bytes.

    Args:
        artifact: Artifact to write

    Returns:
        Container bytes; their length is the compressed size
    """
    stream = artifact.stream
    flags = FLAG_KLT if artifact.klt is not None else 0
    parts = [
        struct.pack(
            FIXED_FMT,
            MAGIC,
            FORMAT_VERSION,
            artifact.technique.value,
            _SHRINK_CODES[artifact.shrink],
            _SCAN_CODES[artifact.scan],
            artifact.bits,
            artifact.width,
            artifact.height,
            artifact.block,
            artifact.depth,
            artifact.levels,
            flags,
            0,
            len(artifact.quant),
            artifact.symbol_count,
            stream.bit_count,
            len(stream.code_lengths),
            len(stream.payload),
        )
    ]
    parts.extend(struct.pack(QUANT_FMT, q.step, q.offset) for q in artifact.quant)

    if artifact.klt is not None:
        model = artifact.klt
        parts.append(struct.pack(KLT_HEAD_FMT, model.n, model.kept))
        parts.append(model.mean.astype("<f4").tobytes())
        parts.append(np.ascontiguousarray(model.basis[:, : model.kept].T).astype("<f4").tobytes())
        parts.append(model.eigenvalues[: model.kept].astype("<f4").tobytes())

    parts.extend(struct.pack(TABLE_FMT, symbol, length) for symbol, length in stream.code_lengths)
    parts.append(stream.payload)

    body = b"".join(parts)
    data = body + struct.pack(CRC_FMT, _crc32(body))
    logger.debug(f"Serialized {artifact.technique.label} artifact: {len(data)} bytes")
    return data


def deserialize(data: bytes) -> CompressedArtifact:
    """
    Parse container bytes.

    Args:
        data: Bytes produced by serialize

    Returns:
        The artifact

    Raises:
        ContainerError: On bad magic, version mismatch, truncation or checksum mismatch
    """
    if len(data) < FIXED_SIZE + CRC_SIZE:
        raise ContainerError(f"Truncated container: {len(data)} bytes")
    if data[:4] != MAGIC:
        raise ContainerError(f"Bad magic {data[:4]!r}, expected {MAGIC!r}")

    (
        _,
        version,
        technique_id,
        shrink_code,
        scan_code,
        bits,
        width,
        height,
        block,
        depth,
        levels,
        flags,
        _reserved,
        plane_count,
        symbol_count,
        bit_count,
        table_entries,
        payload_len,
    ) = struct.unpack_from(FIXED_FMT, data, 0)

    if version != FORMAT_VERSION:
        raise ContainerError(f"Unsupported container version {version}, expected {FORMAT_VERSION}")

    # Sizes are checked before the checksum so truncation is reported as such.
    has_klt = bool(flags & FLAG_KLT)
    pos = FIXED_SIZE + QUANT_SIZE * plane_count
    klt_head = None
    if has_klt:
        if len(data) < pos + KLT_HEAD_SIZE:
            raise ContainerError("Truncated container: missing KLT side info")
        klt_head = struct.unpack_from(KLT_HEAD_FMT, data, pos)
        n, kept = klt_head
        pos += KLT_HEAD_SIZE + 4 * (n + n * kept + kept)
    expected = pos + TABLE_SIZE * table_entries + payload_len + CRC_SIZE
    if len(data) < expected:
        raise ContainerError(f"Truncated container: expected {expected} bytes, got {len(data)}")
    if len(data) > expected:
        raise ContainerError(f"Container has {len(data) - expected} trailing bytes")

    (stored_crc,) = struct.unpack_from(CRC_FMT, data, len(data) - CRC_SIZE)
    if stored_crc != _crc32(data[: len(data) - CRC_SIZE]):
        raise ContainerError("Container checksum mismatch")

    try:
        technique = Technique(technique_id)
    except ValueError as e:
        raise ContainerError(f"Unknown technique id {technique_id}") from e
    shrink = _decode_enum(_SHRINK_CODES, shrink_code, "shrink")
    scan = _decode_enum(_SCAN_CODES, scan_code, "scan")
    if scan is not technique.scan:
        raise ContainerError(f"Scan code {scan_code} does not match technique {technique.label}")

    pos = FIXED_SIZE
    quant = []
    for _ in range(plane_count):
        step, offset = struct.unpack_from(QUANT_FMT, data, pos)
        pos += QUANT_SIZE
        try:
            quant.append(QuantSpec(step=step, offset=offset))
        except ValidationError as e:
            raise ContainerError(f"Invalid quantizer entry: {e}") from e

    klt = None
    if klt_head is not None:
        n, kept = klt_head
        pos += KLT_HEAD_SIZE
        mean = np.frombuffer(data, dtype="<f4", count=n, offset=pos).astype(np.float64)
        pos += 4 * n
        columns = np.frombuffer(data, dtype="<f4", count=n * kept, offset=pos)
        pos += 4 * n * kept
        eigenvalues = np.frombuffer(data, dtype="<f4", count=kept, offset=pos).astype(np.float64)
        pos += 4 * kept
        try:
            klt = KltModel(
                mean=mean,
                basis=columns.reshape(kept, n).T.astype(np.float64),
                eigenvalues=eigenvalues,
                kept=kept,
            )
        except (ValidationError, ValueError) as e:
            raise ContainerError(f"Invalid KLT side info: {e}") from e

    code_lengths = []
    for _ in range(table_entries):
        code_lengths.append(struct.unpack_from(TABLE_FMT, data, pos))
        pos += TABLE_SIZE
    payload = bytes(data[pos : pos + payload_len])

    try:
        return CompressedArtifact(
            technique=technique,
            width=width,
            height=height,
            block=block,
            depth=depth,
            levels=levels,
            shrink=shrink,
            bits=bits,
            quant=tuple(quant),
            stream=EncodedStream(
                payload=payload, bit_count=bit_count, code_lengths=tuple(code_lengths)
            ),
            symbol_count=symbol_count,
            klt=klt,
        )
    except ValidationError as e:
        raise ContainerError(f"Inconsistent container: {e}") from e
