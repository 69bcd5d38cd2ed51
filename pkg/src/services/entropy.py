"""Canonical Huffman coding of integer symbol streams."""

import heapq
import logging
from typing import Sequence

import numpy as np

from src.config import MAX_CODE_LENGTH
from src.exceptions import EntropyCodingError
from src.models import EncodedStream

logger = logging.getLogger(__name__)


def _tree_lengths(frequencies: dict[int, int]) -> dict[int, int]:
    """Huffman code lengths; ties go to the lower symbol."""
    heap: list[tuple[int, int, object]] = []
    order = 0
    for symbol in sorted(frequencies):
        heap.append((frequencies[symbol], order, symbol))
        order += 1
    heapq.heapify(heap)

    while len(heap) > 1:
        f1, _, left = heapq.heappop(heap)
        f2, _, right = heapq.heappop(heap)
        heapq.heappush(heap, (f1 + f2, order, (left, right)))
        order += 1

    lengths: dict[int, int] = {}
    pending = [(heap[0][2], 0)]
    while pending:
        node, depth = pending.pop()
        if isinstance(node, tuple):
            pending.append((node[0], depth + 1))
            pending.append((node[1], depth + 1))
        else:
            lengths[node] = depth
    return lengths


def _limit_lengths(lengths: dict[int, int], max_length: int) -> dict[int, int]:
    """
    Cap code lengths while keeping the Kraft sum at one.

    Works on the per-length histogram, then hands the new lengths back to
    symbols in their original (length, symbol) order.
    """
    longest = max(lengths.values())
    counts = [0] * (longest + 1)
    for length in lengths.values():
        counts[length] += 1

    for i in range(longest, max_length, -1):
        while counts[i] > 0:
            j = i - 2
            while counts[j] == 0:
                j -= 1
            counts[i] -= 2
            counts[i - 1] += 1
            counts[j + 1] += 2
            counts[j] -= 1

    ranked = sorted(lengths, key=lambda s: (lengths[s], s))
    limited: dict[int, int] = {}
    position = 0
    for length in range(1, max_length + 1):
        for _ in range(counts[length]):
            limited[ranked[position]] = length
            position += 1
    return limited


def build_code_lengths(
    frequencies: dict[int, int], max_length: int = MAX_CODE_LENGTH
) -> dict[int, int]:
    """
    Compute Huffman code lengths for symbol frequencies.

    Args:
        frequencies: Mapping of symbol -> count; zero counts are ignored
        max_length: Longest code allowed

    Returns:
        Mapping of symbol -> code length

    Raises:
        EntropyCodingError: If there are no symbols
    """
    used = {int(s): int(f) for s, f in frequencies.items() if f > 0}
    if not used:
        raise EntropyCodingError("Cannot build a code for an empty alphabet")
    if len(used) == 1:
        return {next(iter(used)): 1}
    lengths = _tree_lengths(used)
    if max(lengths.values()) > max_length:
        logger.debug(f"Limiting Huffman code lengths to {max_length} bits")
        lengths = _limit_lengths(lengths, max_length)
    return lengths


def canonical_codes(code_lengths: Sequence[tuple[int, int]]) -> dict[int, tuple[int, int]]:
    """
    Assign canonical codes in (length, symbol) order.

    Returns:
        Mapping of symbol -> (code, length)
    """
    table: dict[int, tuple[int, int]] = {}
    code = 0
    previous = 0
    for symbol, length in sorted(code_lengths, key=lambda item: (item[1], item[0])):
        code <<= length - previous
        table[symbol] = (code, length)
        code += 1
        previous = length
    return table


def _validate_table(code_lengths: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    entries = sorted(((int(s), int(n)) for s, n in code_lengths), key=lambda e: (e[1], e[0]))
    symbols = [s for s, _ in entries]
    if len(set(symbols)) != len(symbols):
        raise EntropyCodingError("Code table lists a symbol twice")
    if any(not 1 <= n <= MAX_CODE_LENGTH for _, n in entries):
        raise EntropyCodingError(f"Code lengths must be in [1, {MAX_CODE_LENGTH}]")
    kraft = sum(1 << (MAX_CODE_LENGTH - n) for _, n in entries)
    if kraft > 1 << MAX_CODE_LENGTH:
        raise EntropyCodingError("Code table violates the Kraft inequality")
    return entries


def entropy_encode(symbols: Sequence[int] | np.ndarray) -> EncodedStream:
    """
    Encode integers with a canonical Huffman code built from their frequencies.

    A stream with a single distinct symbol uses one bit per symbol.

    Args:
        symbols: Integer sequence

    Returns:
        EncodedStream holding the packed bits, their count, and the code-length table
    """
    values = np.asarray(symbols, dtype=np.int64).ravel()
    if values.size == 0:
        return EncodedStream(payload=b"", bit_count=0, code_lengths=())

    alphabet, counts = np.unique(values, return_counts=True)
    lengths = build_code_lengths(dict(zip(alphabet.tolist(), counts.tolist())))
    table = canonical_codes(list(lengths.items()))

    words = [format(table[s][0], f"0{table[s][1]}b") for s in alphabet.tolist()]
    positions = np.searchsorted(alphabet, values).tolist()
    bits = "".join([words[p] for p in positions])

    packed = np.packbits(np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0"))
    code_lengths = tuple(sorted(lengths.items(), key=lambda item: (item[1], item[0])))
    logger.debug(
        f"Huffman coded {values.size} symbols ({alphabet.size} distinct) into {len(bits)} bits"
    )
    return EncodedStream(payload=packed.tobytes(), bit_count=len(bits), code_lengths=code_lengths)


def entropy_decode(
    payload: bytes,
    code_lengths: Sequence[tuple[int, int]],
    count: int,
    bit_count: int | None = None,
) -> np.ndarray:
    """
    Decode ``count`` symbols from a canonical Huffman bit-stream.

    Args:
        payload: Packed bits, most significant bit first
        code_lengths: (symbol, length) table used by the encoder
        count: Number of symbols to decode
        bit_count: Number of meaningful bits; defaults to the whole payload

    Returns:
        Decoded symbols as an int64 array

    Raises:
        EntropyCodingError: If the table is corrupt or the bits run out
    """
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    entries = _validate_table(code_lengths)
    if not entries:
        raise EntropyCodingError("Empty code table for a non-empty stream")

    longest = entries[-1][1]
    per_length = [0] * (longest + 2)
    for _, length in entries:
        per_length[length] += 1
    first_code = [0] * (longest + 2)
    first_index = [0] * (longest + 2)
    code = 0
    index = 0
    for length in range(1, longest + 1):
        first_code[length] = code
        first_index[length] = index
        code = (code + per_length[length]) << 1
        index += per_length[length]
    ordered = [symbol for symbol, _ in entries]

    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8)).tolist()
    limit = len(bits) if bit_count is None else bit_count
    if limit > len(bits):
        raise EntropyCodingError(f"Payload holds {len(bits)} bits, header claims {limit}")

    out = []
    pos = 0
    for _ in range(count):
        code = 0
        length = 0
        while True:
            if pos >= limit:
                raise EntropyCodingError(f"Bit underrun after {len(out)} of {count} symbols")
            code = (code << 1) | bits[pos]
            pos += 1
            length += 1
            offset = code - first_code[length]
            if 0 <= offset < per_length[length]:
                out.append(ordered[first_index[length] + offset])
                break
            if length >= longest:
                raise EntropyCodingError(f"Invalid code at bit {pos}")
    return np.asarray(out, dtype=np.int64)
