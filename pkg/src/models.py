"""Data models for the UIC codec."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from src.config import DEFAULT_BITS, MAX_BITS, MIN_BITS
from src.exceptions import DimensionError, ValidationError

# A plane of real-valued transform coefficients, row-major 2-D float64.
CoeffPlane = np.ndarray


def _frozen(array: np.ndarray) -> np.ndarray:
    """Return a read-only copy of an array."""
    out = np.array(array, copy=True)
    out.setflags(write=False)
    return out


class NoiseKind(Enum):
    """Kind of experiment noise."""

    SALT_PEPPER = "sp"


class ShrinkMode(Enum):
    """Wavelet shrinkage rule applied to detail subbands."""

    HARD = "hard"
    SOFT = "soft"
    NONE = "none"


class ScanKind(Enum):
    """Ordering of sub-blocks inside a BlockStack."""

    RASTER = "row-raster"
    MORTON = "morton"


@dataclass(frozen=True)
class NoiseSpec:
    """Salt-and-pepper corruption applied before compression."""

    density: float
    seed: int = 0
    kind: NoiseKind = NoiseKind.SALT_PEPPER

    def __post_init__(self) -> None:
        if not isinstance(self.density, (int, float)) or not 0.0 <= self.density <= 1.0:
            raise ValidationError(f"Noise density must be in [0, 1], got {self.density}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValidationError(f"Noise seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "NoiseSpec":
        """
        Parse a noise flag such as ``sp:0.02``.

        Args:
            text: Flag value in the form ``<kind>:<density>``
            seed: Generator seed

        Returns:
            Parsed NoiseSpec

        Raises:
            ValidationError: If the kind is unknown or the density is not a number
        """
        kind_text, sep, density_text = text.partition(":")
        if not sep:
            raise ValidationError(f"Noise must look like 'sp:<density>', got '{text}'")
        try:
            kind = NoiseKind(kind_text.strip().lower())
        except ValueError as e:
            raise ValidationError(f"Unsupported noise kind '{kind_text}'") from e
        try:
            density = float(density_text)
        except ValueError as e:
            raise ValidationError(f"Noise density '{density_text}' is not a number") from e
        return cls(density=density, seed=seed, kind=kind)

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.density:g}"


@dataclass(frozen=True, eq=False)
class Image:
    """An 8-bit grayscale image stored as a (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DimensionError(f"Image must be a non-empty 2-D grid, got shape {pixels.shape}")
        if pixels.dtype != np.uint8:
            if not np.issubdtype(pixels.dtype, np.integer):
                raise ValidationError(f"Image pixels must be integers, got {pixels.dtype}")
            if pixels.min() < 0 or pixels.max() > 255:
                raise ValidationError("Image pixels must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        object.__setattr__(self, "pixels", _frozen(pixels))

    @property
    def width(self) -> int:
        """Image width in pixels."""
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        """Image height in pixels."""
        return int(self.pixels.shape[0])

    @property
    def size(self) -> int:
        """Raw size in bytes at one byte per pixel."""
        return self.width * self.height

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))


@dataclass(frozen=True, eq=False)
class SubbandQuad:
    """One level of a 2-D Haar decomposition."""

    ll: CoeffPlane
    lh: CoeffPlane
    hl: CoeffPlane
    hh: CoeffPlane

    def __post_init__(self) -> None:
        shapes = {np.shape(p) for p in (self.ll, self.lh, self.hl, self.hh)}
        if len(shapes) != 1:
            raise DimensionError(f"Subbands must share dimensions, got {sorted(shapes)}")
        for name in ("ll", "lh", "hl", "hh"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), np.float64)))

    @property
    def shape(self) -> tuple[int, int]:
        """Shape shared by the four subbands."""
        return tuple(self.ll.shape)  # type: ignore[return-value]

    @property
    def details(self) -> tuple[CoeffPlane, CoeffPlane, CoeffPlane]:
        """The LH, HL and HH planes."""
        return (self.lh, self.hl, self.hh)


@dataclass(frozen=True, eq=False)
class BlockStack:
    """
    Ordered stack of equally sized coefficient blocks.

    Attributes:
        blocks: Array of shape (n, block_rows, block_cols)
        grid_rows: Rows of the 2-D arrangement the blocks came from
        grid_cols: Columns of the 2-D arrangement
        scan: Ordering the blocks are currently in
    """

    blocks: np.ndarray
    grid_rows: int
    grid_cols: int
    scan: ScanKind = ScanKind.RASTER

    def __post_init__(self) -> None:
        blocks = np.asarray(self.blocks, dtype=np.float64)
        if blocks.ndim != 3:
            raise DimensionError(f"Blocks must be a 3-D array, got {blocks.ndim} dimensions")
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise DimensionError("Grid dimensions must be positive")
        if blocks.shape[0] != self.grid_rows * self.grid_cols:
            raise DimensionError(
                f"Stack holds {blocks.shape[0]} blocks, grid needs "
                f"{self.grid_rows}x{self.grid_cols}"
            )
        object.__setattr__(self, "blocks", _frozen(blocks))

    @property
    def n(self) -> int:
        """Number of blocks."""
        return int(self.blocks.shape[0])

    @property
    def block_shape(self) -> tuple[int, int]:
        """(rows, cols) of every block."""
        return (int(self.blocks.shape[1]), int(self.blocks.shape[2]))

    def with_blocks(self, blocks: np.ndarray, scan: Optional[ScanKind] = None) -> "BlockStack":
        """Return a stack on the same grid holding new blocks."""
        return BlockStack(blocks, self.grid_rows, self.grid_cols, scan or self.scan)


@dataclass(frozen=True, eq=False)
class KltModel:
    """
    Side information of a cross-block KLT.

    A fitted model carries all n eigenvectors. A model restored from a
    container only carries its retained columns.

    Attributes:
        mean: Mean vector over pixel positions, length n
        basis: Eigenvector matrix of shape (n, m), columns in descending eigenvalue order
        eigenvalues: The m eigenvalues, descending
        kept: Retained channel count, 1 <= kept <= m
    """

    mean: np.ndarray
    basis: np.ndarray
    eigenvalues: np.ndarray
    kept: int

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        basis = np.asarray(self.basis, dtype=np.float64)
        eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64).reshape(-1)
        if basis.ndim != 2 or basis.shape[0] != mean.size:
            raise DimensionError(
                f"Basis shape {basis.shape} does not match mean length {mean.size}"
            )
        if eigenvalues.size != basis.shape[1]:
            raise DimensionError("One eigenvalue is required per basis column")
        if not 1 <= self.kept <= basis.shape[1]:
            raise ValidationError(
                f"Kept channels must be in [1, {basis.shape[1]}], got {self.kept}"
            )
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "basis", _frozen(basis))
        object.__setattr__(self, "eigenvalues", _frozen(eigenvalues))

    @property
    def n(self) -> int:
        """Channel count (number of sub-blocks)."""
        return int(self.mean.size)

    @property
    def channels(self) -> int:
        """Number of basis columns carried by this model."""
        return int(self.basis.shape[1])


@dataclass(frozen=True, eq=False)
class EnergyReport:
    """Cumulative eigen-energy of a KLT model."""

    eigenvalues: np.ndarray
    cumulative_fraction: Optional[np.ndarray] = None

    @property
    def zero_trace(self) -> bool:
        """True when the fractions are undefined because all variance is zero."""
        return self.cumulative_fraction is None

    def channels_for(self, fraction: float) -> Optional[int]:
        """
        Get the smallest channel count reaching an energy fraction.

        Args:
            fraction: Target fraction in (0, 1]

        Returns:
            Smallest k with cumulative_fraction[k-1] >= fraction, or None for zero trace

        Raises:
            ValidationError: If fraction is outside (0, 1]
        """
        if not 0.0 < fraction <= 1.0:
            raise ValidationError(f"Energy fraction must be in (0, 1], got {fraction}")
        if self.cumulative_fraction is None:
            return None
        index = int(np.searchsorted(self.cumulative_fraction, fraction, side="left"))
        return min(index + 1, int(self.cumulative_fraction.size))


@dataclass(frozen=True)
class QuantSpec:
    """Uniform quantizer step and offset for one plane."""

    step: float
    offset: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.step) or self.step <= 0:
            raise ValidationError(f"Quantizer step must be positive, got {self.step}")
        if not math.isfinite(self.offset):
            raise ValidationError(f"Quantizer offset must be finite, got {self.offset}")


@dataclass(frozen=True)
class EncodedStream:
    """Canonical-Huffman coded symbols."""

    payload: bytes
    bit_count: int
    code_lengths: tuple[tuple[int, int], ...] = field(default_factory=tuple)


_TECHNIQUE_LABELS = {
    1: "haar",
    2: "haar+morton",
    3: "haar+row-rafter",
    4: "morton+klt",
    5: "row-rafter+klt",
    6: "haar+morton+klt",
    7: "haar+row-rafter+klt",
}


class Technique(Enum):
    """The seven compression techniques, in report order."""

    HAAR = 1
    HAAR_MORTON = 2
    HAAR_RASTER = 3
    MORTON_KLT = 4
    RASTER_KLT = 5
    HAAR_MORTON_KLT = 6
    HAAR_RASTER_KLT = 7

    @property
    def label(self) -> str:
        """Command-line and report name."""
        return _TECHNIQUE_LABELS[self.value]

    @property
    def uses_haar(self) -> bool:
        """Whether a Haar transform runs before anything else."""
        return self.value in (1, 2, 3, 6, 7)

    @property
    def uses_packets(self) -> bool:
        """Whether the Haar transform is a uniform packet tree."""
        return self.value in (2, 3, 6, 7)

    @property
    def uses_klt(self) -> bool:
        """Whether the sub-blocks go through the KLT."""
        return self.value in (4, 5, 6, 7)

    @property
    def scan(self) -> Optional[ScanKind]:
        """Sub-block scan, or None for the pyramid-only technique."""
        if self.value in (2, 4, 6):
            return ScanKind.MORTON
        if self.value in (3, 5, 7):
            return ScanKind.RASTER
        return None

    @classmethod
    def from_label(cls, text: str) -> "Technique":
        """
        Look up a technique by label or number.

        Args:
            text: Label such as ``haar+morton+klt`` or a number 1-7

        Returns:
            Matching Technique

        Raises:
            ValidationError: If nothing matches
        """
        key = text.strip().lower().replace("row-raster", "row-rafter")
        if key.isdigit() and 1 <= int(key) <= 7:
            return cls(int(key))
        for technique in cls:
            if technique.label == key:
                return technique
        names = ", ".join(t.label for t in cls)
        raise ValidationError(f"Unknown technique '{text}' (expected one of: {names})")


@dataclass(frozen=True)
class CodecConfig:
    """Parameters of one compression run."""

    technique: Technique
    block: int = 64
    target_cr: float = 4.0
    shrink: ShrinkMode = ShrinkMode.SOFT
    levels: int = 1
    bits: int = DEFAULT_BITS
    noise: Optional[NoiseSpec] = None
    energy: Optional[float] = None

    def __post_init__(self) -> None:
        if not isinstance(self.block, int) or self.block < 1:
            raise ValidationError(f"Block size must be a positive integer, got {self.block}")
        if not math.isfinite(self.target_cr) or self.target_cr < 1:
            raise ValidationError(f"Target CR must be >= 1, got {self.target_cr}")
        if not isinstance(self.levels, int) or self.levels < 1:
            raise ValidationError(f"Pyramid levels must be >= 1, got {self.levels}")
        if not MIN_BITS <= self.bits <= MAX_BITS:
            raise ValidationError(
                f"Bit budget must be in [{MIN_BITS}, {MAX_BITS}], got {self.bits}"
            )
        if self.energy is not None and not 0.0 < self.energy <= 1.0:
            raise ValidationError(f"Energy fraction must be in (0, 1], got {self.energy}")


@dataclass(frozen=True, eq=False)
class CompressedArtifact:
    """Everything needed to decode one image."""

    technique: Technique
    width: int
    height: int
    block: int
    depth: int
    levels: int
    shrink: ShrinkMode
    bits: int
    quant: tuple[QuantSpec, ...]
    stream: EncodedStream
    symbol_count: int
    klt: Optional[KltModel] = None

    def __post_init__(self) -> None:
        if self.technique.uses_klt != (self.klt is not None):
            raise ValidationError("KLT side info must be present exactly for KLT techniques")

    @property
    def scan(self) -> Optional[ScanKind]:
        """Scan used by the technique."""
        return self.technique.scan

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CompressedArtifact):
            return NotImplemented
        same_fields = (
            self.technique,
            self.width,
            self.height,
            self.block,
            self.depth,
            self.levels,
            self.shrink,
            self.bits,
            self.quant,
            self.stream,
            self.symbol_count,
        ) == (
            other.technique,
            other.width,
            other.height,
            other.block,
            other.depth,
            other.levels,
            other.shrink,
            other.bits,
            other.quant,
            other.stream,
            other.symbol_count,
        )
        if not same_fields:
            return False
        if self.klt is None or other.klt is None:
            return self.klt is other.klt
        return (
            self.klt.kept == other.klt.kept
            and np.array_equal(self.klt.mean, other.klt.mean)
            and np.array_equal(self.klt.basis, other.klt.basis)
            and np.array_equal(self.klt.eigenvalues, other.klt.eigenvalues)
        )


@dataclass
class MetricsRow:
    """One line of a comparison report."""

    technique: str
    cr: float
    mse: float
    psnr: float

    def __post_init__(self) -> None:
        if self.mse < 0:
            raise ValidationError(f"MSE cannot be negative, got {self.mse}")


@dataclass
class TechniqueResult:
    """Outcome of running one technique inside an experiment."""

    technique: Technique
    artifact: CompressedArtifact
    reconstruction: Image
    row: MetricsRow
    energy: Optional[EnergyReport] = None
