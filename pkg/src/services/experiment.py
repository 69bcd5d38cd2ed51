"""
Experiment harness: runs the seven techniques on one image and collects results.

Noise, when requested, is applied once and the same corrupted image feeds
every technique. Fidelity is always measured against the clean input.
"""

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from src.config import DEFAULT_BITS, DEFAULT_WORKERS, EXPERIMENT_PRESETS
from src.exceptions import ValidationError
from src.models import (
    BlockStack,
    CodecConfig,
    EnergyReport,
    Image,
    MetricsRow,
    NoiseSpec,
    ScanKind,
    ShrinkMode,
    Technique,
    TechniqueResult,
)
from src.services import klt
from src.services.container import serialize
from src.services.imageio import add_salt_pepper, save_pgm
from src.services.metrics import build_report, mse, psnr
from src.services.pipeline import build_stack, decompress, encode, measured_cr
from src.services.storage import ResultStore, write_atomic

logger = logging.getLogger(__name__)

EIGEN_CSV_HEADER = ("channel", "eigenvalue", "cumulative_fraction")
VARIANTS = ("tile", "packet")


@dataclass(frozen=True)
class ExperimentSettings:
    """
    Parameters shared by all techniques of one experiment.

    Attributes:
        target_cr: Target compression ratio for the KLT techniques
        block: Sub-block side for techniques 4-7
        packet_block: Packet subband side for techniques 2-3
        levels: Pyramid levels for technique 1
        shrink: Shrinkage of the Haar detail coefficients
        bits: Coefficient bit budget
        noise: Corruption applied to the input before compression
        energy: Optional energy fraction that replaces the CR-derived kept count
        workers: Techniques run concurrently; 1 runs them in sequence
        techniques: Techniques to run, reported in this order
    """

    target_cr: float = 4.0
    block: int = 64
    packet_block: int = 256
    levels: int = 1
    shrink: ShrinkMode = ShrinkMode.SOFT
    bits: int = DEFAULT_BITS
    noise: Optional[NoiseSpec] = None
    energy: Optional[float] = None
    workers: int = DEFAULT_WORKERS
    techniques: tuple[Technique, ...] = field(default_factory=lambda: tuple(Technique))

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValidationError(f"Workers must be >= 1, got {self.workers}")
        if not self.techniques:
            raise ValidationError("An experiment needs at least one technique")

    def config_for(self, technique: Technique) -> CodecConfig:
        """
        Codec configuration for one technique.

        Noise is left out; the harness corrupts the input once for all techniques.
        """
        packet_only = technique.uses_packets and not technique.uses_klt
        block = self.packet_block if packet_only else self.block
        return CodecConfig(
            technique=technique,
            block=block,
            target_cr=self.target_cr,
            shrink=self.shrink,
            levels=self.levels,
            bits=self.bits,
            energy=self.energy,
        )


def resolve_preset(name: Optional[str], seed: int = 0, **overrides: Any) -> ExperimentSettings:
    """
    Build settings from a named preset and explicit overrides.

    Args:
        name: Preset name (exp1-exp4) or None for the built-in defaults
        seed: Seed for the preset's noise
        **overrides: ExperimentSettings fields; None values are ignored

    Returns:
        ExperimentSettings

    Raises:
        ValidationError: If the preset is unknown
    """
    values: dict[str, Any] = {}
    if name is not None:
        if name not in EXPERIMENT_PRESETS:
            known = ", ".join(sorted(EXPERIMENT_PRESETS))
            raise ValidationError(f"Unknown preset '{name}' (expected one of: {known})")
        preset = dict(EXPERIMENT_PRESETS[name])
        noise_text = preset.pop("noise")
        values.update(preset)
        if noise_text is not None:
            values["noise"] = NoiseSpec.parse(noise_text, seed)

    values.update({key: value for key, value in overrides.items() if value is not None})
    logger.debug(f"Resolved experiment settings from preset {name}: {values}")
    return ExperimentSettings(**values)


def run_technique(source: Image, reference: Image, cfg: CodecConfig) -> TechniqueResult:
    """
    Compress, decompress and score one technique.

    Args:
        source: Image fed to the codec (possibly noisy)
        reference: Clean image the reconstruction is compared with
        cfg: Codec configuration

    Returns:
        TechniqueResult with the full eigen-energy report for KLT techniques
    """
    artifact, energy = encode(source, cfg)
    reconstruction = decompress(artifact)
    error = mse(reference, reconstruction)
    cr = measured_cr(artifact, reference)
    row = MetricsRow(technique=cfg.technique.label, cr=cr, mse=error, psnr=psnr(error))

    logger.info(f"{cfg.technique.label}: CR {cr:.4f}, MSE {error:.4f}")
    return TechniqueResult(
        technique=cfg.technique,
        artifact=artifact,
        reconstruction=reconstruction,
        row=row,
        energy=energy,
    )


def run_experiment(img: Image, settings: ExperimentSettings) -> tuple[list[TechniqueResult], Image]:
    """
    Run every requested technique on one image.

    Args:
        img: Clean input image
        settings: Experiment settings

    Returns:
        Tuple of (results in technique order, image the codec actually saw)
    """
    source = add_salt_pepper(img, settings.noise) if settings.noise is not None else img
    configs = [settings.config_for(t) for t in settings.techniques]
    logger.info(
        f"Running {len(configs)} techniques on {img.width}x{img.height} "
        f"(noise {settings.noise}, workers {settings.workers})"
    )

    if settings.workers == 1:
        results = [run_technique(source, img, cfg) for cfg in configs]
    else:
        with ThreadPoolExecutor(max_workers=settings.workers) as executor:
            futures = [executor.submit(run_technique, source, img, cfg) for cfg in configs]
            results = [future.result() for future in futures]
    return results, source


def eigen_stack(
    img: Image,
    variant: str,
    block: int,
    scan: ScanKind = ScanKind.MORTON,
    shrink: ShrinkMode = ShrinkMode.SOFT,
) -> BlockStack:
    """
    Sub-block stack whose eigen-energy an eigen report describes.

    Args:
        img: Input image
        variant: "tile" for spatial tiles or "packet" for Haar packet subbands
        block: Sub-block side in pixels
        scan: Stack order
        shrink: Shrinkage of the packet details (ignored for tiles)

    Raises:
        ValidationError: If the variant is unknown
    """
    if variant not in VARIANTS:
        raise ValidationError(
            f"Unknown variant '{variant}' (expected one of: {', '.join(VARIANTS)})"
        )
    stack, _ = build_stack(img.pixels.astype(np.float64), block, scan, variant == "packet", shrink)
    return stack


def eigen_report(
    img: Image, variant: str, block: int, scan: ScanKind, shrink: ShrinkMode
) -> EnergyReport:
    """Fit a KLT to the variant's stack and report its eigen-energy."""
    return klt.energy_report(klt.fit(eigen_stack(img, variant, block, scan, shrink)))


def eigen_csv(report: EnergyReport) -> str:
    """
    Render an energy report as CSV.

    One row per channel, eigenvalues descending. The fraction column is
    empty when the trace is zero.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(EIGEN_CSV_HEADER)
    for index, value in enumerate(report.eigenvalues):
        fractions = report.cumulative_fraction
        fraction = "" if fractions is None else f"{fractions[index]:.6f}"
        writer.writerow([index + 1, f"{value:.10g}", fraction])
    return buffer.getvalue()


def write_results(
    store: ResultStore,
    results: Sequence[TechniqueResult],
    noisy: Optional[Image] = None,
    report_path: Optional[Path] = None,
) -> str:
    """
    Write an experiment's files and manifest.

    Args:
        store: Output directory
        results: Technique results in report order
        noisy: Corrupted input, written as noisy.pgm when given
        report_path: CSV destination; defaults to report.csv in the store

    Returns:
        The report table text
    """
    for result in results:
        label = result.technique.label
        store.write(f"{label}.uic", serialize(result.artifact))
        store.write(f"{label}.pgm", save_pgm(result.reconstruction))
        if result.energy is not None:
            store.write_text(f"{label}-eigenvalues.csv", eigen_csv(result.energy))
    if noisy is not None:
        store.write("noisy.pgm", save_pgm(noisy))

    table, csv_text = build_report([r.row for r in results])
    store.write_text("report.txt", table)
    if report_path is None:
        store.write_text("report.csv", csv_text)
    else:
        write_atomic(report_path, csv_text.encode("utf-8"))
        logger.info(f"Wrote report CSV to {report_path}")
    store.save_manifest()
    return table

