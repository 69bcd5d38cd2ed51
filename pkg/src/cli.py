"""Command-line front-end for the UIC codec."""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from src.config import (
    APP_NAME,
    APP_VERSION,
    ARTIFACT_SUFFIX,
    DEFAULT_ENERGY_FRACTION,
    EXPERIMENT_PRESETS,
    LOG_FILE,
    MAX_BITS,
    MIN_BITS,
)
from src.exceptions import (
    CodecException,
    DimensionError,
    ImageFormatError,
    StorageError,
    ValidationError,
)
from src.models import CodecConfig, Image, NoiseSpec, ScanKind, ShrinkMode, Technique
from src.services.config_manager import ConfigManager
from src.services.container import deserialize, serialize
from src.services.experiment import (
    VARIANTS,
    eigen_csv,
    eigen_report,
    resolve_preset,
    run_experiment,
    write_results,
)
from src.services.imageio import add_salt_pepper, load_pgm, save_pgm
from src.services.metrics import mse, psnr
from src.services.pipeline import compress, decompress, measured_cr
from src.services.storage import ResultStore, read_bytes, write_atomic
from src.utils.helpers import format_ratio, format_size, format_time

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CODEC = 4


def _build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uic-codec",
        description="Haar wavelet, scan and KLT image compression for 8-bit grayscale PGM images.",
    )
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    parser.add_argument("--config", type=Path, help="User configuration file (JSON)")
    parser.add_argument("--log-file", type=Path, default=LOG_FILE, help="Log file path")
    parser.add_argument("--verbose", action="store_true", help="Also log progress to stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)

    shrink_choices = [m.value for m in ShrinkMode]
    scan_choices = [s.value for s in ScanKind]

    p_compress = subparsers.add_parser("compress", help="Compress a PGM image to a .uic container")
    p_compress.add_argument("--in", dest="input", type=Path, required=True, help="Input PGM")
    p_compress.add_argument("--out", type=Path, help="Output container (default: input with .uic)")
    p_compress.add_argument("--technique", required=True, help="Technique label or number 1-7")
    p_compress.add_argument("--block", type=int, default=64, help="Sub-block side in pixels")
    p_compress.add_argument("--cr", type=float, default=4.0, help="Target compression ratio")
    p_compress.add_argument("--levels", type=int, default=1, help="Pyramid levels (technique 1)")
    p_compress.add_argument("--shrink", choices=shrink_choices, help="Detail shrinkage")
    p_compress.add_argument("--bits", type=int, help="Coefficient bit budget")
    p_compress.add_argument("--noise", help="Corrupt the input first, e.g. sp:0.02")
    p_compress.add_argument("--seed", type=int, default=0, help="Noise seed")
    p_compress.add_argument(
        "--energy", type=float, help="Keep KLT channels up to this energy fraction"
    )

    p_decompress = subparsers.add_parser("decompress", help="Decode a .uic container to PGM")
    p_decompress.add_argument(
        "--in", dest="input", type=Path, required=True, help="Input container"
    )
    p_decompress.add_argument("--out", type=Path, required=True, help="Output PGM")

    p_metrics = subparsers.add_parser("metrics", help="Compare two images")
    p_metrics.add_argument("--in", dest="input", type=Path, required=True, help="Reconstructed PGM")
    p_metrics.add_argument("--ref", type=Path, required=True, help="Reference PGM")
    p_metrics.add_argument("--artifact", type=Path, help="Container to report the measured CR of")

    p_noise = subparsers.add_parser("noise", help="Add salt-and-pepper noise to an image")
    p_noise.add_argument("--in", dest="input", type=Path, required=True, help="Input PGM")
    p_noise.add_argument("--out", type=Path, required=True, help="Output PGM")
    p_noise.add_argument("--noise", required=True, help="Noise spec, e.g. sp:0.02")
    p_noise.add_argument("--seed", type=int, default=0, help="Noise seed")

    p_experiment = subparsers.add_parser("experiment", help="Run all seven techniques on one image")
    p_experiment.add_argument("--in", dest="input", type=Path, required=True, help="Input PGM")
    p_experiment.add_argument(
        "--preset", choices=sorted(EXPERIMENT_PRESETS), help="Experiment preset"
    )
    p_experiment.add_argument("--out-dir", type=Path, help="Results directory")
    p_experiment.add_argument("--report", type=Path, help="Report CSV path")
    p_experiment.add_argument("--cr", dest="target_cr", type=float, help="Target compression ratio")
    p_experiment.add_argument("--block", type=int, help="Sub-block side for techniques 4-7")
    p_experiment.add_argument("--packet-block", type=int, help="Subband side for techniques 2-3")
    p_experiment.add_argument("--levels", type=int, help="Pyramid levels (technique 1)")
    p_experiment.add_argument("--shrink", choices=shrink_choices, help="Detail shrinkage")
    p_experiment.add_argument("--bits", type=int, help="Coefficient bit budget")
    p_experiment.add_argument("--noise", help="Corrupt the input first, e.g. sp:0.02")
    p_experiment.add_argument("--seed", type=int, default=0, help="Noise seed")
    p_experiment.add_argument(
        "--energy", type=float, help="Keep KLT channels up to this energy fraction"
    )
    p_experiment.add_argument("--workers", type=int, help="Techniques to run concurrently")

    p_eigen = subparsers.add_parser("eigen-report", help="Eigenvalue energy of a sub-block stack")
    p_eigen.add_argument("--in", dest="input", type=Path, required=True, help="Input PGM")
    p_eigen.add_argument("--out", type=Path, required=True, help="Output CSV")
    p_eigen.add_argument("--variant", choices=VARIANTS, default="packet", help="Stack to analyse")
    p_eigen.add_argument("--block", type=int, default=64, help="Sub-block side in pixels")
    p_eigen.add_argument(
        "--scan", choices=scan_choices, default=ScanKind.MORTON.value, help="Stack order"
    )
    p_eigen.add_argument("--shrink", choices=shrink_choices, help="Packet detail shrinkage")
    p_eigen.add_argument(
        "--energy", type=float, default=DEFAULT_ENERGY_FRACTION, help="Energy fraction to report"
    )

    p_config = subparsers.add_parser("config", help="Show or change the user configuration")
    p_config.add_argument("--bits", type=int, help="Default coefficient bit budget")
    p_config.add_argument("--shrink", choices=shrink_choices, help="Default detail shrinkage")
    p_config.add_argument("--workers", type=int, help="Default experiment workers")
    p_config.add_argument("--output-dir", type=Path, help="Default experiment results directory")
    p_config.add_argument(
        "--reset", action="store_true", help="Forget all settings before applying the others"
    )

    return parser


def _configure_logging(log_file: Path, verbose: bool) -> None:
    """Send DEBUG logs to the log file and, when verbose, INFO logs to stderr."""
    logging.basicConfig(filename=log_file, level=logging.DEBUG, format=LOG_FORMAT)
    if verbose:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(logging.INFO)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logging.getLogger().addHandler(handler)


def _load_image(path: Path) -> Image:
    return load_pgm(read_bytes(path))


def _shrink(text: str) -> ShrinkMode:
    try:
        return ShrinkMode(text)
    except ValueError as e:
        raise ValidationError(f"Unknown shrink mode '{text}'") from e


def _noise(text: Optional[str], seed: int) -> Optional[NoiseSpec]:
    return NoiseSpec.parse(text, seed) if text is not None else None


def run_compress(args: argparse.Namespace, config: ConfigManager) -> int:
    """Compress one image and print the measured CR."""
    started = time.perf_counter()
    img = _load_image(args.input)
    cfg = CodecConfig(
        technique=Technique.from_label(args.technique),
        block=args.block,
        target_cr=args.cr,
        shrink=_shrink(args.shrink or config.get_shrink()),
        levels=args.levels,
        bits=args.bits if args.bits is not None else config.get_bits(),
        noise=_noise(args.noise, args.seed),
        energy=args.energy,
    )
    artifact = compress(img, cfg)
    data = serialize(artifact)
    out = args.out or args.input.with_suffix(ARTIFACT_SUFFIX)
    write_atomic(out, data)
    elapsed = time.perf_counter() - started

    cr = img.size / len(data)
    logger.info(f"Wrote {out}: {len(data)} bytes, CR {cr:.4f}")
    sizes = f"{format_size(img.size)} -> {format_size(len(data))}"
    print(f"{cfg.technique.label}: CR {format_ratio(cr)} ({sizes})")
    print(f"time: {format_time(elapsed)}")
    return EXIT_OK


def run_decompress(args: argparse.Namespace, config: ConfigManager) -> int:
    """Decode a container to PGM."""
    started = time.perf_counter()
    artifact = deserialize(read_bytes(args.input))
    img = decompress(artifact)
    write_atomic(args.out, save_pgm(img))
    elapsed = time.perf_counter() - started

    logger.info(f"Decoded {args.input} to {args.out}")
    print(f"{artifact.technique.label}: {img.width}x{img.height} written to {args.out}")
    print(f"time: {format_time(elapsed)}")
    return EXIT_OK


def run_metrics(args: argparse.Namespace, config: ConfigManager) -> int:
    """Print MSE, PSNR and, given an artifact, its measured CR."""
    img = _load_image(args.input)
    ref = _load_image(args.ref)
    error = mse(ref, img)
    print(f"mse: {format_ratio(error)}")
    print(f"psnr: {format_ratio(psnr(error))}")
    if args.artifact is not None:
        artifact = deserialize(read_bytes(args.artifact))
        print(f"cr: {format_ratio(measured_cr(artifact, ref))}")
    return EXIT_OK


def run_noise(args: argparse.Namespace, config: ConfigManager) -> int:
    """Write a salt-and-pepper corrupted copy of an image."""
    img = _load_image(args.input)
    noisy = add_salt_pepper(img, NoiseSpec.parse(args.noise, args.seed))
    write_atomic(args.out, save_pgm(noisy))
    logger.info(f"Wrote noisy image {args.out} ({args.noise}, seed {args.seed})")
    return EXIT_OK


def run_experiment_command(args: argparse.Namespace, config: ConfigManager) -> int:
    """Run the seven techniques and write the report and per-technique files."""
    started = time.perf_counter()
    img = _load_image(args.input)
    settings = resolve_preset(
        args.preset,
        seed=args.seed,
        target_cr=args.target_cr,
        block=args.block,
        packet_block=args.packet_block,
        levels=args.levels,
        shrink=_shrink(args.shrink or config.get_shrink()),
        bits=args.bits if args.bits is not None else config.get_bits(),
        noise=_noise(args.noise, args.seed),
        energy=args.energy,
        workers=args.workers if args.workers is not None else config.get_workers(),
    )
    results, source = run_experiment(img, settings)

    store = ResultStore(args.out_dir or config.get_output_dir())
    noisy = source if settings.noise is not None else None
    table = write_results(store, results, noisy=noisy, report_path=args.report)
    elapsed = time.perf_counter() - started

    sys.stdout.write(table)
    print(f"results: {store.output_dir} ({format_time(elapsed)})")
    return EXIT_OK


def run_eigen_report(args: argparse.Namespace, config: ConfigManager) -> int:
    """Write the eigenvalue CSV of a stack and print the channels reaching --energy."""
    img = _load_image(args.input)
    report = eigen_report(
        img,
        args.variant,
        args.block,
        ScanKind(args.scan),
        _shrink(args.shrink or config.get_shrink()),
    )
    write_atomic(args.out, eigen_csv(report).encode("utf-8"))

    channels = report.channels_for(args.energy)
    if channels is None:
        print("zero-trace: energy fractions undefined")
    else:
        total = report.eigenvalues.size
        print(f"{args.variant}: {channels} of {total} channels hold {args.energy:g} of the energy")
    return EXIT_OK


def run_config(args: argparse.Namespace, config: ConfigManager) -> int:
    """
    Apply any given settings, then print the effective configuration.

    With no flags this only prints.
    """
    if args.bits is not None and not MIN_BITS <= args.bits <= MAX_BITS:
        raise ValidationError(f"Bit budget must be in [{MIN_BITS}, {MAX_BITS}], got {args.bits}")
    if args.workers is not None and args.workers < 1:
        raise ValidationError(f"Workers must be at least 1, got {args.workers}")

    if args.reset:
        config.reset_to_defaults()
    if args.bits is not None:
        config.set_bits(args.bits)
    if args.shrink is not None:
        config.set_shrink(_shrink(args.shrink).value)
    if args.workers is not None:
        config.set_workers(args.workers)
    if args.output_dir is not None:
        config.set_output_dir(args.output_dir)

    print(f"file: {config.config_file}")
    print(f"bits: {config.get_bits()}")
    print(f"shrink: {config.get_shrink()}")
    print(f"workers: {config.get_workers()}")
    print(f"output_dir: {config.get_output_dir()}")
    return EXIT_OK


COMMANDS = {
    "compress": run_compress,
    "decompress": run_decompress,
    "metrics": run_metrics,
    "noise": run_noise,
    "experiment": run_experiment_command,
    "eigen-report": run_eigen_report,
    "config": run_config,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments and run one command.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        Exit code: 0 success, 2 invalid arguments or geometry, 3 I/O failure,
        4 any other codec error
    """
    parser = _build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    _configure_logging(args.log_file, args.verbose)
    logger.info(f"Running {args.command}")

    try:
        config = ConfigManager(args.config) if args.config is not None else ConfigManager()
        return COMMANDS[args.command](args, config)
    except (ValidationError, DimensionError) as e:
        logger.error(f"{args.command} rejected: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (StorageError, ImageFormatError) as e:
        logger.error(f"{args.command} I/O failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except CodecException as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CODEC


def run() -> None:
    """Console script entry point."""
    sys.exit(main())
