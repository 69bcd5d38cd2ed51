"""Configuration and constants for the UIC codec."""

from pathlib import Path

# Application metadata
APP_NAME = "UIC Codec"
APP_VERSION = "1.0.0"

# Directory paths
BASE_DIR = Path(__file__).parent.parent
LOG_FILE = BASE_DIR / "uic_codec.log"

# Container format
MAGIC = b"UIC1"
FORMAT_VERSION = 1
ARTIFACT_SUFFIX = ".uic"

# Pixel domain (8-bit gray only)
MAX_PIXEL = 255
PGM_MAGIC = b"P5"

# Quantizer settings
DEFAULT_BITS = 8
MIN_BITS = 1
MAX_BITS = 24
MIN_STEP = 1e-12  # floor for all-zero planes
MAX_SYMBOL_MAGNITUDE = 2**31 - 1  # symbols are stored as int32

# Entropy coder settings
MAX_CODE_LENGTH = 32

# Wavelet shrinkage
MAD_SCALE = 0.6745

# Eigensolver settings
JACOBI_TOLERANCE = 1e-12  # relative to the Frobenius norm of the input
JACOBI_MAX_SWEEPS = 50  # rotation cap is JACOBI_MAX_SWEEPS * n**2

# Energy report
DEFAULT_ENERGY_FRACTION = 0.95

# Experiment settings
DEFAULT_WORKERS = 1
REPORT_DECIMALS = 4

# Experiment geometry presets; images are user-supplied.
EXPERIMENT_PRESETS: dict[str, dict] = {
    "exp1": {"target_cr": 4.0, "block": 64, "packet_block": 256, "levels": 1, "noise": None},
    "exp2": {"target_cr": 4.0, "block": 64, "packet_block": 256, "levels": 1, "noise": "sp:0.02"},
    "exp3": {"target_cr": 16.0, "block": 64, "packet_block": 128, "levels": 2, "noise": None},
    "exp4": {"target_cr": 16.0, "block": 64, "packet_block": 128, "levels": 2, "noise": "sp:0.02"},
}
