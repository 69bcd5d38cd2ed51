"""Uniform mid-tread scalar quantization of coefficient planes."""

import logging

import numpy as np

from src.config import DEFAULT_BITS, MAX_SYMBOL_MAGNITUDE, MIN_STEP
from src.exceptions import QuantizationError
from src.models import CoeffPlane, QuantSpec
from src.utils.helpers import round_half_away

logger = logging.getLogger(__name__)


def _float32(value: float) -> float:
    return float(np.float32(value))


def choose_step(values: CoeffPlane, bits: int = DEFAULT_BITS, offset: float = 0.0) -> float:
    """
    Step for a plane: max|v - offset| * 2 / (2**bits - 1), floored at MIN_STEP.

    The result is rounded to a 32-bit float, which is how containers store it.
    """
    spread = float(np.max(np.abs(np.asarray(values, dtype=np.float64) - offset), initial=0.0))
    step = max(spread * 2.0 / (2**bits - 1), MIN_STEP)
    return _float32(step)


def plane_spec(values: CoeffPlane, bits: int = DEFAULT_BITS) -> QuantSpec:
    """
    Quantizer for one plane, centred on the plane mean.

    Args:
        values: Plane to be quantized
        bits: Coefficient bit budget

    Returns:
        QuantSpec with 32-bit step and offset
    """
    array = np.asarray(values, dtype=np.float64)
    offset = _float32(float(array.mean())) if array.size else 0.0
    return QuantSpec(step=choose_step(array, bits, offset), offset=offset)


def quantize(plane: CoeffPlane, spec: QuantSpec) -> np.ndarray:
    """
    Map coefficients to integers, q = round_half_away((v - offset) / step).

    Raises:
        QuantizationError: If a symbol exceeds the int32 alphabet
    """
    scaled = (np.asarray(plane, dtype=np.float64) - spec.offset) / spec.step
    if scaled.size and float(np.max(np.abs(scaled))) > MAX_SYMBOL_MAGNITUDE:
        raise QuantizationError(
            f"Quantized value exceeds +/-{MAX_SYMBOL_MAGNITUDE}; step {spec.step} is too small"
        )
    return round_half_away(scaled).astype(np.int64)


def dequantize(qplane: np.ndarray, spec: QuantSpec) -> CoeffPlane:
    """Map integers back to coefficients, q * step + offset."""
    return np.asarray(qplane, dtype=np.float64) * spec.step + spec.offset
