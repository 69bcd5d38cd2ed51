"""Tests for the uniform quantizer."""

import pytest
from pathlib import Path

import numpy as np

import sys

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import MIN_STEP
from src.exceptions import QuantizationError, ValidationError
from src.models import QuantSpec
from src.services.quantizer import choose_step, dequantize, plane_spec, quantize


class TestChooseStep:
    """Test suite for choose_step."""

    def test_eight_bits(self):
        """Test the step for a symmetric range at eight bits."""
        assert choose_step(np.array([-127.5, 127.5]), 8) == pytest.approx(1.0)

    def test_offset_shifts_range(self):
        """Test that the spread is measured around the offset."""
        assert choose_step(np.array([100.0, 110.0]), 1, offset=105.0) == pytest.approx(10.0)

    def test_zero_plane_uses_floor(self):
        """Test that an all-zero plane gets the minimum step."""
        assert choose_step(np.zeros((4, 4))) == pytest.approx(MIN_STEP)

    def test_step_is_float32(self):
        """Test that the step survives a 32-bit round trip unchanged."""
        step = choose_step(np.array([0.1, -3.7, 2.2]), 10)
        assert float(np.float32(step)) == step


class TestQuantize:
    """Test suite for quantize and dequantize."""

    def test_known_values(self):
        """Test rounding half away from zero."""
        spec = QuantSpec(step=2.0)
        assert quantize(np.array([1.0, -1.0, 2.9, -3.0]), spec).tolist() == [1, -1, 1, -2]

    def test_error_bounded_by_half_step(self):
        """Test that reconstruction error never exceeds step / 2."""
        rng = np.random.default_rng(0)
        for bits in (2, 4, 8, 12):
            plane = rng.normal(scale=50.0, size=(16, 16))
            spec = plane_spec(plane, bits)
            error = np.abs(dequantize(quantize(plane, spec), spec) - plane)
            assert np.max(error) <= spec.step / 2 * (1 + 1e-9)

    def test_symbols_within_bit_budget(self):
        """Test that symbols fit the signed range implied by the bit budget."""
        rng = np.random.default_rng(1)
        plane = rng.uniform(-1000, 1000, size=(32, 32))
        for bits in (1, 4, 8):
            q = quantize(plane, plane_spec(plane, bits))
            assert np.max(np.abs(q)) <= 2 ** (bits - 1)

    def test_constant_plane_is_exact(self):
        """Test that a constant plane dequantizes to its exact value."""
        plane = np.full((8, 8), 1096.0)
        spec = plane_spec(plane, 8)
        assert spec.offset == 1096.0
        assert np.array_equal(dequantize(quantize(plane, spec), spec), plane)

    def test_zero_plane(self):
        """Test that an all-zero plane quantizes to zeros."""
        spec = plane_spec(np.zeros((4, 4)))
        assert np.all(quantize(np.zeros((4, 4)), spec) == 0)

    def test_overflow(self):
        """Test that symbols beyond int32 are rejected."""
        with pytest.raises(QuantizationError):
            quantize(np.array([1e30]), QuantSpec(step=1e-12))

    def test_bad_step(self):
        """Test that non-positive steps are rejected."""
        with pytest.raises(ValidationError):
            QuantSpec(step=0.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
