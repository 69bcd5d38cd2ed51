"""Tests for MSE, PSNR and report rendering."""

import math
import pytest
from pathlib import Path

import numpy as np

import sys

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.exceptions import DimensionError, ValidationError
from src.models import Image, MetricsRow
from src.services.metrics import CSV_HEADER, build_report, mse, psnr


def _image(rows):
    return Image(np.array(rows, dtype=np.uint8))


class TestMse:
    """Test suite for mse."""

    def test_extremes(self):
        """Test black against white."""
        assert mse(_image([[0]]), _image([[255]])) == 65025.0

    def test_small_example(self):
        """Test a hand-computed mean of squared differences."""
        assert mse(_image([[0, 0]]), _image([[3, 4]])) == 12.5

    def test_identical(self, small_natural):
        """Test that an image has zero error against itself."""
        assert mse(small_natural, small_natural) == 0.0

    def test_symmetric(self):
        """Test that argument order does not matter."""
        a = _image([[10, 20], [30, 40]])
        b = _image([[12, 17], [30, 49]])
        assert mse(a, b) == mse(b, a)

    def test_size_mismatch(self):
        """Test that images of different size are rejected."""
        with pytest.raises(DimensionError):
            mse(_image([[0, 0]]), _image([[0], [0]]))


class TestPsnr:
    """Test suite for psnr."""

    @pytest.mark.parametrize(
        "m, expected",
        [(65025.0, 0.0), (650.25, 20.0), (13.5447, 36.8131), (26.9291, 33.8286)],
    )
    def test_values(self, m, expected):
        """Test PSNR against known values."""
        assert psnr(m) == pytest.approx(expected, abs=1e-3)

    def test_zero_mse_is_infinite(self):
        """Test that a perfect reconstruction has infinite PSNR."""
        assert psnr(0.0) == math.inf

    def test_negative_mse(self):
        """Test that a negative MSE is rejected."""
        with pytest.raises(ValidationError):
            psnr(-1.0)


class TestBuildReport:
    """Test suite for build_report."""

    @pytest.fixture
    def rows(self):
        """Two report rows, one lossless."""
        return [
            MetricsRow("haar", 3.98766, 650.25, psnr(650.25)),
            MetricsRow("haar+morton+klt", 4.0, 0.0, math.inf),
        ]

    def test_csv(self, rows):
        """Test CSV header, order and four-decimal formatting."""
        _, text = build_report(rows)
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1] == "haar,3.9877,650.2500,20.0000"
        assert lines[2] == "haar+morton+klt,4.0000,0.0000,inf"

    def test_table_alignment(self, rows):
        """Test that every table line starts with a padded technique column."""
        table, _ = build_report(rows)
        lines = table.splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("Technique")
        assert lines[1].startswith("haar ")
        assert lines[2].endswith("inf")
        assert table.endswith("\n")

    def test_empty(self):
        """Test that no rows render as just the headers."""
        table, text = build_report([])
        assert table.splitlines() == ["Technique  CR  MSE  PSNR"]
        assert text == "technique,cr,mse,psnr\n"

    def test_negative_mse_row(self):
        """Test that a row with a negative MSE cannot be built."""
        with pytest.raises(ValidationError):
            MetricsRow("haar", 1.0, -0.5, 0.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
