"""Tests for end-to-end compression and decompression."""

import pytest
from dataclasses import replace
from pathlib import Path

import numpy as np

import sys

sys.path.insert(0, str(Path(__file__).parent.parent))

from tests.conftest import random_image
from src.exceptions import ContainerError, DimensionError, ValidationError
from src.models import CodecConfig, Image, NoiseSpec, ScanKind, ShrinkMode, Technique
from src.services import klt
from src.services.container import serialize
from src.services.metrics import mse
from src.services.pipeline import (
    build_stack,
    compress,
    compressed_size,
    decompress,
    encode,
    kept_for,
    measured_cr,
    packet_depth,
)


class TestKeptFor:
    """Test suite for kept_for."""

    def test_values(self):
        """Test floor(n / target_cr) with a floor of one."""
        assert kept_for(64, 4.0) == 16
        assert kept_for(64, 16.0) == 4
        assert kept_for(10, 3.0) == 3
        assert kept_for(16, 16.0) == 1

    def test_target_above_channels(self):
        """Test that a target beyond the channel count is rejected."""
        with pytest.raises(ValidationError):
            kept_for(16, 17.0)


class TestPacketDepth:
    """Test suite for packet_depth."""

    def test_values(self):
        """Test depths for square power-of-two grids."""
        assert packet_depth(512, 512, 64) == 3
        assert packet_depth(512, 512, 256) == 1
        assert packet_depth(64, 64, 64) == 0

    def test_non_power_of_two(self):
        """Test that a 3x3 grid of subbands is rejected."""
        with pytest.raises(DimensionError):
            packet_depth(96, 96, 32)

    def test_non_square(self):
        """Test that a rectangular grid is rejected."""
        with pytest.raises(DimensionError):
            packet_depth(64, 32, 16)

    def test_block_not_dividing(self):
        """Test that a block that does not divide the image is rejected."""
        with pytest.raises(DimensionError):
            packet_depth(64, 64, 24)


class TestCompress:
    """Test suite for compress and decompress."""

    @pytest.mark.parametrize("technique", list(Technique))
    def test_deterministic(self, small_natural, technique):
        """Test that identical inputs give byte-identical containers."""
        cfg = CodecConfig(technique=technique, block=16, levels=2)
        assert serialize(compress(small_natural, cfg)) == serialize(compress(small_natural, cfg))

    @pytest.mark.parametrize("technique", list(Technique))
    def test_constant_image_exact(self, gray_image, technique):
        """Test that a constant image survives every technique unchanged."""
        cfg = CodecConfig(technique=technique, block=16, levels=2)
        assert decompress(compress(gray_image, cfg)) == gray_image

    @pytest.mark.parametrize("technique", list(Technique))
    def test_dimensions_preserved(self, small_natural, technique):
        """Test that the reconstruction has the input's size."""
        cfg = CodecConfig(technique=technique, block=16)
        out = decompress(compress(small_natural, cfg))
        assert (out.width, out.height) == (64, 64)

    def test_full_retention_near_lossless(self, small_natural):
        """Test that keeping every channel at 16 bits loses at most one gray level."""
        cfg = CodecConfig(
            technique=Technique.HAAR_MORTON_KLT,
            block=16,
            target_cr=1.0,
            shrink=ShrinkMode.NONE,
            bits=16,
        )
        artifact = compress(small_natural, cfg)
        assert artifact.klt.kept == artifact.klt.n == 16
        out = decompress(artifact)
        diff = np.abs(out.pixels.astype(int) - small_natural.pixels.astype(int))
        assert diff.max() <= 1

    def test_haar_without_shrink_near_lossless(self, small_natural):
        """Test that the pyramid alone at 16 bits is close to lossless."""
        cfg = CodecConfig(technique=Technique.HAAR, levels=3, shrink=ShrinkMode.NONE, bits=16)
        out = decompress(compress(small_natural, cfg))
        diff = np.abs(out.pixels.astype(int) - small_natural.pixels.astype(int))
        assert diff.max() <= 1

    def test_scan_order_irrelevant_for_spatial_klt(self):
        """Test that Morton and row-raster spatial KLT give the same error."""
        img = random_image(seed=3, width=64, height=64)
        morton = decompress(compress(img, CodecConfig(technique=Technique.MORTON_KLT, block=16)))
        raster = decompress(compress(img, CodecConfig(technique=Technique.RASTER_KLT, block=16)))
        assert abs(mse(img, morton) - mse(img, raster)) < 1e-6

    def test_one_level_techniques_agree(self, small_natural):
        """Test that unshrunk pyramid and packet scans at one level code the same planes."""
        outputs = []
        streams = []
        for technique in (Technique.HAAR, Technique.HAAR_MORTON, Technique.HAAR_RASTER):
            cfg = CodecConfig(technique=technique, block=32, levels=1, shrink=ShrinkMode.NONE)
            artifact = compress(small_natural, cfg)
            streams.append(artifact.stream)
            outputs.append(decompress(artifact))
        assert streams[0] == streams[1] == streams[2]
        assert outputs[0] == outputs[1] == outputs[2]

    def test_target_above_channels(self, small_natural):
        """Test that a target CR beyond the channel count is rejected."""
        cfg = CodecConfig(technique=Technique.MORTON_KLT, block=16, target_cr=32.0)
        with pytest.raises(ValidationError):
            compress(small_natural, cfg)

    def test_energy_fraction_sets_kept(self, small_natural):
        """Test that an energy fraction chooses the kept count instead of the target CR."""
        cfg = CodecConfig(technique=Technique.HAAR_MORTON_KLT, block=16, energy=0.5)
        artifact = compress(small_natural, cfg)
        assert 1 <= artifact.klt.kept < 16

    def test_more_channels_less_error(self, small_natural):
        """Test that a lower target CR does not increase the error."""
        errors = []
        for target in (16.0, 4.0, 1.0):
            cfg = CodecConfig(technique=Technique.HAAR_RASTER_KLT, block=16, target_cr=target)
            errors.append(mse(small_natural, decompress(compress(small_natural, cfg))))
        assert errors[0] >= errors[1] >= errors[2]

    def test_noise_applied_before_coding(self, small_natural):
        """Test that a noise spec changes what gets coded."""
        clean = CodecConfig(technique=Technique.HAAR, shrink=ShrinkMode.NONE)
        noisy = CodecConfig(
            technique=Technique.HAAR, shrink=ShrinkMode.NONE, noise=NoiseSpec(0.1, seed=1)
        )
        assert compress(small_natural, clean).stream != compress(small_natural, noisy).stream

    def test_block_not_dividing(self, small_natural):
        """Test that a block that does not divide the image is rejected."""
        with pytest.raises(DimensionError):
            compress(small_natural, CodecConfig(technique=Technique.RASTER_KLT, block=24))

    def test_pyramid_too_deep(self):
        """Test that more levels than the size allows are rejected."""
        img = Image(np.zeros((8, 8), dtype=np.uint8))
        with pytest.raises(DimensionError):
            compress(img, CodecConfig(technique=Technique.HAAR, levels=4))

    def test_inconsistent_symbol_count(self, small_natural):
        """Test that an artifact whose symbol count disagrees with its geometry is rejected."""
        artifact = compress(small_natural, CodecConfig(technique=Technique.HAAR))
        broken = replace(artifact, symbol_count=artifact.symbol_count + 1)
        with pytest.raises(ContainerError):
            decompress(broken)


class TestEncode:
    """Test suite for encode."""

    def test_matches_compress(self, small_natural):
        """Test that encode returns the same artifact as compress."""
        cfg = CodecConfig(technique=Technique.HAAR_RASTER_KLT, block=16)
        artifact, _ = encode(small_natural, cfg)
        assert artifact == compress(small_natural, cfg)

    def test_energy_is_full_fit(self, small_natural):
        """Test that the energy report covers every channel of the coded stack."""
        cfg = CodecConfig(technique=Technique.HAAR_MORTON_KLT, block=16)
        artifact, energy = encode(small_natural, cfg)
        plane = small_natural.pixels.astype(np.float64)
        stack, _ = build_stack(plane, 16, ScanKind.MORTON, True, cfg.shrink)
        expected = klt.energy_report(klt.fit(stack))
        assert artifact.klt.kept == 4
        assert energy.eigenvalues.tolist() == expected.eigenvalues.tolist()
        assert energy.cumulative_fraction.tolist() == expected.cumulative_fraction.tolist()

    @pytest.mark.parametrize("technique", [Technique.HAAR, Technique.HAAR_MORTON])
    def test_no_energy_without_klt(self, small_natural, technique):
        """Test that techniques without a KLT report no energy."""
        _, energy = encode(small_natural, CodecConfig(technique=technique, block=16))
        assert energy is None

    def test_fits_once(self, small_natural, mocker):
        """Test that one encode fits the KLT a single time."""
        fit = mocker.spy(klt, "fit")
        encode(small_natural, CodecConfig(technique=Technique.MORTON_KLT, block=16, energy=0.9))
        assert fit.call_count == 1


class TestCompressionRatio:
    """Test suite for measured compression ratios."""

    def test_measured_cr_uses_container_size(self, small_natural):
        """Test that the ratio divides raw bytes by the serialized size."""
        artifact = compress(small_natural, CodecConfig(technique=Technique.MORTON_KLT, block=16))
        size = compressed_size(artifact)
        assert size == len(serialize(artifact))
        assert measured_cr(artifact, small_natural) == pytest.approx(small_natural.size / size)

    def test_constant_image_compresses_well(self, gray_image):
        """Test that a constant image compresses far below its raw size."""
        artifact = compress(gray_image, CodecConfig(technique=Technique.HAAR, levels=2))
        assert measured_cr(artifact, gray_image) > 4.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
