"""Tests for the .uic container."""

import struct
import pytest
from pathlib import Path

import sys

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.config import MAGIC
from src.exceptions import ContainerError
from src.models import CodecConfig, Technique
from src.services.container import FIXED_SIZE, deserialize, header_size, serialize
from src.services.pipeline import compress, decompress


class TestRoundTrip:
    """Test suite for serialize and deserialize."""

    @pytest.mark.parametrize("technique", list(Technique))
    def test_identity_for_every_technique(self, small_natural, technique):
        """Test that deserialize inverts serialize."""
        cfg = CodecConfig(technique=technique, block=16, target_cr=4.0, levels=2)
        artifact = compress(small_natural, cfg)
        restored = deserialize(serialize(artifact))
        assert restored == artifact
        assert decompress(restored) == decompress(artifact)

    def test_serialize_deterministic(self, small_natural):
        """Test that equal artifacts serialize to equal bytes."""
        cfg = CodecConfig(technique=Technique.HAAR_MORTON_KLT, block=16)
        assert serialize(compress(small_natural, cfg)) == serialize(compress(small_natural, cfg))

    def test_klt_side_info_shape(self, small_natural):
        """Test that a restored model carries only its kept columns."""
        cfg = CodecConfig(technique=Technique.MORTON_KLT, block=16, target_cr=4.0)
        restored = deserialize(serialize(compress(small_natural, cfg)))
        assert restored.klt.n == 16
        assert restored.klt.kept == 4
        assert restored.klt.basis.shape == (16, 4)
        assert restored.klt.eigenvalues.shape == (4,)


class TestHeaderSize:
    """Test suite for header_size."""

    def test_pyramid_header(self, small_natural):
        """Test the fixed header plus one quant entry per plane."""
        artifact = compress(small_natural, CodecConfig(technique=Technique.HAAR, levels=1))
        assert header_size(artifact) == FIXED_SIZE + 8 * 4

    def test_header_small_against_raw(self, natural_512):
        """Test that the header stays below 1% of the raw image size."""
        cfg = CodecConfig(technique=Technique.HAAR_MORTON_KLT, block=64, target_cr=4.0)
        artifact = compress(natural_512, cfg)
        assert header_size(artifact) < 0.01 * natural_512.size


class TestRejection:
    """Test suite for corrupt containers."""

    @pytest.fixture
    def data(self, small_natural):
        """Serialized row-raster KLT artifact."""
        cfg = CodecConfig(technique=Technique.RASTER_KLT, block=16)
        return serialize(compress(small_natural, cfg))

    def test_bad_magic(self, data):
        """Test that a wrong magic is rejected."""
        with pytest.raises(ContainerError, match="magic"):
            deserialize(b"JUNK" + data[4:])

    def test_version_mismatch(self, data):
        """Test that another format version is rejected."""
        bumped = data[:4] + struct.pack("<H", 99) + data[6:]
        with pytest.raises(ContainerError, match="version"):
            deserialize(bumped)

    def test_truncated(self, data):
        """Test that a cut container is rejected."""
        with pytest.raises(ContainerError, match="Truncated"):
            deserialize(data[:-10])

    def test_too_short(self):
        """Test that a few bytes are rejected as truncated."""
        with pytest.raises(ContainerError, match="Truncated"):
            deserialize(MAGIC + b"\x01\x00")

    def test_trailing_bytes(self, data):
        """Test that extra bytes after the trailer are rejected."""
        with pytest.raises(ContainerError, match="trailing"):
            deserialize(data + b"\x00")

    @pytest.mark.parametrize("offset", [6, 7, 9, 12, 16, 24])
    def test_flipped_header_byte(self, data, offset):
        """Test that a flipped byte in the fixed header is always caught."""
        corrupted = bytearray(data)
        corrupted[offset] ^= 0x01
        with pytest.raises(ContainerError):
            deserialize(bytes(corrupted))

    def test_flipped_payload_byte(self, data):
        """Test that the checksum catches payload corruption."""
        corrupted = bytearray(data)
        corrupted[-8] ^= 0xFF
        with pytest.raises(ContainerError, match="checksum"):
            deserialize(bytes(corrupted))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
