"""End-to-end checks of the codec's comparative behaviour on 512x512 images."""

import pytest
from pathlib import Path

import sys

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.models import CodecConfig, ScanKind, ShrinkMode, Technique
from src.services.experiment import eigen_report, resolve_preset, run_experiment, write_results
from src.services.pipeline import compress, measured_cr
from src.services.storage import MANIFEST_NAME, ResultStore

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def exp1_results(natural_512):
    """Noiseless 4:1 run of all seven techniques, keyed by technique."""
    results, _ = run_experiment(natural_512, resolve_preset("exp1"))
    return {r.technique: r for r in results}


class TestEnergyCompaction:
    """Test suite for eigen-energy compaction of packet versus tile stacks."""

    @pytest.mark.parametrize("image", ["natural_512", "natural_512_alt"])
    def test_packets_need_fewer_channels(self, image, request):
        """Test that packet subbands reach 95% energy with fewer channels than tiles."""
        img = request.getfixturevalue(image)
        packet = eigen_report(img, "packet", 64, ScanKind.MORTON, ShrinkMode.SOFT)
        tile = eigen_report(img, "tile", 64, ScanKind.MORTON, ShrinkMode.SOFT)
        assert packet.eigenvalues.size == tile.eigenvalues.size == 64
        assert packet.channels_for(0.95) < tile.channels_for(0.95)


class TestComparativeOrdering:
    """Test suite for the MSE ordering of the techniques at 4:1."""

    @pytest.mark.parametrize(
        "combined, spatial",
        [
            (Technique.HAAR_MORTON_KLT, Technique.MORTON_KLT),
            (Technique.HAAR_RASTER_KLT, Technique.RASTER_KLT),
        ],
    )
    def test_packets_beat_spatial_klt(self, exp1_results, combined, spatial):
        """Test that decorrelating packet subbands beats decorrelating spatial tiles."""
        assert exp1_results[combined].row.mse < exp1_results[spatial].row.mse

    @pytest.mark.parametrize("combined", [Technique.HAAR_MORTON_KLT, Technique.HAAR_RASTER_KLT])
    def test_packets_beat_wavelet(self, exp1_results, combined):
        """Test that decorrelating packet subbands beats the plain wavelet codec."""
        assert exp1_results[combined].row.mse < exp1_results[Technique.HAAR].row.mse

    @pytest.mark.parametrize("spatial", [Technique.MORTON_KLT, Technique.RASTER_KLT])
    def test_wavelet_beats_spatial_klt(self, exp1_results, spatial):
        """Test that the plain wavelet codec beats the spatial KLT."""
        assert exp1_results[Technique.HAAR].row.mse < exp1_results[spatial].row.mse

    def test_kept_channels(self, exp1_results):
        """Test that every KLT technique keeps a quarter of its 64 channels."""
        for technique, result in exp1_results.items():
            if technique.uses_klt:
                assert (result.artifact.klt.n, result.artifact.klt.kept) == (64, 16)


class TestCompressionRatio:
    """Test suite for measured rates at 4:1."""

    def test_packet_klt_rate_near_target(self, natural_512):
        """Test that the unshrunk packet KLT keeping 16 of 64 channels measures close to 4:1."""
        cfg = CodecConfig(
            technique=Technique.HAAR_MORTON_KLT,
            block=64,
            target_cr=4.0,
            shrink=ShrinkMode.NONE,
        )
        assert 3.5 <= measured_cr(compress(natural_512, cfg), natural_512) <= 4.5


class TestScanTriviality:
    """Test suite for scan order without noise."""

    @pytest.mark.parametrize(
        "morton, raster",
        [
            (Technique.MORTON_KLT, Technique.RASTER_KLT),
            (Technique.HAAR_MORTON_KLT, Technique.HAAR_RASTER_KLT),
        ],
    )
    def test_scan_does_not_change_error(self, exp1_results, morton, raster):
        """Test that Morton and row-raster stacks give the same error."""
        assert abs(exp1_results[morton].row.mse - exp1_results[raster].row.mse) < 1e-6


class TestDeterminism:
    """Test suite for byte-identical experiment output."""

    def test_repeated_runs_identical(self, natural_512, temp_dir):
        """Test that two noisy runs with the same seed write identical files."""
        settings = resolve_preset("exp4", seed=42)
        stores = []
        for name in ("first", "second"):
            results, source = run_experiment(natural_512, settings)
            store = ResultStore(temp_dir / name)
            write_results(store, results, noisy=source)
            stores.append(store)

        first, second = stores
        assert first.files == second.files
        for name in list(first.files) + [MANIFEST_NAME]:
            assert first.path_for(name).read_bytes() == second.path_for(name).read_bytes()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
