"""Shared fixtures: deterministic synthetic images."""

import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.models import Image


def _smooth_field(rng: np.random.Generator, size: int, sigma: float) -> np.ndarray:
    """White noise low-pass filtered with a Gaussian of ``sigma`` pixels, unit std."""
    noise = rng.standard_normal((size, size))
    freqs = np.fft.fftfreq(size)
    fy, fx = np.meshgrid(freqs, freqs, indexing="ij")
    kernel = np.exp(-2.0 * (np.pi * sigma) ** 2 * (fx * fx + fy * fy))
    field = np.real(np.fft.ifft2(np.fft.fft2(noise) * kernel))
    return (field - field.mean()) / field.std()


def natural_image(seed: int, size: int = 512) -> Image:
    """
    Grayscale image with natural-image statistics.

    Large smooth regions carry most of the energy, with medium-scale texture
    and a little fine grain on top, so neighbouring pixels are strongly
    correlated the way photographs are.
    """
    rng = np.random.default_rng(seed)
    plane = (
        128.0
        + 35.0 * _smooth_field(rng, size, 24.0)
        + 12.0 * _smooth_field(rng, size, 3.0)
        + 2.0 * rng.standard_normal((size, size))
    )
    return Image(np.clip(np.rint(plane), 0, 255).astype(np.uint8))


def random_image(seed: int, width: int, height: int) -> Image:
    """Uniformly random 8-bit image."""
    rng = np.random.default_rng(seed)
    return Image(rng.integers(0, 256, size=(height, width), dtype=np.uint8))


@pytest.fixture(scope="session")
def natural_512():
    """512x512 natural-like image."""
    return natural_image(seed=7)


@pytest.fixture(scope="session")
def natural_512_alt():
    """A second, independent 512x512 natural-like image."""
    return natural_image(seed=2024)


@pytest.fixture
def small_natural():
    """64x64 natural-like image for fast codec tests."""
    return natural_image(seed=11, size=64)


@pytest.fixture
def gray_image():
    """64x64 constant gray image."""
    return Image(np.full((64, 64), 137, dtype=np.uint8))


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    tmpdir = tempfile.mkdtemp()
    yield Path(tmpdir)
    shutil.rmtree(tmpdir)
