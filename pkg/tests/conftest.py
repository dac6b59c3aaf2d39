"""Shared fixtures and scene builders for the test suite."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from labelforge import BinaryMask, RasterImage

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden"


def random_mask(rng: np.random.Generator, height: int = 64, width: int = 64,
                density: float = 0.15) -> BinaryMask:
    return BinaryMask((rng.random((height, width)) < density).astype(np.uint8))


def gaussian_scene(
    centers,
    height: int = 64,
    width: int = 64,
    amplitude: float = 0.9,
    sigma: float = 2.0,
    background: float = 0.08,
) -> RasterImage:
    """Dark field with isotropic Gaussian targets at the given (x, y) centers."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    img = np.full((height, width), background, dtype=np.float64)
    for (cx, cy) in centers:
        img += amplitude * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma * sigma))
    return RasterImage(np.clip(img, 0.0, 1.0))


def disk_mask(cx: int, cy: int, radius: int, height: int, width: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    return (((xx - cx) ** 2 + (yy - cy) ** 2) <= radius * radius).astype(np.uint8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260817)


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    if not GOLDEN.is_dir():
        pytest.fail(f"golden fixture directory missing: {GOLDEN} (run scripts/make_golden_fixtures.py)")
    return GOLDEN
