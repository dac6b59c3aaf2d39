"""Backbone input assembly.

Builds the fixed three-channel backend input (intensity, edge magnitude,
prompt energy) and states the contract every saliency backend must honor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import FloatMap, RasterImage
from .encoding import EnergyMap
from .errors import ContractError, ShapeError

CHANNEL_ORDER = ("image", "edges", "energy")


@dataclass(frozen=True)
class ModelInput:
    """Ordered (image, edges, energy) channels of identical dimensions."""

    image: FloatMap
    edges: FloatMap
    energy: FloatMap

    def __post_init__(self):
        shapes = {c.data.shape for c in self.channels}
        if len(shapes) != 1:
            raise ShapeError(f"model input channels disagree on shape: {sorted(shapes)}")

    @property
    def channels(self) -> tuple[FloatMap, FloatMap, FloatMap]:
        return (self.image, self.edges, self.energy)

    @property
    def width(self) -> int:
        return self.image.width

    @property
    def height(self) -> int:
        return self.image.height

    def stacked(self) -> np.ndarray:
        """Channel-major (3, H, W) float array."""
        return np.stack([c.data for c in self.channels], axis=0)


def sobel(image: RasterImage) -> FloatMap:
    """Gradient magnitude from the standard 3x3 Sobel kernels.

    Borders are handled by replication (clamp to edge) and the result is
    rescaled by its global maximum into [0, 1]; a flat image yields an
    all-zero map.
    """
    data = image.data
    gx = ndimage.sobel(data, axis=1, mode="nearest")
    gy = ndimage.sobel(data, axis=0, mode="nearest")
    mag = np.sqrt(gx * gx + gy * gy)
    peak = mag.max()
    if peak > 0:
        mag /= peak
    return FloatMap(mag)


def assemble(image: RasterImage, energy: EnergyMap) -> ModelInput:
    """Concatenate (image, sobel(image), energy); channel contents are untouched."""
    if image.data.shape != energy.data.shape:
        raise ShapeError(
            f"image shape {image.data.shape} does not match energy shape {energy.data.shape}"
        )
    return ModelInput(
        image=FloatMap(image.data),
        edges=sobel(image),
        energy=FloatMap(energy.data),
    )


def check_saliency_contract(model_input: ModelInput, saliency: FloatMap) -> FloatMap:
    """Validate a backend's output against its obligations.

    The saliency map must match the input dimensions and lie in [0, 1].
    Violations raise ContractError rather than being silently clamped.
    """
    if saliency.data.shape != model_input.image.data.shape:
        raise ContractError(
            f"backend returned shape {saliency.data.shape}, "
            f"expected {model_input.image.data.shape}"
        )
    lo, hi = float(saliency.data.min()), float(saliency.data.max())
    if lo < 0.0 or hi > 1.0:
        raise ContractError(f"backend saliency values outside [0, 1]: range [{lo}, {hi}]")
    return saliency
