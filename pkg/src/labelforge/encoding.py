"""Prompt-to-energy encoding.

Each point prompt is expanded into a truncated isotropic Gaussian blob;
the blobs are accumulated into an energy map that seeds the saliency
backend with a coarse per-target outline. Also derives centroid/coarse
prompts from ground-truth masks for benchmark runs.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .core import BinaryMask, FloatMap, Prompt, PromptSet
from .errors import ConfigError

COMBINE_MODES = ("sum", "max")


def _default_truncation(sigma: float) -> int:
    # beyond 3 sigma the blob value is below exp(-4.5) ~ 0.011 of peak
    return int(math.ceil(3.0 * sigma))


@dataclass(frozen=True)
class EnergyConfig:
    """Gaussian blob parameters.

    sigma: peak half-width in pixels.
    truncation_radius: Euclidean radius beyond which the blob is exactly 0;
        defaults to ceil(3 * sigma).
    combine: accumulation rule where blobs overlap; "sum" adds contributions
        (may exceed 1 for near-coincident prompts), "max" keeps the map in [0, 1].
    """

    sigma: float = 4.0
    truncation_radius: int = field(default=0)
    combine: str = "sum"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.truncation_radius == 0:
            object.__setattr__(self, "truncation_radius", _default_truncation(self.sigma))
        if self.truncation_radius < 1:
            raise ConfigError(f"truncation_radius must be >= 1, got {self.truncation_radius}")
        if self.combine not in COMBINE_MODES:
            raise ConfigError(f"combine must be one of {COMBINE_MODES}, got {self.combine!r}")


@dataclass(frozen=True)
class EnergyMap(FloatMap):
    """Energy map together with the prompts that generated it."""

    prompts: PromptSet = field(default_factory=PromptSet)


def gaussian_at(dx: float, dy: float, sigma: float, truncation_radius: int | None = None) -> float:
    """Blob value at offset (dx, dy) from the prompt center.

    Returns exp(-(dx^2 + dy^2) / (2 sigma^2)), hard-zeroed outside the
    truncation radius.
    """
    if sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    if truncation_radius is None:
        truncation_radius = _default_truncation(sigma)
    d2 = dx * dx + dy * dy
    if d2 > truncation_radius * truncation_radius:
        return 0.0
    return math.exp(-d2 / (2.0 * sigma * sigma))


def encode_energy(
    prompts: PromptSet, width: int, height: int, cfg: EnergyConfig | None = None
) -> EnergyMap:
    """Expand every prompt into a Gaussian blob and accumulate.

    Blobs are clipped at the image borders (no wraparound). Overlaps follow
    cfg.combine; disjoint blobs leave a value of exactly 1.0 at each prompt.
    """
    cfg = cfg or EnergyConfig()
    prompts.check_bounds(width, height)

    out = np.zeros((height, width), dtype=np.float64)
    r = cfg.truncation_radius
    inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma)
    for p in prompts:
        x_lo, x_hi = max(0, p.x - r), min(width - 1, p.x + r)
        y_lo, y_hi = max(0, p.y - r), min(height - 1, p.y + r)
        dx = np.arange(x_lo, x_hi + 1, dtype=np.float64) - p.x
        dy = np.arange(y_lo, y_hi + 1, dtype=np.float64) - p.y
        d2 = dy[:, None] ** 2 + dx[None, :] ** 2
        blob = np.exp(-d2 * inv)
        blob[d2 > r * r] = 0.0
        window = out[y_lo : y_hi + 1, x_lo : x_hi + 1]
        if cfg.combine == "sum":
            window += blob
        else:
            np.maximum(window, blob, out=window)
    return EnergyMap(data=out, prompts=prompts)


def _component_seed(rng_seed: int, image_id: str, label: int) -> int:
    digest = hashlib.sha256(f"{rng_seed}|{image_id}|{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def derive_prompts(
    gt: BinaryMask, mode: str, rng_seed: int = 0, image_id: str = ""
) -> PromptSet:
    """One prompt per eight-connected ground-truth component.

    centroid mode: the component centroid rounded to the nearest pixel,
    snapped to the nearest in-component pixel when the rounded point falls
    outside the component. coarse mode: a uniformly random in-component
    pixel from a generator seeded by (rng_seed, image_id, component label),
    so runs are reproducible.
    """
    if mode not in ("centroid", "coarse"):
        raise ConfigError(f"prompt mode must be 'centroid' or 'coarse', got {mode!r}")

    from .postprocess import cluster8  # deferred: postprocess depends on core only

    components = cluster8(gt)
    prompts = []
    for comp in components.clusters:
        if mode == "centroid":
            cx, cy = comp.centroid
            cand = (_round_half_up(cx), _round_half_up(cy))
            if cand not in set(comp.pixels):
                cand = min(
                    comp.pixels,
                    key=lambda p: ((p[0] - cx) ** 2 + (p[1] - cy) ** 2, p[1], p[0]),
                )
            x, y = cand
        else:
            rng = np.random.default_rng(_component_seed(rng_seed, image_id, comp.label))
            x, y = comp.pixels[int(rng.integers(len(comp.pixels)))]
        prompts.append(Prompt(x=x, y=y, kind=mode))
    return PromptSet(image_id=image_id, prompts=tuple(prompts))
