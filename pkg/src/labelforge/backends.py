"""Saliency providers.

Three interchangeable sources of the saliency map consumed by
post-processing:

* ``ReferenceBackend`` — a deterministic classical segmenter based on local
  contrast around each prompt. It exists so the whole pipeline is testable
  without a trained model, and its algorithm is fixed so fixtures stay stable.
* ``PrecomputedBackend`` — loads maps from disk by image id (PNG or TNSR).
* ``RemoteBackend`` — posts the assembled input tensor to an inference
  service and parses the returned map.

Every provider is funneled through :func:`infer`, which enforces the shared
output contract (input-sized map, values in [0, 1]). The full-resolution
energy map travels with every call so backends can fold it into their final
mapping stage; the reference segmenter does so by construction, remote
backends receive it as the third input channel.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests
from scipy import ndimage

from .assembly import ModelInput, check_saliency_contract
from .core import FloatMap, RasterImage
from .encoding import EnergyMap
from .errors import ConfigError, FormatError, TransportError
from .io import load_floatmap, load_image, tnsr_from_bytes, tnsr_to_bytes

_STRUCTURE8 = np.ones((3, 3), dtype=np.uint8)


@dataclass(frozen=True)
class ReferenceSegmenterConfig:
    """Local-contrast segmenter parameters.

    window: Chebyshev radius where the background ring starts (ring spans
        window .. window + 2 around the seed).
    growth_factor: interpolation weight in (0, 1] placing the growth
        threshold between background mean and peak.
    max_radius: Chebyshev growth cap from the seed.
    """

    window: int = 8
    growth_factor: float = 0.5
    max_radius: int = 16

    def __post_init__(self):
        if self.window < 2:
            raise ConfigError(f"window must be >= 2, got {self.window}")
        if not (0.0 < self.growth_factor <= 1.0):
            raise ConfigError(f"growth_factor must be in (0, 1], got {self.growth_factor}")
        if self.max_radius < 1:
            raise ConfigError(f"max_radius must be >= 1, got {self.max_radius}")


def _snap_seed(data: np.ndarray, x: int, y: int) -> tuple[int, int]:
    """Brightest pixel in the 5x5 neighborhood; first in row-major order on ties."""
    h, w = data.shape
    x_lo, x_hi = max(0, x - 2), min(w - 1, x + 2)
    y_lo, y_hi = max(0, y - 2), min(h - 1, y + 2)
    patch = data[y_lo : y_hi + 1, x_lo : x_hi + 1]
    idx = int(np.argmax(patch))
    dy, dx = divmod(idx, patch.shape[1])
    return x_lo + dx, y_lo + dy


def _ring_mean(data: np.ndarray, sx: int, sy: int, inner: int) -> float | None:
    """Mean over the Chebyshev ring inner .. inner+2 around (sx, sy).

    Returns None when the ring is entirely outside the image.
    """
    outer = inner + 2
    h, w = data.shape
    x_lo, x_hi = max(0, sx - outer), min(w - 1, sx + outer)
    y_lo, y_hi = max(0, sy - outer), min(h - 1, sy + outer)
    xs = np.arange(x_lo, x_hi + 1)
    ys = np.arange(y_lo, y_hi + 1)
    cheb = np.maximum(np.abs(ys[:, None] - sy), np.abs(xs[None, :] - sx))
    sel = (cheb >= inner) & (cheb <= outer)
    if not sel.any():
        return None
    return float(data[y_lo : y_hi + 1, x_lo : x_hi + 1][sel].mean())


def reference_segment(
    image: RasterImage, energy: EnergyMap, cfg: ReferenceSegmenterConfig | None = None
) -> FloatMap:
    """Deterministic local-contrast saliency around each prompt.

    Per prompt: snap the seed to the brightest pixel in a 5x5 neighborhood,
    estimate the background as the mean over the square ring at Chebyshev
    radius window..window+2, grow the eight-connected region of pixels with
    intensity >= bg + growth_factor * (peak - bg) capped at Chebyshev
    max_radius from the seed, and write normalized contrast
    (intensity - bg) / (peak - bg) clamped to [0, 1] inside the region.
    Overlapping regions take the elementwise max. A flat neighborhood
    (peak <= bg, or no ring pixels inside the image) contributes nothing.
    """
    cfg = cfg or ReferenceSegmenterConfig()
    data = image.data
    h, w = data.shape
    out = np.zeros((h, w), dtype=np.float64)

    for p in energy.prompts:
        p.check_bounds(w, h)
        sx, sy = _snap_seed(data, p.x, p.y)
        peak = float(data[sy, sx])
        mu_bg = _ring_mean(data, sx, sy, cfg.window)
        if mu_bg is None or peak <= mu_bg:
            continue
        threshold = mu_bg + cfg.growth_factor * (peak - mu_bg)

        r = cfg.max_radius
        x_lo, x_hi = max(0, sx - r), min(w - 1, sx + r)
        y_lo, y_hi = max(0, sy - r), min(h - 1, sy + r)
        window = data[y_lo : y_hi + 1, x_lo : x_hi + 1]
        candidates = window >= threshold
        labels, count = ndimage.label(candidates, structure=_STRUCTURE8)
        seed_label = labels[sy - y_lo, sx - x_lo]
        if seed_label == 0:
            continue
        region = labels == seed_label
        values = np.clip((window - mu_bg) / (peak - mu_bg), 0.0, 1.0)
        target = out[y_lo : y_hi + 1, x_lo : x_hi + 1]
        np.maximum(target, np.where(region, values, 0.0), out=target)

    return FloatMap(out)


@dataclass(frozen=True)
class ReferenceBackend:
    """Classical local-contrast segmenter; pure and bit-reproducible."""

    config: ReferenceSegmenterConfig = field(default_factory=ReferenceSegmenterConfig)


@dataclass(frozen=True)
class PrecomputedBackend:
    """Loads saliency maps from disk.

    pattern is a path template where the literal token ``{image_id}`` is
    replaced per image; a pattern without the token names a single file.
    ``.png`` files load through the image path (8/16-bit grayscale, values
    scaled to [0, 1]); ``.tnsr`` files load as one-channel tensors.
    """

    pattern: str

    def __post_init__(self):
        if not self.pattern:
            raise ConfigError("precomputed pattern must be a non-empty path")

    def path_for(self, image_id: str) -> Path:
        return Path(self.pattern.replace("{image_id}", image_id))


@dataclass(frozen=True)
class RemoteBackend:
    """HTTP inference client.

    Posts the assembled (image, edges, energy) tensor as a TNSR body to
    ``{endpoint}/infer`` and expects a one-channel TNSR back with status
    200; any other status or a connection failure counts as one failed
    attempt. In-flight requests are bounded by ``max_inflight``.
    """

    endpoint: str
    timeout_ms: int = 10_000
    retries: int = 2
    max_inflight: int = 4
    _gate: threading.BoundedSemaphore = field(
        init=False, repr=False, compare=False, default=None
    )

    def __post_init__(self):
        if not self.endpoint:
            raise ConfigError("remote endpoint must be a non-empty URL")
        if self.timeout_ms <= 0:
            raise ConfigError(f"timeout_ms must be positive, got {self.timeout_ms}")
        if self.retries < 0:
            raise ConfigError(f"retries must be >= 0, got {self.retries}")
        if self.max_inflight < 1:
            raise ConfigError(f"max_inflight must be >= 1, got {self.max_inflight}")
        object.__setattr__(self, "_gate", threading.BoundedSemaphore(self.max_inflight))

    def fetch(self, body: bytes) -> np.ndarray:
        """POST the tensor body, retrying transient failures.

        Raises TransportError carrying the endpoint and the number of
        attempts made once all tries are exhausted. Never mutates any
        pipeline state, so retries are idempotent.
        """
        url = self.endpoint.rstrip("/") + "/infer"
        attempts = self.retries + 1
        last_failure = "no attempt made"
        for _ in range(attempts):
            try:
                with self._gate:
                    resp = requests.post(
                        url,
                        data=body,
                        headers={"Content-Type": "application/octet-stream"},
                        timeout=self.timeout_ms / 1000.0,
                    )
            except requests.RequestException as e:
                last_failure = f"{type(e).__name__}: {e}"
                continue
            if resp.status_code != 200:
                last_failure = f"status {resp.status_code}"
                continue
            return tnsr_from_bytes(resp.content)
        raise TransportError(
            f"inference request to {url} failed after {attempts} attempt(s): {last_failure}",
            endpoint=self.endpoint,
            attempts=attempts,
        )


BackendKind = ReferenceBackend | PrecomputedBackend | RemoteBackend


def parse_backend_spec(spec: str) -> BackendKind:
    """Parse CLI backend notation.

    ``reference`` | ``precomputed:PATTERN`` | ``remote:URL``
    """
    if spec == "reference":
        return ReferenceBackend()
    if spec.startswith("precomputed:"):
        return PrecomputedBackend(pattern=spec[len("precomputed:") :])
    if spec.startswith("remote:"):
        return RemoteBackend(endpoint=spec[len("remote:") :])
    raise ConfigError(
        f"unknown backend spec {spec!r}; expected 'reference', 'precomputed:PATTERN' "
        "or 'remote:URL'"
    )


def _infer_precomputed(kind: PrecomputedBackend, image_id: str) -> FloatMap:
    path = kind.path_for(image_id)
    if not path.is_file():
        raise FileNotFoundError(f"precomputed saliency not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".png":
        return FloatMap(load_image(path).data)
    if suffix == ".tnsr":
        return load_floatmap(path)
    raise FormatError(f"precomputed saliency must be .png or .tnsr, got {path}")


def infer(model_input: ModelInput, energy: EnergyMap, kind: BackendKind) -> FloatMap:
    """Obtain a saliency map from the selected backend.

    Output is validated against the shared contract: same dimensions as the
    input, all values in [0, 1]. Reference and precomputed kinds are pure
    functions of their inputs.
    """
    if isinstance(kind, ReferenceBackend):
        raw = reference_segment(RasterImage(model_input.image.data), energy, kind.config)
    elif isinstance(kind, PrecomputedBackend):
        raw = _infer_precomputed(kind, energy.prompts.image_id)
    elif isinstance(kind, RemoteBackend):
        tensor = kind.fetch(tnsr_to_bytes(model_input.stacked()))
        if tensor.shape[0] != 1:
            raise FormatError(
                f"remote backend returned {tensor.shape[0]} channels, expected 1"
            )
        raw = FloatMap(tensor[0].astype(np.float64))
    else:
        raise ConfigError(f"unknown backend kind {type(kind).__name__}")
    return check_saliency_contract(model_input, raw)
