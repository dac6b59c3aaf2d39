"""Core raster, mask, geometry, and prompt types.

Conventions used everywhere in this package:

* coordinates are 0-based with ``x`` = column and ``y`` = row,
* pixel data is stored as 2-D numpy arrays indexed ``data[y, x]``,
* intensity images live on a [0, 1] scale.

All types are immutable after construction; array payloads are marked
read-only so instances can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CoordinateError

PROMPT_KINDS = ("centroid", "coarse")

# offsets of the eight neighbours, used by connectivity checks
_NEIGHBORS8 = ((-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1))


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class RasterImage:
    """Single-channel intensity image normalized to [0, 1]."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image data must be 2-D and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image data contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError(
                f"image values must lie in [0, 1], got range [{arr.min()}, {arr.max()}]"
            )
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class BinaryMask:
    """Row-major {0, 1} mask."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"mask data must be 2-D and non-empty, got shape {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mask values must be 0 or 1")
        object.__setattr__(self, "data", _freeze(arr.astype(np.uint8)))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    def count(self) -> int:
        """Number of foreground pixels."""
        return int(self.data.sum())


@dataclass(frozen=True)
class FloatMap:
    """Row-major map of finite real values (saliency, energy, edge maps)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"float map data must be 2-D and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("float map contains non-finite values")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class Prompt:
    """A single user click at pixel (x, y)."""

    x: int
    y: int
    kind: str = "centroid"

    def __post_init__(self):
        if self.kind not in PROMPT_KINDS:
            raise ValueError(f"prompt kind must be one of {PROMPT_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "x", int(self.x))
        object.__setattr__(self, "y", int(self.y))

    def check_bounds(self, width: int, height: int) -> None:
        if not (0 <= self.x < width and 0 <= self.y < height):
            raise CoordinateError(
                f"prompt ({self.x}, {self.y}) is outside the {width}x{height} image"
            )


@dataclass(frozen=True)
class PromptSet:
    """Ordered prompts for one image; duplicate coordinates are rejected."""

    image_id: str = ""
    prompts: tuple[Prompt, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prompts", tuple(self.prompts))
        seen: set[tuple[int, int]] = set()
        for p in self.prompts:
            if (p.x, p.y) in seen:
                raise ValueError(f"duplicate prompt coordinate ({p.x}, {p.y})")
            seen.add((p.x, p.y))

    def __len__(self) -> int:
        return len(self.prompts)

    def __iter__(self):
        return iter(self.prompts)

    def check_bounds(self, width: int, height: int) -> None:
        for p in self.prompts:
            p.check_bounds(width, height)


@dataclass(frozen=True)
class BoundingBox:
    """Inclusive pixel-extent box: x1..x2 columns, y1..y2 rows."""

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        if self.x1 > self.x2 or self.y1 > self.y2:
            raise ValueError(f"degenerate bounding box {self}")

    def contains(self, x: float, y: float) -> bool:
        """Inclusive containment test."""
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2


def bbox_of(pixels) -> BoundingBox:
    """Tight bounding box of a non-empty (x, y) pixel collection."""
    pts = list(pixels)
    if not pts:
        raise ValueError("cannot compute the bounding box of an empty pixel list")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return BoundingBox(min(xs), min(ys), max(xs), max(ys))


def centroid_of(pixels) -> tuple[float, float]:
    """Arithmetic mean of a non-empty (x, y) pixel collection.

    Kept real-valued: downstream matching uses Euclidean distances and
    rounding here would bias them.
    """
    pts = list(pixels)
    if not pts:
        raise ValueError("cannot compute the centroid of an empty pixel list")
    sx = sum(p[0] for p in pts)
    sy = sum(p[1] for p in pts)
    return sx / len(pts), sy / len(pts)


def _is_connected8(pixels: tuple[tuple[int, int], ...]) -> bool:
    remaining = set(pixels)
    stack = [pixels[0]]
    remaining.discard(pixels[0])
    while stack:
        x, y = stack.pop()
        for dx, dy in _NEIGHBORS8:
            q = (x + dx, y + dy)
            if q in remaining:
                remaining.discard(q)
                stack.append(q)
    return not remaining


@dataclass(frozen=True)
class Cluster:
    """One eight-connected foreground component with derived geometry."""

    label: int
    pixels: tuple[tuple[int, int], ...]
    bbox: BoundingBox
    centroid: tuple[float, float]

    @classmethod
    def from_pixels(cls, label: int, pixels) -> "Cluster":
        pts = tuple((int(x), int(y)) for x, y in pixels)
        if not pts:
            raise ValueError("a cluster needs at least one pixel")
        if label <= 0:
            raise ValueError(f"cluster label must be positive, got {label}")
        if not _is_connected8(pts):
            raise ValueError(f"cluster {label} pixels are not eight-connected")
        return cls(label=label, pixels=pts, bbox=bbox_of(pts), centroid=centroid_of(pts))

    def size(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class ClusterSet:
    """Disjoint clusters plus their label map (0 = background, labels 1..m)."""

    label_map: np.ndarray
    clusters: tuple[Cluster, ...] = field(default=())

    def __post_init__(self):
        arr = np.asarray(self.label_map)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"label map must be 2-D and non-empty, got shape {arr.shape}")
        object.__setattr__(self, "label_map", _freeze(arr.astype(np.int32)))
        object.__setattr__(self, "clusters", tuple(self.clusters))

        m = len(self.clusters)
        labels = sorted(c.label for c in self.clusters)
        if labels != list(range(1, m + 1)):
            raise ValueError(f"cluster labels must be dense 1..{m}, got {labels}")
        counts = np.bincount(self.label_map.ravel(), minlength=m + 1)
        if self.label_map.max(initial=0) > m:
            raise ValueError("label map refers to a label with no cluster")
        for c in self.clusters:
            if counts[c.label] != c.size():
                raise ValueError(
                    f"cluster {c.label} has {c.size()} pixels but the label map has {counts[c.label]}"
                )
            x0, y0 = c.pixels[0]
            if self.label_map[y0, x0] != c.label:
                raise ValueError(f"label map disagrees with cluster {c.label} at ({x0}, {y0})")

    @property
    def width(self) -> int:
        return self.label_map.shape[1]

    @property
    def height(self) -> int:
        return self.label_map.shape[0]

    def __len__(self) -> int:
        return len(self.clusters)

    def get(self, label: int) -> Cluster:
        return self.clusters[label - 1]

    def label_at(self, x: int, y: int) -> int:
        return int(self.label_map[y, x])

    def mask_of(self, labels) -> BinaryMask:
        """Binary union of the given cluster labels."""
        wanted = set(labels)
        out = np.isin(self.label_map, sorted(wanted)).astype(np.uint8) if wanted else np.zeros_like(
            self.label_map, dtype=np.uint8
        )
        return BinaryMask(out)


def mask_from_prompts(prompts: PromptSet, width: int, height: int) -> BinaryMask:
    """Binary map with a single 1 at each prompt coordinate."""
    prompts.check_bounds(width, height)
    out = np.zeros((height, width), dtype=np.uint8)
    for p in prompts:
        out[p.y, p.x] = 1
    return BinaryMask(out)
