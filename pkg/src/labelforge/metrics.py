"""Pseudo-label quality metrics.

Pixel-level IoU plus target-level detection probability (Pd), false-alarm
pixel rate (Fa), and false-annotated-target rate (Fat). Target matching is
one-to-one between predicted and ground-truth cluster centroids with a
fixed deviation threshold, claimed greedily by ascending distance.

Dataset aggregation is a micro-average: counts are summed across images
and the ratios recomputed, so images with many targets weigh more than a
mean of per-image ratios would allow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BinaryMask, ClusterSet
from .errors import ConfigError, ShapeError
from .postprocess import cluster8


@dataclass(frozen=True)
class MetricConfig:
    """deviation_px: centroid match threshold; fa_scale: Fa reporting multiplier."""

    deviation_px: float = 3.0
    fa_scale: float = 1e6

    def __post_init__(self):
        if self.deviation_px <= 0:
            raise ConfigError(f"deviation_px must be positive, got {self.deviation_px}")
        if self.fa_scale <= 0:
            raise ConfigError(f"fa_scale must be positive, got {self.fa_scale}")


@dataclass(frozen=True)
class TargetMatch:
    """One matched (predicted cluster, ground-truth cluster) pair."""

    pred_label: int
    gt_label: int
    distance: float


@dataclass(frozen=True)
class MetricCounts:
    """Raw counts every ratio derives from.

    intersection/union: pixel counts of pred AND gt / pred OR gt.
    n_all: ground-truth target count; detected: matched gt targets.
    t_false: predicted clusters left unmatched (false annotated targets).
    false_px: pixels with pred=1 and gt=0; total_px: image area.
    """

    intersection: int = 0
    union: int = 0
    n_all: int = 0
    detected: int = 0
    t_false: int = 0
    false_px: int = 0
    total_px: int = 0

    def __post_init__(self):
        fields = (
            self.intersection,
            self.union,
            self.n_all,
            self.detected,
            self.t_false,
            self.false_px,
            self.total_px,
        )
        if any(v < 0 for v in fields):
            raise ValueError(f"metric counts must be non-negative, got {fields}")
        if self.intersection > self.union:
            raise ValueError("intersection cannot exceed union")
        if self.detected > self.n_all:
            raise ValueError("detected targets cannot exceed the ground-truth count")
        if self.false_px > self.total_px:
            raise ValueError("false pixels cannot exceed the pixel total")

    @property
    def iou(self) -> float:
        """Intersection over union; 1.0 when both masks are empty."""
        return 1.0 if self.union == 0 else self.intersection / self.union

    @property
    def pd(self) -> float:
        """Detected fraction of ground-truth targets; 1.0 when there are none."""
        return 1.0 if self.n_all == 0 else self.detected / self.n_all

    @property
    def fa(self) -> float:
        """False-pixel ratio (unscaled)."""
        return 0.0 if self.total_px == 0 else self.false_px / self.total_px

    @property
    def fat(self) -> float:
        """False annotated targets per ground-truth target; 0.0 when undefined."""
        return self.t_false / self.n_all if self.n_all > 0 else 0.0

    @property
    def fat_defined(self) -> bool:
        """False when n_all = 0, i.e. the reported fat of 0.0 is a placeholder."""
        return self.n_all > 0


@dataclass(frozen=True)
class ImageMetrics(MetricCounts):
    """Per-image metric fragment."""

    image_id: str = ""


@dataclass(frozen=True)
class MetricReport(MetricCounts):
    """Dataset-level report: aggregated counts plus the per-image fragments."""

    per_image: tuple[ImageMetrics, ...] = field(default=())


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    """Pixel IoU of two same-shaped masks; 1.0 when both are empty."""
    if pred.data.shape != gt.data.shape:
        raise ShapeError(
            f"pred shape {pred.data.shape} does not match gt shape {gt.data.shape}"
        )
    inter = int(np.logical_and(pred.data, gt.data).sum())
    union = int(np.logical_or(pred.data, gt.data).sum())
    return 1.0 if union == 0 else inter / union


def match_targets(
    pred_clusters: ClusterSet, gt_clusters: ClusterSet, cfg: MetricConfig | None = None
) -> tuple[TargetMatch, ...]:
    """Greedy one-to-one centroid matching.

    All (pred, gt) pairs with centroid distance <= deviation_px are claimed
    in ascending distance order, ties broken by (gt label, pred label); a
    cluster on either side is matched at most once.
    """
    cfg = cfg or MetricConfig()
    if (pred_clusters.height, pred_clusters.width) != (gt_clusters.height, gt_clusters.width):
        raise ShapeError(
            f"cluster sets disagree on image size: "
            f"{(pred_clusters.height, pred_clusters.width)} vs "
            f"{(gt_clusters.height, gt_clusters.width)}"
        )
    pairs = []
    for g in gt_clusters.clusters:
        gx, gy = g.centroid
        for p in pred_clusters.clusters:
            px, py = p.centroid
            d = math.hypot(px - gx, py - gy)
            if d <= cfg.deviation_px:
                pairs.append((d, g.label, p.label))
    pairs.sort()

    matches: list[TargetMatch] = []
    used_pred: set[int] = set()
    used_gt: set[int] = set()
    for d, g_label, p_label in pairs:
        if g_label in used_gt or p_label in used_pred:
            continue
        used_gt.add(g_label)
        used_pred.add(p_label)
        matches.append(TargetMatch(pred_label=p_label, gt_label=g_label, distance=d))
    return tuple(matches)


def pd_fa_fat(
    pred: BinaryMask, gt: BinaryMask, cfg: MetricConfig | None = None, image_id: str = ""
) -> ImageMetrics:
    """Full per-image metric fragment from a (prediction, ground truth) pair."""
    cfg = cfg or MetricConfig()
    if pred.data.shape != gt.data.shape:
        raise ShapeError(
            f"pred shape {pred.data.shape} does not match gt shape {gt.data.shape}"
        )
    pred_clusters = cluster8(pred)
    gt_clusters = cluster8(gt)
    matches = match_targets(pred_clusters, gt_clusters, cfg)

    pred_arr = pred.data.astype(bool)
    gt_arr = gt.data.astype(bool)
    return ImageMetrics(
        image_id=image_id,
        intersection=int(np.logical_and(pred_arr, gt_arr).sum()),
        union=int(np.logical_or(pred_arr, gt_arr).sum()),
        n_all=len(gt_clusters),
        detected=len(matches),
        t_false=len(pred_clusters) - len(matches),
        false_px=int(np.logical_and(pred_arr, ~gt_arr).sum()),
        total_px=pred.width * pred.height,
    )


def aggregate(fragments) -> MetricReport:
    """Micro-average a non-empty collection of per-image fragments."""
    items = tuple(fragments)
    if not items:
        raise ValueError("cannot aggregate an empty list of metric fragments")
    return MetricReport(
        intersection=sum(f.intersection for f in items),
        union=sum(f.union for f in items),
        n_all=sum(f.n_all for f in items),
        detected=sum(f.detected for f in items),
        t_false=sum(f.t_false for f in items),
        false_px=sum(f.false_px for f in items),
        total_px=sum(f.total_px for f in items),
        per_image=items,
    )
