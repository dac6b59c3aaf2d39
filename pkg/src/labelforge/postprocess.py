"""Saliency post-processing: thresholding, clustering, false-alarm matching.

The matchers decide which candidate clusters survive into the final label:

* ``match_bbox`` keeps the first unclaimed cluster whose bounding box
  contains the prompt point (inclusive), one cluster per prompt.
* ``match_centroid`` keeps clusters whose centroid lies within a radius of
  some prompt, claiming nearest pairs first.
* ``match_membership`` keeps clusters whose pixel set contains a prompt.

Box containment is deliberately inclusive of the box edges: with boxes
defined by min/max pixel indices, an exclusive test could never accept a
prompt sitting on a one-pixel-wide cluster.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import BinaryMask, Cluster, ClusterSet, FloatMap, PromptSet
from .errors import ConfigError, ShapeError

MATCHER_NAMES = ("bbm", "tpm", "erm", "none")

_STRUCTURE8 = np.ones((3, 3), dtype=np.uint8)


@dataclass(frozen=True)
class PostprocessConfig:
    """Threshold and matcher selection for turning saliency into a label."""

    tau_s: float = 0.5
    matcher: str = "bbm"
    tpm_radius: float = 3.0

    def __post_init__(self):
        if not (0.0 < self.tau_s < 1.0):
            raise ConfigError(f"tau_s must lie strictly inside (0, 1), got {self.tau_s}")
        if self.matcher not in MATCHER_NAMES:
            raise ConfigError(f"matcher must be one of {MATCHER_NAMES}, got {self.matcher!r}")
        if self.tpm_radius <= 0:
            raise ConfigError(f"tpm_radius must be positive, got {self.tpm_radius}")


@dataclass(frozen=True)
class MatchOutcome:
    """Bookkeeping of one matcher run.

    kept: (prompt index, cluster label) pairs in claim order.
    removed: cluster labels judged to be false alarms.
    unmatched_prompts: prompt indices that claimed nothing.
    """

    kept: tuple[tuple[int, int], ...]
    removed: tuple[int, ...]
    unmatched_prompts: tuple[int, ...]

    def kept_labels(self) -> set[int]:
        return {label for _, label in self.kept}


def binarize(saliency: FloatMap, tau_s: float = 0.5) -> BinaryMask:
    """Candidate mask: 1 where saliency is strictly greater than tau_s."""
    if not (0.0 < tau_s < 1.0):
        raise ConfigError(f"tau_s must lie strictly inside (0, 1), got {tau_s}")
    return BinaryMask((saliency.data > tau_s).astype(np.uint8))


def cluster8(mask: BinaryMask) -> ClusterSet:
    """Partition foreground pixels into maximal eight-connected components.

    Labels are assigned in raster-scan order of each component's first
    pixel and are dense 1..m.
    """
    raw, count = ndimage.label(mask.data, structure=_STRUCTURE8)
    if count == 0:
        return ClusterSet(label_map=np.zeros_like(mask.data, dtype=np.int32), clusters=())

    flat = raw.ravel()
    nonzero = np.flatnonzero(flat)
    # renumber so labels follow first appearance in the raster scan
    first_seen = {}
    order = []
    for idx in nonzero:
        lab = flat[idx]
        if lab not in first_seen:
            first_seen[lab] = len(order) + 1
            order.append(lab)
    relabel = np.zeros(count + 1, dtype=np.int32)
    for old, new in first_seen.items():
        relabel[old] = new
    label_map = relabel[raw]

    clusters = []
    for new_label in range(1, count + 1):
        ys, xs = np.nonzero(label_map == new_label)
        pixels = tuple(zip(xs.tolist(), ys.tolist()))
        clusters.append(Cluster.from_pixels(new_label, pixels))
    return ClusterSet(label_map=label_map, clusters=tuple(clusters))


def _finalize(candidates: ClusterSet, kept, unmatched) -> tuple[BinaryMask, MatchOutcome]:
    kept_labels = {label for _, label in kept}
    removed = tuple(c.label for c in candidates.clusters if c.label not in kept_labels)
    outcome = MatchOutcome(
        kept=tuple(kept), removed=removed, unmatched_prompts=tuple(unmatched)
    )
    return candidates.mask_of(kept_labels), outcome


def match_bbox(candidates: ClusterSet, prompts: PromptSet) -> tuple[BinaryMask, MatchOutcome]:
    """Keep, per prompt, the first unclaimed cluster whose bounding box contains it.

    Prompts are visited in prompt order and clusters scanned in label order,
    so results are reproducible; a claimed cluster cannot be claimed twice.
    """
    prompts.check_bounds(candidates.width, candidates.height)
    kept: list[tuple[int, int]] = []
    unmatched: list[int] = []
    claimed: set[int] = set()
    for i, p in enumerate(prompts):
        hit = None
        for c in candidates.clusters:
            if c.label not in claimed and c.bbox.contains(p.x, p.y):
                hit = c.label
                break
        if hit is None:
            unmatched.append(i)
        else:
            claimed.add(hit)
            kept.append((i, hit))
    return _finalize(candidates, kept, unmatched)


def match_centroid(
    candidates: ClusterSet, prompts: PromptSet, radius: float = 3.0
) -> tuple[BinaryMask, MatchOutcome]:
    """Keep clusters with a prompt within ``radius`` of their centroid.

    Pairs are claimed globally nearest-first; each prompt claims at most one
    cluster and each cluster is claimed at most once.
    """
    if radius <= 0:
        raise ConfigError(f"radius must be positive, got {radius}")
    prompts.check_bounds(candidates.width, candidates.height)
    pairs = []
    for i, p in enumerate(prompts):
        for c in candidates.clusters:
            cx, cy = c.centroid
            d = math.hypot(p.x - cx, p.y - cy)
            if d <= radius:
                pairs.append((d, i, c.label))
    pairs.sort()
    kept: list[tuple[int, int]] = []
    used_prompts: set[int] = set()
    claimed: set[int] = set()
    for d, i, label in pairs:
        if i in used_prompts or label in claimed:
            continue
        used_prompts.add(i)
        claimed.add(label)
        kept.append((i, label))
    kept.sort()  # report in prompt order
    unmatched = [i for i in range(len(prompts)) if i not in used_prompts]
    return _finalize(candidates, kept, unmatched)


def match_membership(
    candidates: ClusterSet, prompts: PromptSet
) -> tuple[BinaryMask, MatchOutcome]:
    """Keep clusters whose pixel set contains a prompt point."""
    prompts.check_bounds(candidates.width, candidates.height)
    kept: list[tuple[int, int]] = []
    unmatched: list[int] = []
    claimed: set[int] = set()
    for i, p in enumerate(prompts):
        label = candidates.label_at(p.x, p.y)
        if label > 0 and label not in claimed:
            claimed.add(label)
            kept.append((i, label))
        else:
            unmatched.append(i)
    return _finalize(candidates, kept, unmatched)


def apply_matcher(
    candidates: ClusterSet, prompts: PromptSet, cfg: PostprocessConfig
) -> tuple[BinaryMask, MatchOutcome | None]:
    """Dispatch on cfg.matcher; "none" keeps every candidate cluster."""
    if cfg.matcher == "bbm":
        return match_bbox(candidates, prompts)
    if cfg.matcher == "tpm":
        return match_centroid(candidates, prompts, cfg.tpm_radius)
    if cfg.matcher == "erm":
        return match_membership(candidates, prompts)
    all_labels = [c.label for c in candidates.clusters]
    return candidates.mask_of(all_labels), None
