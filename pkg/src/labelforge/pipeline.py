"""End-to-end label generation.

Single-image path: prompts -> energy encoding -> three-channel assembly ->
backend saliency -> threshold -> clustering -> matcher -> final label.
Batch path: the same per manifest image, parallelized across a thread pool,
with labels written as PNGs and a machine-readable run summary.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .assembly import assemble
from .backends import BackendKind, ReferenceBackend, infer
from .core import BinaryMask, ClusterSet, FloatMap, PromptSet, RasterImage
from .encoding import EnergyConfig, EnergyMap, encode_energy
from .io import DatasetManifest, load_image, resolve_prompts, save_mask
from .postprocess import MatchOutcome, PostprocessConfig, apply_matcher, binarize, cluster8

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenerateResult:
    """Everything one pipeline run produced, for callers that inspect more
    than the final label (the service reports clusters and keep decisions)."""

    label: BinaryMask
    saliency: FloatMap
    energy: EnergyMap
    candidates: ClusterSet
    outcome: MatchOutcome | None
    kept_labels: tuple[int, ...]

    def cluster_summaries(self) -> list[dict]:
        kept = set(self.kept_labels)
        out = []
        for c in self.candidates.clusters:
            b = c.bbox
            out.append(
                {
                    "label": c.label,
                    "bbox": [b.x1, b.y1, b.x2, b.y2],
                    "centroid": [c.centroid[0], c.centroid[1]],
                    "kept": c.label in kept,
                }
            )
        return out


def generate_label(
    image: RasterImage,
    prompts: PromptSet,
    backend: BackendKind | None = None,
    energy_cfg: EnergyConfig | None = None,
    post_cfg: PostprocessConfig | None = None,
) -> GenerateResult:
    """Run the full single-image pipeline with the given prompts."""
    backend = backend or ReferenceBackend()
    energy_cfg = energy_cfg or EnergyConfig()
    post_cfg = post_cfg or PostprocessConfig()

    energy = encode_energy(prompts, image.width, image.height, energy_cfg)
    model_input = assemble(image, energy)
    saliency = infer(model_input, energy, backend)
    candidates = cluster8(binarize(saliency, post_cfg.tau_s))
    label, outcome = apply_matcher(candidates, prompts, post_cfg)
    if outcome is None:
        kept = tuple(c.label for c in candidates.clusters)
    else:
        kept = tuple(sorted(outcome.kept_labels()))
    return GenerateResult(
        label=label,
        saliency=saliency,
        energy=energy,
        candidates=candidates,
        outcome=outcome,
        kept_labels=kept,
    )


@dataclass(frozen=True)
class RunSummary:
    """Batch outcome: one entry per image plus failure count and config hash."""

    config_hash: str
    entries: tuple[dict, ...] = field(default=())

    @property
    def failed(self) -> int:
        return sum(1 for e in self.entries if e["status"] != "ok")

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "total": len(self.entries),
            "failed": self.failed,
            "images": list(self.entries),
        }


def _config_hash(backend: BackendKind, energy_cfg: EnergyConfig, post_cfg: PostprocessConfig) -> str:
    doc = {
        "backend": repr(backend),
        "sigma": energy_cfg.sigma,
        "truncation_radius": energy_cfg.truncation_radius,
        "combine": energy_cfg.combine,
        "tau_s": post_cfg.tau_s,
        "matcher": post_cfg.matcher,
        "tpm_radius": post_cfg.tpm_radius,
    }
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run_manifest(
    manifest: DatasetManifest,
    backend: BackendKind | None = None,
    energy_cfg: EnergyConfig | None = None,
    post_cfg: PostprocessConfig | None = None,
    out_dir: str | Path = "out",
    workers: int = 4,
) -> RunSummary:
    """Generate labels for every manifest image.

    Labels land in ``{out_dir}/labels/{image_id}.png`` and a run summary in
    ``{out_dir}/summary.json``. Per-image failures are logged and recorded
    in the summary rather than aborting the batch.
    """
    backend = backend or ReferenceBackend()
    energy_cfg = energy_cfg or EnergyConfig()
    post_cfg = post_cfg or PostprocessConfig()
    out_dir = Path(out_dir)
    labels_dir = out_dir / "labels"
    labels_dir.mkdir(parents=True, exist_ok=True)

    def one(image_id: str) -> dict:
        started = time.perf_counter()
        try:
            image = load_image(manifest.image(image_id).image_path)
            prompts = resolve_prompts(manifest, image_id)
            result = generate_label(image, prompts, backend, energy_cfg, post_cfg)
            label_path = labels_dir / f"{image_id}.png"
            save_mask(result.label, label_path)
            return {
                "image_id": image_id,
                "status": "ok",
                "seconds": round(time.perf_counter() - started, 6),
                "label_path": str(label_path),
                "prompts": len(prompts),
                "kept_clusters": len(result.kept_labels),
            }
        except Exception as e:
            log.exception("label generation failed for %s", image_id)
            return {
                "image_id": image_id,
                "status": "error",
                "seconds": round(time.perf_counter() - started, 6),
                "error": f"{type(e).__name__}: {e}",
            }

    ids = manifest.ids()
    if not ids:
        entries: tuple[dict, ...] = ()
    elif workers <= 1 or len(ids) == 1:
        entries = tuple(one(i) for i in ids)
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(ids))) as pool:
            entries = tuple(pool.map(one, ids))

    summary = RunSummary(config_hash=_config_hash(backend, energy_cfg, post_cfg), entries=entries)
    (out_dir / "summary.json").write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return summary
