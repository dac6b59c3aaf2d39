#!/usr/bin/env python3
"""Build the committed golden fixture set under tests/fixtures/golden/.

Ten synthetic 96x96 scenes with one to three compact bright targets on a
noisy gradient background, their ground-truth masks (the half-amplitude
level set of each target), a dataset manifest, the labels the default
pipeline (reference backend, bbox matcher) produces for them, and the
metric report those labels score against the ground truth.

The regression suite compares freshly generated labels against these files
byte for byte, so regenerate only on an intentional pipeline change and
commit the result.
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from labelforge import (  # noqa: E402
    BinaryMask,
    RasterImage,
    evaluate_dirs,
    load_manifest,
    report_to_dict,
    run_manifest,
    save_image,
    save_mask,
)

ROOT = Path(__file__).resolve().parents[1]
GOLDEN = ROOT / "tests" / "fixtures" / "golden"
SIZE = 96
SEED = 613
N_IMAGES = 10

# 3x3 grid of candidate centers, 28 px apart, 20 px from the borders;
# +-4 px jitter keeps any two targets at least 20 px apart.
GRID = [(x, y) for y in (20, 48, 76) for x in (20, 48, 76)]


def render_scene(rng: np.random.Generator):
    """One image and its ground truth; returns (image, gt, target count)."""
    n_targets = int(rng.integers(1, 4))
    cells = rng.choice(len(GRID), size=n_targets, replace=False)

    yy, xx = np.mgrid[0:SIZE, 0:SIZE].astype(np.float64)
    # slowly varying background plus uniform pixel noise
    base = 0.06 + 0.02 * (xx + yy) / (2 * SIZE)
    img = base + rng.uniform(0.0, 0.02, size=(SIZE, SIZE))
    gt = np.zeros((SIZE, SIZE), dtype=np.uint8)

    for cell in cells:
        gx, gy = GRID[cell]
        cx = gx + float(rng.uniform(-4, 4))
        cy = gy + float(rng.uniform(-4, 4))
        amp = float(rng.uniform(0.72, 0.9))
        sigma = float(rng.uniform(1.6, 2.6))
        contribution = amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * sigma**2))
        img += contribution
        gt |= (contribution >= 0.5 * amp).astype(np.uint8)

    return RasterImage(np.clip(img, 0.0, 1.0)), BinaryMask(gt), n_targets


def main() -> int:
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    for sub in ("images", "gt", "labels"):
        (GOLDEN / sub).mkdir(parents=True)

    rng = np.random.default_rng(SEED)
    entries = []
    for i in range(N_IMAGES):
        image_id = f"scene{i:02d}"
        image, gt, n_targets = render_scene(rng)
        save_image(image, GOLDEN / "images" / f"{image_id}.png")
        save_mask(gt, GOLDEN / "gt" / f"{image_id}.png")
        entries.append(
            {
                "image_id": image_id,
                "image_path": f"images/{image_id}.png",
                "gt_path": f"gt/{image_id}.png",
                "prompt_source": {"type": "derive_centroid"},
            }
        )
        print(f"{image_id}: {n_targets} target(s), {int(gt.count())} gt px")

    manifest_path = GOLDEN / "manifest.json"
    manifest_path.write_text(json.dumps({"version": 1, "images": entries}, indent=2) + "\n")

    # generate labels with the default pipeline, keep only the PNGs
    # (summary.json carries wall-clock timings, which are not reproducible)
    manifest = load_manifest(manifest_path)
    with tempfile.TemporaryDirectory() as tmp:
        summary = run_manifest(manifest, out_dir=tmp, workers=1)
        if summary.failed:
            print("label generation failed:", summary.to_dict(), file=sys.stderr)
            return 1
        for image_id in manifest.ids():
            shutil.copyfile(
                Path(tmp) / "labels" / f"{image_id}.png",
                GOLDEN / "labels" / f"{image_id}.png",
            )

    report = evaluate_dirs(GOLDEN / "labels", GOLDEN / "gt")
    doc = report_to_dict(report)
    (GOLDEN / "report.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(
        f"dataset: iou={report.iou:.6f} pd={report.pd:.6f} "
        f"fa(x1e-6)={report.fa * 1e6:.4f} fat={report.fat:.6f}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
