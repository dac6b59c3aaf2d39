"""Evaluation runs and report serialization.

Compares a directory of generated labels against ground truth and writes
the metric report as JSON (full counts), CSV (one row per image), and a
summary figure rendered next to them.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .io import load_mask
from .metrics import ImageMetrics, MetricConfig, MetricReport, aggregate, pd_fa_fat

CSV_HEADER = ("image_id", "iou", "pd", "fa", "fat", "n_all", "t_false")


def _png_ids(directory: Path) -> dict[str, Path]:
    return {p.stem: p for p in sorted(directory.glob("*.png"))}


def evaluate_dirs(
    pred_dir: str | Path, gt_dir: str | Path, cfg: MetricConfig | None = None
) -> MetricReport:
    """Evaluate all matching-named PNG masks in two directories.

    Image ids are PNG basenames; both directories must contain exactly the
    same ids and at least one of them.
    """
    cfg = cfg or MetricConfig()
    pred = _png_ids(Path(pred_dir))
    gt = _png_ids(Path(gt_dir))
    if not pred and not gt:
        raise ValueError(f"no PNG masks found in {pred_dir} or {gt_dir}")
    missing_pred = sorted(set(gt) - set(pred))
    missing_gt = sorted(set(pred) - set(gt))
    if missing_pred or missing_gt:
        parts = []
        if missing_pred:
            parts.append(f"missing predictions for: {', '.join(missing_pred)}")
        if missing_gt:
            parts.append(f"missing ground truth for: {', '.join(missing_gt)}")
        raise ValueError("image id mismatch: " + "; ".join(parts))

    fragments = [
        pd_fa_fat(load_mask(pred[i]), load_mask(gt[i]), cfg, image_id=i) for i in sorted(pred)
    ]
    return aggregate(fragments)


def _fragment_dict(m: ImageMetrics | MetricReport, cfg: MetricConfig) -> dict:
    return {
        "iou": m.iou,
        "pd": m.pd,
        "fa": m.fa * cfg.fa_scale,
        "fat": m.fat,
        "fat_defined": m.fat_defined,
        "counts": {
            "intersection": m.intersection,
            "union": m.union,
            "n_all": m.n_all,
            "detected": m.detected,
            "t_false": m.t_false,
            "false_px": m.false_px,
            "total_px": m.total_px,
        },
    }


def report_to_dict(report: MetricReport, cfg: MetricConfig | None = None) -> dict:
    """JSON-ready report: aggregate ratios and counts plus per-image rows.

    The fa values are pre-multiplied by cfg.fa_scale (default 1e6), which is
    recorded in the document.
    """
    cfg = cfg or MetricConfig()
    doc = _fragment_dict(report, cfg)
    doc["fa_scale"] = cfg.fa_scale
    doc["deviation_px"] = cfg.deviation_px
    doc["per_image"] = [
        {"image_id": f.image_id, **_fragment_dict(f, cfg)} for f in report.per_image
    ]
    return doc


def write_report_csv(report: MetricReport, path, cfg: MetricConfig | None = None) -> None:
    """One row per image: image_id, iou, pd, fa (scaled), fat, n_all, t_false."""
    cfg = cfg or MetricConfig()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for f in report.per_image:
            writer.writerow(
                [f.image_id, repr(f.iou), repr(f.pd), repr(f.fa * cfg.fa_scale), repr(f.fat), f.n_all, f.t_false]
            )


def render_report_figure(report: MetricReport, path, cfg: MetricConfig | None = None) -> None:
    """Per-image metric bars with aggregate reference lines."""
    import matplotlib

    matplotlib.use("Agg")  # file output only, must work without a display
    import matplotlib.pyplot as plt

    cfg = cfg or MetricConfig()
    ids = [f.image_id or str(i) for i, f in enumerate(report.per_image)]
    xs = range(len(ids))

    fig, (ax_iou, ax_tgt) = plt.subplots(2, 1, figsize=(max(6.0, 0.6 * len(ids) + 2), 6.4), sharex=True)
    ax_iou.bar(xs, [f.iou for f in report.per_image], color="#4878cf")
    ax_iou.axhline(report.iou, color="#d65f5f", linewidth=1.2, label=f"dataset IoU {report.iou:.4f}")
    ax_iou.set_ylabel("IoU")
    ax_iou.set_ylim(0.0, 1.05)
    ax_iou.legend(loc="lower right", fontsize=8)

    width = 0.4
    ax_tgt.bar([x - width / 2 for x in xs], [f.pd for f in report.per_image], width, color="#6acc65", label="Pd")
    ax_tgt.bar([x + width / 2 for x in xs], [f.fat for f in report.per_image], width, color="#ee854a", label="Fat")
    ax_tgt.set_ylabel("per-target rates")
    ax_tgt.set_xticks(list(xs))
    ax_tgt.set_xticklabels(ids, rotation=45, ha="right", fontsize=8)
    ax_tgt.legend(loc="upper right", fontsize=8)
    fig.suptitle(
        f"pd {report.pd:.4f} | fa {report.fa * cfg.fa_scale:.3f} (x{1 / cfg.fa_scale:.0e}) "
        f"| fat {report.fat:.4f} | {len(ids)} images"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(
    report: MetricReport,
    report_path: str | Path,
    cfg: MetricConfig | None = None,
    figures: bool = True,
) -> dict[str, str]:
    """Write JSON at report_path plus sibling CSV and figure files.

    Returns the paths written, keyed by kind.
    """
    cfg = cfg or MetricConfig()
    report_path = Path(report_path)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    base = report_path.with_suffix("") if report_path.suffix else report_path

    doc = report_to_dict(report, cfg)
    report_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths = {"json": str(report_path)}

    csv_path = base.with_suffix(".csv")
    write_report_csv(report, csv_path, cfg)
    paths["csv"] = str(csv_path)

    if figures:
        fig_path = Path(str(base) + "_metrics.png")
        render_report_figure(report, fig_path, cfg)
        paths["figure"] = str(fig_path)
    return paths
