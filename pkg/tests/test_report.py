"""Evaluation over mask directories and report serialization."""

import csv
import json

import numpy as np
import pytest

from labelforge import (
    BinaryMask,
    MetricConfig,
    evaluate_dirs,
    pd_fa_fat,
    report_to_dict,
    save_mask,
    write_report,
)
from labelforge.report import CSV_HEADER, aggregate


def write_pair(tmp_path, image_id, pred, gt):
    (tmp_path / "pred").mkdir(exist_ok=True)
    (tmp_path / "gt").mkdir(exist_ok=True)
    save_mask(BinaryMask(pred.astype(np.uint8)), tmp_path / "pred" / f"{image_id}.png")
    save_mask(BinaryMask(gt.astype(np.uint8)), tmp_path / "gt" / f"{image_id}.png")


def block(h, w, y, x, size=3):
    arr = np.zeros((h, w), dtype=np.uint8)
    arr[y : y + size, x : x + size] = 1
    return arr


class TestEvaluateDirs:
    def test_perfect_directory_pair(self, tmp_path):
        for i in range(3):
            m = block(32, 32, 4 + 6 * i, 10)
            write_pair(tmp_path, f"im{i}", m, m)
        report = evaluate_dirs(tmp_path / "pred", tmp_path / "gt")
        assert report.iou == 1.0
        assert report.pd == 1.0
        assert report.fa == 0.0
        assert report.fat == 0.0
        assert len(report.per_image) == 3
        assert [f.image_id for f in report.per_image] == ["im0", "im1", "im2"]

    def test_counts_match_per_image_evaluation(self, tmp_path, rng):
        preds, gts = {}, {}
        for i in range(4):
            preds[f"im{i}"] = (rng.random((24, 24)) < 0.1).astype(np.uint8)
            gts[f"im{i}"] = (rng.random((24, 24)) < 0.1).astype(np.uint8)
            write_pair(tmp_path, f"im{i}", preds[f"im{i}"], gts[f"im{i}"])
        report = evaluate_dirs(tmp_path / "pred", tmp_path / "gt")
        expected = aggregate(
            [
                pd_fa_fat(BinaryMask(preds[i]), BinaryMask(gts[i]), image_id=i)
                for i in sorted(preds)
            ]
        )
        assert report.intersection == expected.intersection
        assert report.union == expected.union
        assert report.n_all == expected.n_all
        assert report.detected == expected.detected
        assert report.t_false == expected.t_false
        assert report.false_px == expected.false_px

    def test_id_mismatch_lists_both_directions(self, tmp_path):
        write_pair(tmp_path, "both", block(16, 16, 2, 2), block(16, 16, 2, 2))
        save_mask(BinaryMask(block(16, 16, 2, 2)), tmp_path / "pred" / "pred_only.png")
        save_mask(BinaryMask(block(16, 16, 2, 2)), tmp_path / "gt" / "gt_only.png")
        with pytest.raises(ValueError, match="gt_only") as exc:
            evaluate_dirs(tmp_path / "pred", tmp_path / "gt")
        assert "pred_only" in str(exc.value)

    def test_empty_directories_rejected(self, tmp_path):
        (tmp_path / "pred").mkdir()
        (tmp_path / "gt").mkdir()
        with pytest.raises(ValueError, match="no PNG masks"):
            evaluate_dirs(tmp_path / "pred", tmp_path / "gt")


def sample_report(tmp_path, rng):
    for i in range(3):
        gt = block(32, 32, 6, 6 + 2 * i)
        pred = block(32, 32, 6, 6)
        write_pair(tmp_path, f"im{i}", pred, gt)
    return evaluate_dirs(tmp_path / "pred", tmp_path / "gt")


class TestReportSerialization:
    def test_dict_layout(self, tmp_path, rng):
        report = sample_report(tmp_path, rng)
        doc = report_to_dict(report)
        assert doc["fa_scale"] == 1e6
        assert doc["deviation_px"] == 3.0
        assert len(doc["per_image"]) == 3
        assert doc["counts"]["total_px"] == 3 * 32 * 32
        row = doc["per_image"][0]
        assert row["image_id"] == "im0"
        assert row["iou"] == 1.0
        # fa is stored pre-scaled
        im2 = doc["per_image"][2]
        assert im2["fa"] == pytest.approx(im2["counts"]["false_px"] / 1024 * 1e6)

    def test_write_report_produces_three_files(self, tmp_path, rng):
        report = sample_report(tmp_path, rng)
        paths = write_report(report, tmp_path / "report.json")
        assert set(paths) == {"json", "csv", "figure"}
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["counts"]["n_all"] == 3
        with open(paths["csv"], newline="") as fh:
            rows = list(csv.reader(fh))
        assert tuple(rows[0]) == CSV_HEADER
        assert len(rows) == 4
        assert rows[1][0] == "im0"
        assert float(rows[1][1]) == 1.0
        png = (tmp_path / "report_metrics.png").read_bytes()
        assert png[:8] == b"\x89PNG\r\n\x1a\n"

    def test_figures_can_be_disabled(self, tmp_path, rng):
        report = sample_report(tmp_path, rng)
        paths = write_report(report, tmp_path / "r.json", figures=False)
        assert set(paths) == {"json", "csv"}
        assert not (tmp_path / "r_metrics.png").exists()

    def test_csv_floats_round_trip_exactly(self, tmp_path, rng):
        report = sample_report(tmp_path, rng)
        paths = write_report(report, tmp_path / "r.json", figures=False)
        with open(paths["csv"], newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        for row, frag in zip(rows, report.per_image):
            assert float(row[1]) == frag.iou
            assert float(row[2]) == frag.pd
            assert float(row[3]) == frag.fa * 1e6
            assert float(row[4]) == frag.fat
            assert int(row[5]) == frag.n_all

    def test_custom_fa_scale_recorded(self, tmp_path, rng):
        report = sample_report(tmp_path, rng)
        cfg = MetricConfig(fa_scale=1e3)
        doc = report_to_dict(report, cfg)
        assert doc["fa_scale"] == 1e3
        assert doc["fa"] == pytest.approx(report.fa * 1e3)
