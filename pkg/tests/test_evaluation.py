"""Metrics and report emission: AUC oracle, ROC identity, thresholds, files."""

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from provdetect.errors import SingleClass
from provdetect.evaluation import (
    DETECTOR_COLUMNS,
    ConfusionCounts,
    ReportCell,
    ThresholdRule,
    auc_roc,
    classify,
    emit_report,
    roc_curve,
    select_threshold,
)


def auc_brute_force(scores, labels):
    """O(n²) pair-counting oracle: P(pos > neg) + ½·P(pos == neg)."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p, q in itertools.product(pos, neg):
        if p > q:
            total += 1.0
        elif p == q:
            total += 0.5
    return total / (len(pos) * len(neg))


def trapezoid_area(points):
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * 0.5 * (y0 + y1)
    return area


class TestAUC:
    def test_perfect_separation(self):
        assert auc_roc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_inverted(self):
        assert auc_roc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_all_tied_is_half(self):
        assert auc_roc([0.5] * 6, [0, 1, 0, 1, 0, 1]) == 0.5

    def test_single_class_raises(self):
        with pytest.raises(SingleClass):
            auc_roc([0.1, 0.2], [0, 0])
        with pytest.raises(SingleClass):
            auc_roc([0.1, 0.2], [1, 1])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            auc_roc([0.1, float("nan")], [0, 1])

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_brute_force_with_ties(self, seed):
        rs = np.random.RandomState(seed)
        n = 60
        scores = np.round(rs.uniform(0, 1, n), 2)  # rounding forces ties
        labels = rs.randint(0, 2, n)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        assert abs(auc_roc(scores, labels) - auc_brute_force(scores, labels)) <= 1e-12

    def test_monotone_transform_invariance(self):
        rs = np.random.RandomState(3)
        scores = rs.uniform(-2, 2, 50)
        labels = rs.randint(0, 2, 50)
        labels[0], labels[1] = 0, 1
        assert auc_roc(scores, labels) == pytest.approx(
            auc_roc(np.exp(scores), labels), abs=1e-12
        )


class TestROC:
    def test_starts_and_ends(self):
        points = roc_curve([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
        assert tuple(points[0]) == (0.0, 0.0)
        assert tuple(points[-1]) == (1.0, 1.0)

    def test_monotone_axes(self):
        rs = np.random.RandomState(5)
        scores = np.round(rs.uniform(0, 1, 80), 2)
        labels = rs.randint(0, 2, 80)
        labels[:2] = [0, 1]
        points = roc_curve(scores, labels)
        assert np.all(np.diff(points[:, 0]) >= 0)
        assert np.all(np.diff(points[:, 1]) >= 0)

    @pytest.mark.parametrize("seed", range(10))
    def test_trapezoid_equals_rank_auc(self, seed):
        rs = np.random.RandomState(seed)
        scores = np.round(rs.uniform(0, 1, 70), 2)
        labels = rs.randint(0, 2, 70)
        labels[:2] = [0, 1]
        points = roc_curve(scores, labels)
        assert abs(trapezoid_area(points) - auc_roc(scores, labels)) <= 1e-12

    def test_tie_grouping_collapses_points(self):
        # 4 distinct scores → at most 5 points, regardless of sample count.
        scores = [0.1, 0.1, 0.2, 0.2, 0.3, 0.3, 0.4, 0.4]
        labels = [0, 1, 0, 1, 0, 1, 0, 1]
        assert roc_curve(scores, labels).shape[0] == 5


class TestThreshold:
    def test_benign_quantile_interpolates(self):
        scores = np.arange(1.0, 101.0)  # benign 1..100
        labels = np.zeros(100, dtype=int)
        rule = ThresholdRule(strategy="benign_quantile", q=0.99)
        # linear interpolation of the 0.99 quantile of 1..100 = 99.01
        assert select_threshold(scores, labels, rule) == pytest.approx(99.01, abs=1e-12)

    def test_benign_quantile_ignores_anomalies(self):
        scores = np.array([1.0, 2.0, 3.0, 4.0, 100.0, 200.0])
        labels = np.array([0, 0, 0, 0, 1, 1])
        rule = ThresholdRule(strategy="benign_quantile", q=0.5)
        assert select_threshold(scores, labels, rule) == pytest.approx(2.5)

    def test_benign_median(self):
        rule = ThresholdRule(strategy="benign_quantile", q=0.5)
        assert select_threshold([1.0, 3.0, 9.0], [0, 0, 0], rule) == 3.0

    def test_quantile_needs_benign(self):
        rule = ThresholdRule(strategy="benign_quantile", q=0.9)
        with pytest.raises(SingleClass):
            select_threshold([1.0, 2.0], [1, 1], rule)

    def test_youden_separable_lands_between_classes(self):
        scores = [1.0, 2.0, 3.0, 10.0, 11.0]
        labels = [0, 0, 0, 1, 1]
        rule = ThresholdRule(strategy="youden")
        t = select_threshold(scores, labels, rule)
        assert 3.0 < t < 10.0
        counts = classify(scores, labels, t)
        assert (counts.tp, counts.fp, counts.tn, counts.fn) == (2, 0, 3, 0)

    def test_youden_ties_take_larger_threshold(self):
        # J is maximal on a plateau; the larger candidate must win.
        scores = [1.0, 2.0, 5.0, 6.0]
        labels = [0, 0, 1, 1]
        t = select_threshold(scores, labels, ThresholdRule(strategy="youden"))
        assert t == pytest.approx(3.5)  # midpoint of the widest J-optimal gap

    def test_youden_needs_both_classes(self):
        with pytest.raises(SingleClass):
            select_threshold([1.0, 2.0], [0, 0], ThresholdRule(strategy="youden"))

    def test_rule_validation(self):
        with pytest.raises(ValueError):
            ThresholdRule(strategy="nonsense")
        with pytest.raises(ValueError):
            ThresholdRule(strategy="benign_quantile", q=1.5)


class TestClassify:
    def test_strictly_greater(self):
        counts = classify([1.0, 2.0, 3.0], [0, 1, 1], threshold=2.0)
        # score 2.0 is NOT above the threshold
        assert (counts.tp, counts.fp, counts.tn, counts.fn) == (1, 0, 1, 1)

    @given(
        st.lists(st.floats(-100, 100), min_size=1, max_size=50),
        st.floats(-100, 100),
    )
    @settings(max_examples=60)
    def test_partition_property(self, scores, threshold):
        labels = [i % 2 for i in range(len(scores))]
        counts = classify(scores, labels, threshold)
        assert counts.total == len(scores)
        assert counts.tp + counts.fn == sum(labels)
        assert counts.fp + counts.tn == len(labels) - sum(labels)

    def test_counts_value_object(self):
        assert ConfusionCounts(1, 2, 3, 4).total == 10


class TestEmitReport:
    def _cells(self):
        rs = np.random.RandomState(0)
        cells = []
        for view in ("PA", "PN"):
            for det in DETECTOR_COLUMNS:
                benign = rs.uniform(0.0, 0.5, 40)
                anom = rs.uniform(0.4, 1.0, 8)
                scores = np.concatenate([benign, anom])
                labels = np.concatenate([np.zeros(40, int), np.ones(8, int)])
                cells.append(ReportCell(
                    dataset="unit", view=view, detector=det,
                    scores=scores, labels=labels, threshold=0.45,
                ))
        return cells

    def test_writes_expected_files(self, tmp_path):
        out = tmp_path / "report"
        emit_report(self._cells(), out)
        names = {p.name for p in out.iterdir()}
        expected = {"heatmap.csv", "summary.json"}
        for view in ("PA", "PN"):
            for det in DETECTOR_COLUMNS:
                expected.add(f"roc_unit_{view}_{det}.csv")
        assert names == expected

    def test_heatmap_layout(self, tmp_path):
        out = tmp_path / "report"
        emit_report(self._cells(), out)
        lines = (out / "heatmap.csv").read_text().splitlines()
        assert lines[0] == "dataset,view,MPNet-AE,IForest,OC-SVM,PCA"
        assert len(lines) == 3
        assert lines[1].startswith("unit,PA,")
        assert lines[2].startswith("unit,PN,")
        for line in lines[1:]:
            for fld in line.split(",")[2:]:
                value = float(fld)
                assert 0.0 <= value <= 1.0
                assert len(fld.split(".")[1]) == 4  # pinned 4 decimal places

    def test_summary_matches_recomputation(self, tmp_path):
        out = tmp_path / "report"
        cells = self._cells()
        returned = emit_report(cells, out)
        on_disk = json.loads((out / "summary.json").read_text())
        assert returned == on_disk
        for entry, cell in zip(on_disk["cells"], cells):
            assert entry["auc"] == pytest.approx(auc_roc(cell.scores, cell.labels), abs=1e-12)
            counts = classify(cell.scores, cell.labels, cell.threshold)
            assert (entry["tp"], entry["fp"], entry["tn"], entry["fn"]) == (
                counts.tp, counts.fp, counts.tn, counts.fn,
            )

    def test_roc_csv_rereads_to_curve(self, tmp_path):
        out = tmp_path / "report"
        cells = self._cells()
        emit_report(cells, out)
        cell = cells[0]
        lines = (out / f"roc_unit_PA_{cell.detector}.csv").read_text().splitlines()
        assert lines[0] == "fpr,tpr"
        points = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
        assert np.array_equal(points, roc_curve(cell.scores, cell.labels))

    def test_single_class_cell_gets_null_auc(self, tmp_path):
        cells = [ReportCell(
            dataset="unit", view="PA", detector="PCA",
            scores=np.array([0.2, 0.3]), labels=np.array([0, 0]), threshold=0.5,
        )]
        out = tmp_path / "report"
        summary = emit_report(cells, out)
        entry = summary["cells"][0]
        assert entry["auc"] is None
        assert "reason" in entry
        assert not (out / "roc_unit_PA_PCA.csv").exists()
        hm = (out / "heatmap.csv").read_text().splitlines()
        assert hm[1] == "unit,PA,,,,"  # blank AUC columns except... all blank here

    def test_unknown_detector_rejected(self, tmp_path):
        cells = [ReportCell(
            dataset="u", view="PA", detector="LOF",
            scores=np.array([0.1, 0.9]), labels=np.array([0, 1]), threshold=0.5,
        )]
        with pytest.raises(ValueError):
            emit_report(cells, tmp_path / "r")

    def test_tsne_csv_written_when_given(self, tmp_path):
        out = tmp_path / "report"
        coords = np.array([[0.5, -1.5], [2.0, 3.0]])
        emit_report(self._cells(), out, tsne_coords=coords, tsne_labels=np.array([0, 1]))
        lines = (out / "tsne.csv").read_text().splitlines()
        assert lines[0] == "x,y,label"
        assert lines[1] == "0.5,-1.5,0"
        assert lines[2] == "2.0,3.0,1"

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        emit_report(self._cells(), a)
        emit_report(self._cells(), b)
        for p in sorted(a.iterdir()):
            assert p.read_bytes() == (b / p.name).read_bytes()
