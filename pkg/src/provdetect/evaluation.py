"""Scoring metrics, threshold rules, confusion counts, and report emission.

AUC here is the Mann-Whitney statistic — the probability that a random
anomaly outscores a random benign sample, ties counted half — computed with
average ranks so it is exact, not trapezoid-approximate.  The ROC sweep is
tie-grouped over distinct score thresholds and its trapezoidal area agrees
with the rank computation to float precision, which the tests pin at 1e-12.

The report emitter writes one directory per run:

* ``heatmap.csv`` — rows = dataset × view, columns = the four detectors in
  fixed order (MPNet-AE, IForest, OC-SVM, PCA), values = AUC to 4 decimals.
* ``roc_{dataset}_{view}_{detector}.csv`` — the per-cell ROC points.
* ``tsne.csv`` — 2-D projection coordinates with labels, when supplied.
* ``summary.json`` — every cell's AUC, threshold, and confusion counts.

All outputs are UTF-8 with ``\\n`` newlines and fixed float formatting, so a
deterministic pipeline produces byte-identical report directories.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import SingleClass

DETECTOR_COLUMNS = ("MPNet-AE", "IForest", "OC-SVM", "PCA")


def _as_arrays(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D arrays of equal length")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("labels must be 0 or 1")
    return scores, labels.astype(np.int64)


def auc_roc(scores, labels) -> float:
    """Mann-Whitney AUC: (concordant + 0.5·tied) / (P·N), via average ranks."""
    scores, labels = _as_arrays(scores, labels)
    pos = int(labels.sum())
    neg = labels.size - pos
    if pos == 0 or neg == 0:
        raise SingleClass("AUC needs at least one positive and one negative sample")
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # average rank, 1-based
        i = j + 1
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg)


def roc_curve(scores, labels) -> np.ndarray:
    """Tie-grouped ROC points from (0,0) to (1,1), shape (m, 2) of (fpr, tpr)."""
    scores, labels = _as_arrays(scores, labels)
    pos = int(labels.sum())
    neg = labels.size - pos
    if pos == 0 or neg == 0:
        raise SingleClass("ROC needs at least one positive and one negative sample")
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        tp += int(sorted_labels[i:j + 1].sum())
        fp += (j - i + 1) - int(sorted_labels[i:j + 1].sum())
        points.append((fp / neg, tp / pos))
        i = j + 1
    return np.asarray(points, dtype=np.float64)


@dataclass(frozen=True)
class ThresholdRule:
    """How to pick the decision boundary from validation scores.

    ``benign_quantile``: the q-quantile (linear interpolation) of benign
    validation scores — anomalies, when present, play no part.
    ``youden``: the threshold maximizing TPR − FPR, ties toward the larger
    threshold; needs both classes.
    """

    strategy: str = "benign_quantile"
    q: float = 0.99

    def __post_init__(self):
        if self.strategy not in ("benign_quantile", "youden"):
            raise ValueError(f"unknown threshold strategy {self.strategy!r}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"quantile must be in (0, 1), got {self.q}")


def select_threshold(scores, labels, rule: ThresholdRule) -> float:
    """Fit a decision threshold on validation scores according to the rule."""
    scores, labels = _as_arrays(scores, labels)
    if rule.strategy == "benign_quantile":
        benign = scores[labels == 0]
        if benign.size == 0:
            raise SingleClass("benign_quantile needs at least one benign sample")
        return float(np.quantile(benign, rule.q, method="linear"))
    # youden
    pos = int(labels.sum())
    if pos == 0 or pos == labels.size:
        raise SingleClass("youden needs both classes in validation")
    distinct = np.unique(scores)
    candidates = [distinct[0] - 1.0]
    candidates.extend(0.5 * (distinct[:-1] + distinct[1:]))
    candidates.append(distinct[-1] + 1.0)
    best_j = -np.inf
    best_t = candidates[0]
    neg = labels.size - pos
    for t in candidates:
        predicted = scores > t
        tpr = int(np.sum(predicted & (labels == 1))) / pos
        fpr = int(np.sum(predicted & (labels == 0))) / neg
        j = tpr - fpr
        if j > best_j or (j == best_j and t > best_t):
            best_j = j
            best_t = float(t)
    return best_t


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def classify(scores, labels, threshold: float) -> ConfusionCounts:
    """Confusion counts with the strict rule: score > threshold ⇒ predicted anomalous."""
    scores, labels = _as_arrays(scores, labels)
    predicted = scores > threshold
    return ConfusionCounts(
        tp=int(np.sum(predicted & (labels == 1))),
        fp=int(np.sum(predicted & (labels == 0))),
        tn=int(np.sum(~predicted & (labels == 0))),
        fn=int(np.sum(~predicted & (labels == 1))),
    )


@dataclass(frozen=True)
class ReportCell:
    """One (dataset, view, detector) evaluation cell: test scores + labels + threshold."""

    dataset: str
    view: str
    detector: str
    scores: np.ndarray
    labels: np.ndarray
    threshold: float


def _fmt(x: float) -> str:
    """Shortest round-trip decimal form — byte-stable across platforms."""
    return repr(float(x))


def emit_report(cells: Sequence[ReportCell], out_dir: Union[str, os.PathLike],
                tsne_coords: Optional[np.ndarray] = None,
                tsne_labels: Optional[np.ndarray] = None) -> dict:
    """Write the report directory; returns the summary dict that was serialized.

    Cells whose test split carries a single class get a null AUC with a reason
    instead of failing the whole report.
    """
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)

    summary_cells = []
    table: dict[tuple[str, str], dict[str, Optional[float]]] = {}
    row_order: list[tuple[str, str]] = []
    for cell in cells:
        if cell.detector not in DETECTOR_COLUMNS:
            raise ValueError(f"unknown detector {cell.detector!r}")
        key = (cell.dataset, cell.view)
        if key not in table:
            table[key] = {}
            row_order.append(key)
        entry: dict = {
            "dataset": cell.dataset,
            "view": cell.view,
            "detector": cell.detector,
            "threshold": float(cell.threshold),
        }
        try:
            auc = auc_roc(cell.scores, cell.labels)
        except SingleClass as e:
            table[key][cell.detector] = None
            entry["auc"] = None
            entry["reason"] = str(e)
        else:
            table[key][cell.detector] = auc
            entry["auc"] = auc
            points = roc_curve(cell.scores, cell.labels)
            roc_name = f"roc_{cell.dataset}_{cell.view}_{cell.detector}.csv"
            with open(os.path.join(out_dir, roc_name), "w", encoding="utf-8", newline="") as fh:
                fh.write("fpr,tpr\n")
                for fpr, tpr in points:
                    fh.write(f"{_fmt(fpr)},{_fmt(tpr)}\n")
        counts = classify(cell.scores, cell.labels, cell.threshold)
        entry.update(tp=counts.tp, fp=counts.fp, tn=counts.tn, fn=counts.fn)
        summary_cells.append(entry)

    with open(os.path.join(out_dir, "heatmap.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write("dataset,view," + ",".join(DETECTOR_COLUMNS) + "\n")
        for dataset, view in row_order:
            row = [dataset, view]
            for det in DETECTOR_COLUMNS:
                auc = table[(dataset, view)].get(det)
                row.append("" if auc is None else f"{auc:.4f}")
            fh.write(",".join(row) + "\n")

    if tsne_coords is not None:
        coords = np.asarray(tsne_coords, dtype=np.float64)
        labs = (np.asarray(tsne_labels).astype(int) if tsne_labels is not None
                else np.zeros(len(coords), dtype=int))
        with open(os.path.join(out_dir, "tsne.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write("x,y,label\n")
            for (x, y), lab in zip(coords, labs):
                fh.write(f"{_fmt(x)},{_fmt(y)},{int(lab)}\n")

    summary = {"cells": summary_cells}
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8", newline="") as fh:
        json.dump(summary, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return summary
