"""Prediction/metric serialization in the shared evaluator schema.

The emitted files are interchangeable with the upstream toolkit's own
artifacts: ``predictions.jsonl`` rows ``{id, true, pred, scores}`` with score
columns in lexicographic label order, and ``metrics.json`` with the seven
standard fields. Metrics are computed with scikit-learn here, which makes
cross-component agreement a real two-implementation check rather than a
shared code path.
"""

from __future__ import annotations

import json
import logging

import numpy as np
from sklearn.metrics import (
    accuracy_score,
    precision_recall_fscore_support,
    roc_auc_score,
)

log = logging.getLogger(__name__)


def compute_report(true, pred, scores, label_set, train_runtime_sec=0.0) -> dict:
    """Accuracy, weighted precision/recall/F1, macro F1, macro OvR ROC-AUC."""
    pw, rw, fw, _ = precision_recall_fscore_support(
        true, pred, labels=list(label_set), average="weighted", zero_division=0
    )
    _, _, fm, _ = precision_recall_fscore_support(
        true, pred, labels=list(label_set), average="macro", zero_division=0
    )
    return {
        "accuracy": float(accuracy_score(true, pred)),
        "precision_weighted": float(pw),
        "recall_weighted": float(rw),
        "f1_weighted": float(fw),
        "f1_macro": float(fm),
        "roc_auc_ovr_macro": _auc_or_none(true, scores, label_set),
        "train_runtime_sec": float(train_runtime_sec),
    }


def _auc_or_none(true, scores, label_set):
    if scores is None:
        return None
    try:
        if len(label_set) == 2:
            y = (np.asarray(true) == label_set[1]).astype(int)
            return float(roc_auc_score(y, np.asarray(scores)[:, 1]))
        return float(
            roc_auc_score(
                true, scores, multi_class="ovr", average="macro",
                labels=list(label_set),
            )
        )
    except ValueError as exc:
        # Typically a class with no positives in this test part.
        log.warning("ROC-AUC undefined (%s); omitted", exc)
        return None


def write_predictions(ids, true, pred, scores, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i, sid in enumerate(ids):
            row = {"id": sid, "true": true[i], "pred": pred[i]}
            if scores is not None:
                row["scores"] = [float(v) for v in scores[i]]
            f.write(json.dumps(row, sort_keys=True) + "\n")


def write_metrics(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
