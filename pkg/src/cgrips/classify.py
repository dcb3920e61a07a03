"""Baseline k-NN classifier, multiclass metrics, and McNemar significance.

The classifier is Euclidean k-nearest-neighbor over flattened (optionally
mean-pooled) image vectors with deterministic tie handling, so the whole
evaluation stack is reproducible with no training beyond storing vectors.
Prediction sets serialize as JSON lines ``{id, true, pred, scores}`` and
metric reports as a single JSON object; any classifier emitting the same
schema can be scored and compared by these functions. Score columns follow
the lexicographically sorted label set.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

# Above this disagreement total the exact binomial is replaced by the
# continuity-corrected chi-square approximation.
_MCNEMAR_EXACT_LIMIT = 25


@dataclass
class PredictionSet:
    """Parallel lists of ids, true labels, and predictions, plus optional scores.

    ``scores`` has one row per prediction and one column per class in
    lexicographic label order.
    """

    ids: list[str]
    true_labels: list[str]
    predicted_labels: list[str]
    scores: np.ndarray | None = None

    def __post_init__(self):
        n = len(self.ids)
        if len(self.true_labels) != n or len(self.predicted_labels) != n:
            raise ValueError("ids, true_labels, predicted_labels must be parallel")
        if self.scores is not None:
            self.scores = np.asarray(self.scores, dtype=np.float64)
            if len(self.scores) != n:
                raise ValueError("scores must have one row per prediction")
            if not np.isfinite(self.scores).all():
                raise ValueError("scores must be finite")

    def __len__(self):
        return len(self.ids)


@dataclass
class MetricsReport:
    accuracy: float
    precision_weighted: float
    recall_weighted: float
    f1_weighted: float
    f1_macro: float
    roc_auc_ovr_macro: float | None
    train_runtime_sec: float


def pool_image(pixels: np.ndarray, factor: int) -> np.ndarray:
    """Mean-pool a square image by an integer factor (must divide the side)."""
    if factor <= 1:
        return np.asarray(pixels, dtype=np.float64)
    size = pixels.shape[0]
    if size % factor:
        raise ValueError(f"pool factor {factor} does not divide image size {size}")
    s = size // factor
    return (
        np.asarray(pixels, dtype=np.float64)
        .reshape(s, factor, s, factor)
        .mean(axis=(1, 3))
    )


def image_vector(pixels: np.ndarray, pool_factor: int = 4) -> np.ndarray:
    """Pooled, flattened, [0, 1]-scaled feature vector of one image."""
    return pool_image(pixels, pool_factor).ravel() / 255.0


def knn_train_predict(
    train_vectors: np.ndarray,
    train_labels,
    test_vectors: np.ndarray,
    k: int,
    test_labels=None,
    ids=None,
    label_set=None,
) -> PredictionSet:
    """Euclidean k-NN with majority vote and deterministic tie handling.

    Vote ties break by the smallest summed neighbor distance, then by label
    order. Per-class scores are neighbor vote fractions over ``label_set``
    (defaults to the sorted training labels).
    """
    X = np.asarray(train_vectors, dtype=np.float64)
    Q = np.asarray(test_vectors, dtype=np.float64)
    y = list(train_labels)
    if len(X) == 0:
        raise ValueError("empty training set")
    if X.ndim != 2 or Q.ndim != 2 or X.shape[1] != Q.shape[1]:
        raise ValueError("train/test vectors must be 2D with matching dimension")
    if not 1 <= k <= len(X):
        raise ValueError(f"k must be in [1, {len(X)}], got {k}")
    if label_set is None:
        label_set = sorted(set(y))
    labels = sorted(label_set)
    lab_index = {lab: c for c, lab in enumerate(labels)}
    y_idx = np.array([lab_index[lab] for lab in y])

    d2 = (
        (Q**2).sum(axis=1)[:, None]
        + (X**2).sum(axis=1)[None, :]
        - 2.0 * Q @ X.T
    )
    np.maximum(d2, 0.0, out=d2)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]

    preds = []
    scores = np.zeros((len(Q), len(labels)))
    for r in range(len(Q)):
        nb = order[r]
        votes = np.bincount(y_idx[nb], minlength=len(labels))
        scores[r] = votes / k
        top = votes.max()
        tied = np.nonzero(votes == top)[0]
        if len(tied) > 1:
            sums = [d2[r, nb[y_idx[nb] == c]].sum() for c in tied]
            tied = tied[np.lexsort((tied, sums))]
        preds.append(labels[tied[0]])

    if ids is None:
        ids = [str(i) for i in range(len(Q))]
    if test_labels is None:
        test_labels = [""] * len(Q)
    return PredictionSet(list(ids), list(test_labels), preds, scores)


def select_k(
    train_vectors, train_labels, val_vectors, val_labels, candidates=(1, 3, 5, 7)
) -> int:
    """Pick the neighbor count with the best validation accuracy (ties: smallest)."""
    usable = [k for k in candidates if 1 <= k <= len(train_vectors)]
    if not usable:
        raise ValueError("no usable k candidates for this training set size")
    best_k, best_acc = usable[0], -1.0
    for k in usable:
        p = knn_train_predict(train_vectors, train_labels, val_vectors, k, val_labels)
        acc = sum(t == q for t, q in zip(p.true_labels, p.predicted_labels)) / len(p)
        if acc > best_acc:
            best_k, best_acc = k, acc
    return best_k


def confusion_matrix(p: PredictionSet, label_set) -> np.ndarray:
    labels = sorted(label_set)
    idx = {lab: c for c, lab in enumerate(labels)}
    conf = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, q in zip(p.true_labels, p.predicted_labels):
        conf[idx[t], idx[q]] += 1
    return conf


def compute_metrics(
    p: PredictionSet, label_set, train_runtime_sec: float = 0.0
) -> MetricsReport:
    """Accuracy, weighted precision/recall/F1, macro F1, macro one-vs-rest AUC.

    Weighted metrics weight per-class values by true-class support; macro is
    the unweighted mean over all classes (absent classes contribute 0, as in
    the usual zero-division convention). AUC is omitted (None) when scores
    are missing or fewer than two true classes are present.
    """
    if len(p) == 0:
        raise ValueError("empty prediction set")
    labels = sorted(label_set)
    conf = confusion_matrix(p, labels)
    n = conf.sum()
    tp = np.diag(conf).astype(np.float64)
    support = conf.sum(axis=1).astype(np.float64)
    predicted = conf.sum(axis=0).astype(np.float64)

    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(support > 0, tp / support, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / denom, 0.0)

    weights = support / n
    report = MetricsReport(
        accuracy=float(tp.sum() / n),
        precision_weighted=float((weights * precision).sum()),
        recall_weighted=float((weights * recall).sum()),
        f1_weighted=float((weights * f1).sum()),
        f1_macro=float(f1.mean()),
        roc_auc_ovr_macro=_roc_auc_ovr_macro(p, labels),
        train_runtime_sec=float(train_runtime_sec),
    )
    return report


def _roc_auc_ovr_macro(p: PredictionSet, labels) -> float | None:
    if p.scores is None:
        log.warning("no scores in prediction set; ROC-AUC omitted")
        return None
    if len(set(p.true_labels)) < 2:
        log.warning("fewer than two true classes; ROC-AUC omitted")
        return None
    if p.scores.shape[1] != len(labels):
        raise ValueError(
            f"score rows have {p.scores.shape[1]} columns for {len(labels)} classes"
        )
    truth = np.array([labels.index(t) for t in p.true_labels])
    aucs = []
    for c in range(len(labels)):
        y = (truth == c).astype(np.int64)
        pos = y.sum()
        if pos == 0 or pos == len(y):
            continue  # one-vs-rest AUC undefined for this class
        aucs.append(_binary_auc(y, p.scores[:, c]))
    return float(np.mean(aucs)) if aucs else None


def _binary_auc(y: np.ndarray, s: np.ndarray) -> float:
    """Trapezoidal area under the ROC curve swept over score thresholds."""
    order = np.argsort(-s, kind="stable")
    y = y[order]
    s = s[order]
    # last index of each tied-score group
    last = np.r_[np.nonzero(np.diff(s))[0], len(s) - 1]
    tps = np.cumsum(y)[last].astype(np.float64)
    fps = (last + 1) - tps
    pos = y.sum()
    neg = len(y) - pos
    tpr = np.r_[0.0, tps / pos]
    fpr = np.r_[0.0, fps / neg]
    return float(np.trapezoid(tpr, fpr))


def disagreement_counts(a: PredictionSet, b: PredictionSet) -> tuple[int, int]:
    """(a-correct/b-wrong, a-wrong/b-correct) counts for paired predictions."""
    if a.ids != b.ids or a.true_labels != b.true_labels:
        raise ValueError("prediction sets must share ids and true labels")
    a_ok = [t == q for t, q in zip(a.true_labels, a.predicted_labels)]
    b_ok = [t == q for t, q in zip(b.true_labels, b.predicted_labels)]
    only_a = sum(1 for x, y in zip(a_ok, b_ok) if x and not y)
    only_b = sum(1 for x, y in zip(a_ok, b_ok) if y and not x)
    return only_a, only_b


def mcnemar_test(a: PredictionSet, b: PredictionSet) -> float:
    """Two-sided McNemar p-value for paired classifiers on the same items."""
    return mcnemar_from_counts(*disagreement_counts(a, b))


def mcnemar_from_counts(b: int, c: int) -> float:
    """p-value from the 2x2 disagreement counts.

    Exact two-sided binomial for b + c <= 25, continuity-corrected chi-square
    above. A fully degenerate table (b = c = 0) yields p = 1.0.
    """
    n = b + c
    if n == 0:
        log.warning("degenerate McNemar table (no disagreements); p = 1.0")
        return 1.0
    if n <= _MCNEMAR_EXACT_LIMIT:
        k = min(b, c)
        tail = sum(math.comb(n, i) for i in range(k + 1)) / 2.0**n
        return min(1.0, 2.0 * tail)
    x = (abs(b - c) - 1.0) ** 2 / n
    return math.erfc(math.sqrt(x / 2.0))


# ---------------------------------------------------------------------------
# Serialization (shared schema with any external trainer)
# ---------------------------------------------------------------------------


def write_predictions(p: PredictionSet, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for i in range(len(p)):
            row = {
                "id": p.ids[i],
                "true": p.true_labels[i],
                "pred": p.predicted_labels[i],
            }
            if p.scores is not None:
                row["scores"] = [float(v) for v in p.scores[i]]
            f.write(json.dumps(row, sort_keys=True) + "\n")


def read_predictions(path) -> PredictionSet:
    ids, true, pred, scores = [], [], [], []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            ids.append(row["id"])
            true.append(row["true"])
            pred.append(row["pred"])
            if "scores" in row:
                scores.append(row["scores"])
    score_arr = None
    if scores:
        if len(scores) != len(ids):
            raise ValueError(f"{path}: some rows have scores and some do not")
        score_arr = np.array(scores, dtype=np.float64)
    return PredictionSet(ids, true, pred, score_arr)


def write_metrics(report: MetricsReport, path) -> None:
    payload = {
        "accuracy": report.accuracy,
        "precision_weighted": report.precision_weighted,
        "recall_weighted": report.recall_weighted,
        "f1_weighted": report.f1_weighted,
        "f1_macro": report.f1_macro,
        "roc_auc_ovr_macro": report.roc_auc_ovr_macro,
        "train_runtime_sec": report.train_runtime_sec,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def read_metrics(path) -> MetricsReport:
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    return MetricsReport(
        accuracy=raw["accuracy"],
        precision_weighted=raw["precision_weighted"],
        recall_weighted=raw["recall_weighted"],
        f1_weighted=raw["f1_weighted"],
        f1_macro=raw["f1_macro"],
        roc_auc_ovr_macro=raw.get("roc_auc_ovr_macro"),
        train_runtime_sec=raw.get("train_runtime_sec", 0.0),
    )
