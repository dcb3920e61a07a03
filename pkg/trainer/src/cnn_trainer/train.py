"""Training loop with validation-accuracy early stopping, and re-evaluation."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F

from .data import DataError, ImageSet, label_indices, load_image_set, replicate_channels
from .model import build_model
from .report import compute_report, write_metrics, write_predictions
from .spec import CnnSpec

log = logging.getLogger(__name__)

_EVAL_BATCH = 256


@dataclass
class TrainResult:
    ids: list[str]
    true_labels: list[str]
    predicted_labels: list[str]
    scores: np.ndarray  # (n_test, n_classes) softmax rows
    report: dict
    history: list[tuple[int, float, float]]  # (epoch, train_loss, val_accuracy)
    best_epoch: int
    label_set: list[str]
    checkpoint_path: str | None


def _set_determinism(spec: CnnSpec) -> None:
    torch.manual_seed(spec.seed)
    torch.use_deterministic_algorithms(spec.deterministic)


def _prepare(images: torch.Tensor, spec: CnnSpec) -> torch.Tensor:
    if spec.pool > 1:
        images = F.avg_pool2d(images, spec.pool)
    return replicate_channels(images, spec.in_channels)


def _predict(model, images: torch.Tensor):
    """Softmax scores and argmax indices, batched, no grad."""
    model.eval()
    outs = []
    with torch.no_grad():
        for start in range(0, len(images), _EVAL_BATCH):
            logits = model(images[start : start + _EVAL_BATCH])
            outs.append(torch.softmax(logits.double(), dim=1))
    scores = torch.cat(outs)
    return scores.numpy(), scores.argmax(dim=1).numpy()


def _check_parts(iset: ImageSet):
    parts = {name: iset.part(name) for name in ("train", "validation", "test")}
    for name, part in parts.items():
        if len(part) == 0:
            raise DataError(f"manifest has an empty {name} split")
    absent = sorted(set(iset.label_set) - set(parts["train"].labels))
    if absent:
        raise DataError(f"classes absent from the training split: {absent}")
    return parts


def train(manifest_path, spec: CnnSpec, out_dir=None) -> TrainResult:
    """Fit on the train split, early-stop on validation accuracy, score test.

    With ``out_dir`` set, writes ``checkpoint.pt``, ``predictions.jsonl``,
    ``metrics.json``, and ``history.csv`` there.
    """
    iset = load_image_set(manifest_path)
    parts = _check_parts(iset)
    _set_determinism(spec)

    tr, va, te = parts["train"], parts["validation"], parts["test"]
    X_tr = _prepare(tr.images, spec)
    X_va = _prepare(va.images, spec)
    X_te = _prepare(te.images, spec)
    y_tr = label_indices(tr.labels, iset.label_set)
    y_va = label_indices(va.labels, iset.label_set)
    input_size = X_tr.shape[-1]
    n_classes = len(iset.label_set)

    t0 = time.perf_counter()
    model = build_model(spec, n_classes, input_size)
    opt = torch.optim.Adam(model.parameters(), lr=spec.learning_rate)
    gen = torch.Generator().manual_seed(spec.seed)

    history = []
    best_acc, best_epoch, best_state = -1.0, 0, None
    since_best = 0
    for epoch in range(1, spec.epochs + 1):
        model.train()
        perm = torch.randperm(len(X_tr), generator=gen)
        total_loss = 0.0
        for start in range(0, len(perm), spec.batch_size):
            idx = perm[start : start + spec.batch_size]
            opt.zero_grad()
            loss = F.cross_entropy(model(X_tr[idx]), y_tr[idx])
            loss.backward()
            opt.step()
            total_loss += float(loss.detach()) * len(idx)
        train_loss = total_loss / len(X_tr)

        _, va_pred = _predict(model, X_va)
        val_acc = float((torch.from_numpy(va_pred) == y_va).float().mean())
        history.append((epoch, train_loss, val_acc))
        log.info("epoch %d: loss %.4f val accuracy %.4f", epoch, train_loss, val_acc)

        if val_acc > best_acc:
            best_acc, best_epoch = val_acc, epoch
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
            since_best = 0
        else:
            since_best += 1
            if since_best >= spec.patience:
                log.info("early stop at epoch %d (best %d)", epoch, best_epoch)
                break

    model.load_state_dict(best_state)
    scores, te_idx = _predict(model, X_te)
    runtime = time.perf_counter() - t0

    pred_labels = [iset.label_set[i] for i in te_idx]
    report = compute_report(te.labels, pred_labels, scores, iset.label_set, runtime)
    result = TrainResult(
        te.ids, list(te.labels), pred_labels, scores, report, history,
        best_epoch, iset.label_set, None,
    )

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        ckpt = os.path.join(out_dir, "checkpoint.pt")
        torch.save(
            {
                "spec": spec.to_dict(),
                "label_set": iset.label_set,
                "image_size": int(iset.images.shape[-1]),
                "state_dict": model.state_dict(),
            },
            ckpt,
        )
        write_predictions(
            result.ids, result.true_labels, result.predicted_labels,
            result.scores, os.path.join(out_dir, "predictions.jsonl"),
        )
        write_metrics(report, os.path.join(out_dir, "metrics.json"))
        with open(os.path.join(out_dir, "history.csv"), "w", encoding="utf-8") as f:
            f.write("epoch,train_loss,val_accuracy\n")
            for epoch, loss, acc in history:
                f.write(f"{epoch},{loss:.6f},{acc:.6f}\n")
        result.checkpoint_path = ckpt
    return result


@dataclass
class EvalResult:
    ids: list[str]
    true_labels: list[str]
    predicted_labels: list[str]
    scores: np.ndarray
    report: dict
    label_set: list[str]


def evaluate(checkpoint_path, manifest_path, out_dir=None) -> EvalResult:
    """Deterministic inference of a saved model on a manifest's test split."""
    raw = torch.load(checkpoint_path, weights_only=True)
    spec = CnnSpec.from_dict(raw["spec"])
    label_set = list(raw["label_set"])

    iset = load_image_set(manifest_path)
    if iset.label_set != label_set:
        raise DataError(
            f"checkpoint was trained on classes {label_set} but the manifest "
            f"has {iset.label_set}"
        )
    if int(iset.images.shape[-1]) != raw["image_size"]:
        raise DataError(
            f"checkpoint expects {raw['image_size']}-pixel images, manifest "
            f"has {int(iset.images.shape[-1])}"
        )
    te = iset.part("test")
    if len(te) == 0:
        raise DataError("manifest has an empty test split")
    X_te = _prepare(te.images, spec)

    _set_determinism(spec)
    model = build_model(spec, len(label_set), X_te.shape[-1])
    model.load_state_dict(raw["state_dict"])
    scores, te_idx = _predict(model, X_te)
    pred_labels = [label_set[i] for i in te_idx]
    report = compute_report(te.labels, pred_labels, scores, label_set, 0.0)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_predictions(
            te.ids, list(te.labels), pred_labels, scores,
            os.path.join(out_dir, "predictions.jsonl"),
        )
        write_metrics(report, os.path.join(out_dir, "metrics.json"))
    return EvalResult(te.ids, list(te.labels), pred_labels, scores, report, label_set)
