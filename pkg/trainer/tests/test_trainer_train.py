"""Training loop, checkpointing, and CLI behaviour on a small synthetic set."""

import json
from pathlib import Path

import numpy as np
import pytest
from jsonschema import Draft7Validator

from cnn_trainer import CnnSpec, DataError, evaluate, train
from cnn_trainer.cli import main

SCHEMA_DIR = Path(__file__).resolve().parents[2] / "schemas"

QUICK = CnnSpec(blocks=1, epochs=5, batch_size=8, pool=1, seed=0)


def _rows(manifest):
    with open(manifest, encoding="utf-8") as f:
        return [json.loads(line) for line in f]


def _write_rows(rows, path):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row) + "\n")
    return path


def test_training_loss_decreases(toy_manifest):
    result = train(toy_manifest, QUICK)
    losses = [loss for _, loss, _ in result.history]
    assert len(losses) == 5
    assert losses[0] > losses[1] > losses[2]


def test_fixed_seed_is_deterministic(toy_manifest):
    a = train(toy_manifest, QUICK)
    b = train(toy_manifest, QUICK)
    assert a.predicted_labels == b.predicted_labels
    assert np.array_equal(a.scores, b.scores)
    assert a.history == b.history


def test_seed_changes_the_run(toy_manifest):
    a = train(toy_manifest, QUICK)
    b = train(toy_manifest, CnnSpec(blocks=1, epochs=5, batch_size=8, pool=1, seed=1))
    # Different init and batch order; the loss trajectory should not coincide.
    assert [h[1] for h in a.history] != [h[1] for h in b.history]


def test_scores_are_probability_rows(toy_manifest):
    result = train(toy_manifest, QUICK)
    assert result.scores.shape == (4, 2)
    assert np.all(result.scores >= 0)
    np.testing.assert_allclose(result.scores.sum(axis=1), 1.0, atol=1e-6)


def test_early_stopping_respects_patience(toy_manifest):
    spec = CnnSpec(blocks=1, epochs=50, batch_size=8, pool=1, patience=1)
    result = train(toy_manifest, spec)
    # Validation accuracy over 4 images can improve strictly at most a handful
    # of times, so patience=1 must cut the run well short of 50 epochs.
    assert len(result.history) < 50
    assert result.best_epoch <= len(result.history)


def test_artifacts_written_and_match_schemas(toy_manifest, tmp_path):
    out = tmp_path / "run"
    result = train(toy_manifest, QUICK, out_dir=out)
    for name in ("checkpoint.pt", "predictions.jsonl", "metrics.json", "history.csv"):
        assert (out / name).exists()
    assert result.checkpoint_path == str(out / "checkpoint.pt")

    pred_schema = json.loads((SCHEMA_DIR / "predictions.schema.json").read_text())
    validator = Draft7Validator(pred_schema)
    rows = _rows(out / "predictions.jsonl")
    assert len(rows) == 4
    for row in rows:
        validator.validate(row)

    metrics_schema = json.loads((SCHEMA_DIR / "metrics.schema.json").read_text())
    metrics = json.loads((out / "metrics.json").read_text())
    Draft7Validator(metrics_schema).validate(metrics)
    assert metrics["accuracy"] == result.report["accuracy"]

    header, *lines = (out / "history.csv").read_text().splitlines()
    assert header == "epoch,train_loss,val_accuracy"
    assert len(lines) == len(result.history)


def test_evaluate_reproduces_training_test_scores(toy_manifest, tmp_path):
    trained = train(toy_manifest, QUICK, out_dir=tmp_path / "run")
    evaled = evaluate(trained.checkpoint_path, toy_manifest)
    assert evaled.ids == trained.ids
    assert evaled.predicted_labels == trained.predicted_labels
    assert np.array_equal(evaled.scores, trained.scores)
    assert evaled.report["accuracy"] == trained.report["accuracy"]
    assert evaled.report["f1_macro"] == trained.report["f1_macro"]


def test_evaluate_rejects_mismatched_classes(toy_manifest, tmp_path):
    trained = train(toy_manifest, QUICK, out_dir=tmp_path / "run")
    rows = _rows(toy_manifest)
    rows[0]["label"] = "center"
    other = _write_rows(rows, toy_manifest.parent / "relabelled.jsonl")
    with pytest.raises(DataError, match="classes"):
        evaluate(trained.checkpoint_path, other)


def test_evaluate_rejects_mismatched_image_size(toy_manifest, toy_factory, tmp_path):
    trained = train(toy_manifest, QUICK, out_dir=tmp_path / "run")
    small = toy_factory(tmp_path / "small", size=16)
    with pytest.raises(DataError, match="16"):
        evaluate(trained.checkpoint_path, small)


def test_class_missing_from_train_split_is_rejected(toy_manifest):
    rows = _rows(toy_manifest)
    for row in rows:
        if row["split"] == "train" and row["label"] == "right":
            row["label"] = "left"
    bad = _write_rows(rows, toy_manifest.parent / "one_sided.jsonl")
    with pytest.raises(DataError, match="absent from the training split"):
        train(bad, QUICK)


@pytest.mark.parametrize("drop", ["train", "validation", "test"])
def test_empty_split_is_rejected(toy_manifest, drop):
    rows = [r for r in _rows(toy_manifest) if r["split"] != drop]
    bad = _write_rows(rows, toy_manifest.parent / f"no_{drop}.jsonl")
    with pytest.raises(DataError, match=f"empty {drop} split"):
        train(bad, QUICK)


def test_cli_train_and_evaluate(toy_manifest, tmp_path, capsys):
    out = tmp_path / "cli-run"
    code = main([
        "train", str(toy_manifest), "--out-dir", str(out),
        "--blocks", "1", "--epochs", "5", "--batch-size", "8", "--pool", "1",
    ])
    assert code == 0
    assert "accuracy=" in capsys.readouterr().out
    assert (out / "checkpoint.pt").exists()

    code = main([
        "evaluate", str(out / "checkpoint.pt"), str(toy_manifest),
        "--out-dir", str(tmp_path / "cli-eval"),
    ])
    assert code == 0
    assert "accuracy=" in capsys.readouterr().out
    assert (tmp_path / "cli-eval" / "predictions.jsonl").exists()


def test_cli_missing_manifest_is_input_error(tmp_path, capsys):
    code = main([
        "train", str(tmp_path / "nowhere.jsonl"), "--out-dir", str(tmp_path / "out"),
    ])
    assert code == 4
    assert "error" in capsys.readouterr().err


def test_cli_bad_channels_is_input_error(toy_manifest, tmp_path, capsys):
    code = main([
        "train", str(toy_manifest), "--out-dir", str(tmp_path / "out"),
        "--blocks", "3", "--channels", "8",
    ])
    assert code == 2
    err = capsys.readouterr().err
    assert "error" in err
