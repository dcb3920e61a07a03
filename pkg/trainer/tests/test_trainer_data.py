"""Manifest and image ingestion."""

import json

import pytest
import torch

from cnn_trainer.data import (
    DataError,
    label_indices,
    load_image_set,
    read_manifest_rows,
    replicate_channels,
)


def test_load_image_set(toy_manifest):
    iset = load_image_set(toy_manifest)
    assert len(iset) == 24
    assert iset.images.shape == (24, 1, 32, 32)
    assert iset.images.dtype == torch.float32
    assert iset.images.min() >= 0.0 and iset.images.max() <= 1.0
    assert iset.label_set == ["left", "right"]
    assert iset.part("train").images.shape[0] == 16
    assert iset.part("validation").images.shape[0] == 4
    assert iset.part("test").images.shape[0] == 4


def test_part_preserves_manifest_order(toy_manifest):
    iset = load_image_set(toy_manifest)
    te = iset.part("test")
    assert te.ids == ["left10", "left11", "right10", "right11"]
    with pytest.raises(DataError, match="unknown split"):
        iset.part("holdout")


def test_rows_missing_fields_rejected(tmp_path):
    path = tmp_path / "manifest.jsonl"
    path.write_text(json.dumps({"id": "x", "label": "a"}) + "\n")
    with pytest.raises(DataError, match="line 1.*missing"):
        read_manifest_rows(path)
    path.write_text("")
    with pytest.raises(DataError, match="empty manifest"):
        read_manifest_rows(path)


def test_unassigned_split_rejected(toy_manifest):
    rows = [json.loads(line) for line in toy_manifest.read_text().splitlines()]
    rows[3]["split"] = ""
    toy_manifest.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    with pytest.raises(DataError, match="without train/validation/test"):
        load_image_set(toy_manifest)


def test_mixed_image_sizes_rejected(toy_manifest, toy_factory, tmp_path):
    other = toy_factory(tmp_path / "other", per_class=1, size=16)
    rows = [json.loads(line) for line in toy_manifest.read_text().splitlines()]
    small = json.loads(other.read_text().splitlines()[0])
    small["image_path"] = "other/" + small["image_path"]
    rows.append(small)
    toy_manifest.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    with pytest.raises(DataError, match="differs from first image"):
        load_image_set(toy_manifest)


def test_missing_image_file_rejected(toy_manifest):
    (toy_manifest.parent / "images" / "left00.png").unlink()
    with pytest.raises(DataError, match="cannot read image for left00"):
        load_image_set(toy_manifest)


def test_replicate_channels():
    x = torch.rand(4, 1, 8, 8)
    y = replicate_channels(x, 3)
    assert y.shape == (4, 3, 8, 8)
    assert torch.equal(y[:, 0], x[:, 0]) and torch.equal(y[:, 2], x[:, 0])
    assert replicate_channels(x, 1) is x
    with pytest.raises(DataError, match="single-channel"):
        replicate_channels(y, 5)


def test_label_indices():
    idx = label_indices(["b", "a", "b"], ["a", "b"])
    assert idx.tolist() == [1, 0, 1]
    with pytest.raises(DataError, match="'c' not in label set"):
        label_indices(["c"], ["a", "b"])
