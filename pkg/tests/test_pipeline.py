"""Batch rendering and evaluation orchestration."""

import numpy as np
import pytest

from cgrips.classify import image_vector
from cgrips.config import PipelineConfig
from cgrips.pipeline import (
    PipelineError,
    batch_images,
    dataset_vectors,
    evaluate_dataset,
    evaluate_manifest,
    manifest_vectors,
    robustness_assessment,
    sequence_image,
)
from cgrips.seqio import Dataset, Sequence, stratified_split

SMALL = PipelineConfig(image_size=64, pool_factor=4, threads=2)


def toy_dataset():
    seqs = []
    for prefix, arc, label in (("a", "ACD", "alpha"), ("b", "LMN", "beta"),
                               ("c", "VWY", "gamma")):
        for i in range(6):
            residues = (arc * 6)[: 8 + i]
            seqs.append(Sequence(f"{prefix}{i}", residues, label))
    return Dataset(seqs)


def test_batch_writes_sorted_manifest(tmp_path):
    d = toy_dataset()
    result = batch_images(d, str(tmp_path), SMALL)
    assert not result.failures
    assert [e.id for e in result.entries] == sorted(s.id for s in d.sequences)
    assert all(e.split == "" for e in result.entries)  # no split supplied
    entries, X = manifest_vectors(result.manifest_path, SMALL.pool_factor)
    assert len(entries) == len(d)
    assert X.shape == (18, (64 // 4) ** 2)


def test_batch_collects_per_sequence_failures(tmp_path):
    seqs = toy_dataset().sequences + [Sequence("bad", "BBBB", "alpha")]
    result = batch_images(Dataset(seqs), str(tmp_path), SMALL)
    assert len(result.entries) == 18
    assert len(result.failures) == 1
    assert result.failures[0][0] == "bad"
    assert "attractor" in result.failures[0][1]


def test_batch_strict_raises_on_failure(tmp_path):
    seqs = toy_dataset().sequences + [Sequence("bad", "BBBB", "alpha")]
    with pytest.raises(PipelineError, match="bad"):
        batch_images(Dataset(seqs), str(tmp_path), SMALL, strict=True)


def test_dataset_vectors_align_with_sequence_order():
    d = toy_dataset()
    X = dataset_vectors(d, SMALL)
    for row, seq in zip(X, d.sequences):
        want = image_vector(sequence_image(seq, SMALL).pixels, SMALL.pool_factor)
        assert np.array_equal(row, want)


def test_manifest_vectors_match_in_memory_vectors(tmp_path):
    d = toy_dataset()
    result = batch_images(d, str(tmp_path), SMALL)
    _, X_disk = manifest_vectors(result.manifest_path, SMALL.pool_factor)
    X_mem = dataset_vectors(d, SMALL)
    assert np.array_equal(X_disk, X_mem)


def test_evaluate_dataset_on_separable_toy():
    result = evaluate_dataset(toy_dataset(), SMALL)
    assert result.report.accuracy == 1.0
    assert result.k in SMALL.knn_k_candidates
    assert result.label_set == ["alpha", "beta", "gamma"]
    assert len(result.predictions) == 3
    assert result.report.train_runtime_sec > 0


def test_evaluate_manifest_matches_in_memory_result(tmp_path):
    d = toy_dataset()
    split = stratified_split(d, SMALL.test_frac, SMALL.val_frac, SMALL.seed)
    batch_images(d, str(tmp_path), SMALL, split=split)
    via_disk = evaluate_manifest(str(tmp_path / "manifest.jsonl"), SMALL)
    via_mem = evaluate_dataset(d, SMALL)
    assert via_disk.predictions.predicted_labels == via_mem.predictions.predicted_labels
    assert via_disk.report.accuracy == via_mem.report.accuracy
    assert via_disk.k == via_mem.k


def test_evaluate_manifest_requires_split_assignments(tmp_path):
    batch_images(toy_dataset(), str(tmp_path), SMALL)  # no split stamped
    with pytest.raises(PipelineError, match="without split"):
        evaluate_manifest(str(tmp_path / "manifest.jsonl"), SMALL)


def test_robustness_assessment_shape():
    result = robustness_assessment(
        toy_dataset(), SMALL, mutation_counts=(0, 2), n_seeds=2
    )
    assert result.mutation_counts == (0, 2)
    assert result.seeds == (0, 1)
    assert result.per_seed.shape == (2, 2)
    assert len(result.rows) == 2
    assert result.rows[0].sigma_l1 == 0.0
    assert result.rows[1].sigma_l1 == 2.0  # one unit of strength per mutation
    # Strength zero reuses the clean images: accuracy should be perfect here.
    assert result.rows[0].accuracy == 1.0
    assert np.isfinite(result.slope)
