"""Toy image-set fixtures: separable two-class PNGs plus a manifest."""

import json

import numpy as np
import pytest
from PIL import Image

SIZE = 32
PER_CLASS = 12  # 8 train / 2 validation / 2 test


def _toy_image(rng, label: str) -> np.ndarray:
    arr = np.zeros((SIZE, SIZE), dtype=np.uint8)
    # A bright block on the left or right half, jittered a little.
    x0 = rng.integers(2, 6) if label == "left" else rng.integers(18, 22)
    y0 = rng.integers(4, 12)
    arr[y0 : y0 + 12, x0 : x0 + 8] = rng.integers(180, 256)
    return arr


def write_toy_manifest(root, per_class=PER_CLASS, size=SIZE, seed=0):
    rng = np.random.default_rng(seed)
    (root / "images").mkdir(parents=True, exist_ok=True)
    rows = []
    for label in ("left", "right"):
        for i in range(per_class):
            sid = f"{label}{i:02d}"
            arr = _toy_image(rng, label)
            if size != SIZE:
                arr = np.asarray(
                    Image.fromarray(arr).resize((size, size), Image.NEAREST)
                )
            rel = f"images/{sid}.png"
            Image.fromarray(arr, "L").save(root / rel)
            split = ("train" if i < per_class - 4
                     else "validation" if i < per_class - 2 else "test")
            rows.append(
                {"id": sid, "label": label, "split": split, "image_path": rel,
                 "image_size": size}
            )
    path = root / "manifest.jsonl"
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")
    return path


@pytest.fixture
def toy_manifest(tmp_path):
    return write_toy_manifest(tmp_path)


@pytest.fixture
def toy_factory():
    """The manifest writer itself, for tests that need custom shapes."""
    return write_toy_manifest
