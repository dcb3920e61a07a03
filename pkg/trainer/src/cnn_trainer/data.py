"""Manifest-driven image loading: JSON-lines rows plus grayscale PNGs."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass

import numpy as np
import torch
from PIL import Image

log = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "validation", "test")


class DataError(ValueError):
    """Malformed manifest, unreadable image, or inconsistent dataset."""


@dataclass
class ImageSet:
    """All manifest rows materialized as one tensor, rows in manifest order."""

    ids: list[str]
    labels: list[str]
    splits: list[str]
    images: torch.Tensor  # (n, 1, size, size) float32 in [0, 1]
    label_set: list[str]  # lexicographically sorted

    def __len__(self):
        return len(self.ids)

    def part(self, name: str) -> "ImageSet":
        if name not in SPLIT_NAMES:
            raise DataError(f"unknown split part {name!r}")
        rows = [i for i, s in enumerate(self.splits) if s == name]
        return ImageSet(
            [self.ids[i] for i in rows],
            [self.labels[i] for i in rows],
            [self.splits[i] for i in rows],
            self.images[rows],
            self.label_set,
        )


def read_manifest_rows(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as f:
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            missing = {"id", "label", "split", "image_path"} - set(row)
            if missing:
                raise DataError(f"{path} line {ln}: missing fields {sorted(missing)}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: empty manifest")
    return rows


def load_image_set(manifest_path, require_splits: bool = True) -> ImageSet:
    """Read every manifest row and its PNG into a single float tensor.

    Image paths are resolved relative to the manifest file. All images must
    share one square size; grayscale is enforced by converting through
    mode "L", so an RGB PNG would be collapsed rather than rejected.
    """
    rows = read_manifest_rows(manifest_path)
    if require_splits:
        bad = [r["id"] for r in rows if r["split"] not in SPLIT_NAMES]
        if bad:
            raise DataError(
                f"{manifest_path}: rows without train/validation/test split "
                f"(first: {bad[0]})"
            )
    base = os.path.dirname(os.path.abspath(manifest_path))
    arrays = []
    size = None
    for r in rows:
        path = os.path.join(base, r["image_path"])
        try:
            with Image.open(path) as img:
                arr = np.asarray(img.convert("L"), dtype=np.float32) / 255.0
        except OSError as exc:
            raise DataError(f"cannot read image for {r['id']}: {exc}") from exc
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DataError(f"{path}: expected a square grayscale image")
        if size is None:
            size = arr.shape[0]
        elif arr.shape[0] != size:
            raise DataError(
                f"{path}: image size {arr.shape[0]} differs from first image {size}"
            )
        arrays.append(arr)
    images = torch.from_numpy(np.stack(arrays)).unsqueeze(1)
    labels = [r["label"] for r in rows]
    log.info("loaded %d images (%dx%d) from %s", len(rows), size, size, manifest_path)
    return ImageSet(
        [r["id"] for r in rows],
        labels,
        [r["split"] for r in rows],
        images,
        sorted(set(labels)),
    )


def replicate_channels(images: torch.Tensor, n_channels: int) -> torch.Tensor:
    """Grayscale stack to the channel count an architecture expects."""
    if n_channels == images.shape[1]:
        return images
    if images.shape[1] != 1:
        raise DataError("channel replication expects single-channel input")
    return images.repeat(1, n_channels, 1, 1)


def label_indices(labels, label_set) -> torch.Tensor:
    index = {lab: i for i, lab in enumerate(label_set)}
    try:
        return torch.tensor([index[lab] for lab in labels], dtype=torch.long)
    except KeyError as exc:
        raise DataError(f"label {exc.args[0]!r} not in label set {label_set}") from None
