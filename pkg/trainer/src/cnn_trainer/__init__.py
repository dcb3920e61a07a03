"""Train small block CNNs on image datasets described by a JSON-lines manifest.

This package is deliberately decoupled from whatever produced the images: it
reads ``manifest.jsonl`` rows ``{id, label, split, image_path, ...}`` plus the
referenced PNGs, trains a convolution/ReLU/max-pool block network, and writes
``predictions.jsonl`` and ``metrics.json`` in the same schema the upstream
toolkit's evaluator emits, so either side can score or compare the other.
"""

__version__ = "0.1.0"

from .data import DataError, ImageSet, load_image_set
from .model import build_model
from .spec import CnnSpec
from .train import evaluate, train

__all__ = [
    "CnnSpec",
    "DataError",
    "ImageSet",
    "build_model",
    "evaluate",
    "load_image_set",
    "train",
    "__version__",
]
