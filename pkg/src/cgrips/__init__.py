"""Sequence-to-topology imaging: chaos-game coordinates, neighborhood
complexes, persistence summaries, deterministic rasters, and a baseline
classifier over the resulting images."""

__version__ = "0.1.0"

from .cgr import (
    PROTEIN_ALPHABET,
    AlphabetLayout,
    CgrTrajectory,
    LayoutError,
    cgr_map,
    load_layout,
    protein_layout,
)
from .rips import (
    DistanceMatrix,
    PersistenceDiagramH0,
    RipsComplex,
    bottleneck_distance,
    distance_matrix,
    h0_persistence,
    rips_complex,
)
from .render import ImageGrid, RenderConfig, read_image, render_complex, write_image
from .seqio import Dataset, DatasetError, Sequence, load_dataset, stratified_split
from .config import PipelineConfig

__all__ = [
    "PROTEIN_ALPHABET",
    "AlphabetLayout",
    "CgrTrajectory",
    "Dataset",
    "DatasetError",
    "DistanceMatrix",
    "ImageGrid",
    "LayoutError",
    "PersistenceDiagramH0",
    "PipelineConfig",
    "RenderConfig",
    "RipsComplex",
    "Sequence",
    "bottleneck_distance",
    "cgr_map",
    "distance_matrix",
    "h0_persistence",
    "load_dataset",
    "load_layout",
    "protein_layout",
    "read_image",
    "render_complex",
    "rips_complex",
    "stratified_split",
    "write_image",
    "__version__",
]
