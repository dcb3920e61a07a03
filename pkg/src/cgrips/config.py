"""Pipeline configuration: one dataclass, JSON round-trip, run provenance."""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass, field

from . import __version__
from .cgr import AlphabetLayout, protein_layout
from .render import FIXED_UNIT_BOX, RenderConfig


@dataclass
class PipelineConfig:
    """Everything the sequence-to-image-to-classifier pipeline needs.

    Defaults match the reference setup: contraction 0.5 on the 20-gon
    layout, neighborhood scale 0.3, 224x224 rasters, 20%% test and 30%%
    validation splits, and k-NN feature pooling by a factor of 4.
    """

    alpha: float = 0.5
    epsilon: float = 0.3
    epsilon_list: tuple[float, ...] | None = None
    image_size: int = 224
    margin_frac: float = 0.05
    vertex_radius: int = 2
    coordinate_frame: str = FIXED_UNIT_BOX
    include_triangles: bool = False
    test_frac: float = 0.2
    val_frac: float = 0.3
    seed: int = 0
    knn_k_candidates: tuple[int, ...] = (1, 3, 5, 7)
    pool_factor: int = 4
    threads: int = 4

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.epsilon_list is not None:
            self.epsilon_list = tuple(float(e) for e in self.epsilon_list)
            if not self.epsilon_list:
                raise ValueError("epsilon_list must be non-empty when given")
            if any(e < 0 for e in self.epsilon_list):
                raise ValueError("epsilon_list values must be >= 0")
            if any(b <= a for a, b in zip(self.epsilon_list, self.epsilon_list[1:])):
                raise ValueError("epsilon_list must be strictly increasing")
        if not 0.0 < self.test_frac < 1.0 or not 0.0 < self.val_frac < 1.0:
            raise ValueError("split fractions must be in (0, 1)")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.pool_factor < 1:
            raise ValueError("pool_factor must be >= 1")
        if self.image_size % self.pool_factor:
            raise ValueError(
                f"pool_factor {self.pool_factor} must divide image_size {self.image_size}"
            )
        self.knn_k_candidates = tuple(int(k) for k in self.knn_k_candidates)
        if not self.knn_k_candidates:
            raise ValueError("knn_k_candidates must be non-empty")
        # delegate range checks for the rendering fields
        self.render_config()
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")

    def render_config(self) -> RenderConfig:
        return RenderConfig(
            image_size=self.image_size,
            margin_frac=self.margin_frac,
            vertex_radius=self.vertex_radius,
            coordinate_frame=self.coordinate_frame,
        )

    def layout(self) -> AlphabetLayout:
        return protein_layout(alpha=self.alpha)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["knn_k_candidates"] = list(self.knn_k_candidates)
        if self.epsilon_list is not None:
            d["epsilon_list"] = list(self.epsilon_list)
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def write_run_config(path, config: PipelineConfig, command: str, **extra) -> None:
    """Record what produced a run directory: config, command line, version."""
    payload = {
        "version": __version__,
        "command": command,
        "argv": sys.argv[1:],
        "config": config.to_dict(),
    }
    payload.update(extra)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
