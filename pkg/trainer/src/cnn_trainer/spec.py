"""Architecture and training hyperparameters, all in one frozen record."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

# Channel widths per block depth; a 4-block net repeats the last width.
DEFAULT_CHANNELS = (32, 64, 128, 128)
ALLOWED_BLOCKS = (1, 3, 4)


@dataclass(frozen=True)
class CnnSpec:
    """Block-CNN shape plus the knobs the training loop honors.

    Each block is convolution -> ReLU -> 2x2 max-pool; after the blocks the
    activations are flattened into a single dense classifier head. ``pool``
    mean-pools the input images once up front (224 -> 56 at the default 4),
    which keeps desk-scale CPU training in the minutes range without
    touching the on-disk dataset.
    """

    blocks: int = 3
    channels: tuple[int, ...] = field(default=())
    kernel_size: int = 3
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    patience: int = 10
    pool: int = 4
    in_channels: int = 1
    deterministic: bool = True

    def __post_init__(self):
        if self.blocks not in ALLOWED_BLOCKS:
            raise ValueError(f"blocks must be one of {ALLOWED_BLOCKS}, got {self.blocks}")
        channels = tuple(int(c) for c in self.channels) or DEFAULT_CHANNELS[: self.blocks]
        object.__setattr__(self, "channels", channels)
        if len(self.channels) != self.blocks:
            raise ValueError(
                f"{self.blocks} blocks need {self.blocks} channel widths, "
                f"got {self.channels}"
            )
        if any(c < 1 for c in self.channels):
            raise ValueError("channel widths must be positive")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be odd and positive")
        if self.epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ValueError("epochs, batch_size, and patience must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.pool < 1 or self.in_channels < 1:
            raise ValueError("pool and in_channels must be >= 1")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, raw: dict) -> "CnnSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown spec keys: {sorted(unknown)}")
        raw = dict(raw)
        if "channels" in raw:
            raw["channels"] = tuple(raw["channels"])
        return cls(**raw)
