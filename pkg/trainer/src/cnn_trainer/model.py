"""Block-CNN construction: convolution -> ReLU -> max-pool stacks."""

from __future__ import annotations

from torch import nn

from .spec import CnnSpec


def feature_size(input_size: int, blocks: int) -> int:
    """Spatial side length after the pooling in each block."""
    size = input_size
    for _ in range(blocks):
        size //= 2
    return size


def build_model(spec: CnnSpec, n_classes: int, input_size: int) -> nn.Sequential:
    """Assemble the network for a given class count and (pooled) image size.

    Same-padded convolutions keep the spatial size inside a block; each 2x2
    max-pool halves it. The head is a single dense layer over the flattened
    final activations, emitting logits.
    """
    if n_classes < 2:
        raise ValueError("need at least two classes")
    final = feature_size(input_size, spec.blocks)
    if final < 1:
        raise ValueError(
            f"{spec.blocks} blocks collapse a {input_size}-pixel image to nothing; "
            "reduce blocks or the input pool factor"
        )
    layers: list[nn.Module] = []
    in_ch = spec.in_channels
    for out_ch in spec.channels:
        layers += [
            nn.Conv2d(in_ch, out_ch, spec.kernel_size, padding=spec.kernel_size // 2),
            nn.ReLU(),
            nn.MaxPool2d(2),
        ]
        in_ch = out_ch
    layers += [nn.Flatten(), nn.Linear(in_ch * final * final, n_classes)]
    return nn.Sequential(*layers)
