"""Chaos-game coordinates: attractor layouts and the contraction trajectory.

Each alphabet symbol owns a fixed 2D attractor point. A sequence is mapped to
a trajectory by repeatedly contracting toward the attractor of the next
symbol:

    p_i = alpha * p_{i-1} + (1 - alpha) * c(s_i)

The default protein layout places the 20 standard amino acids (alphabetical
order) on a regular 20-gon inscribed in the unit circle, with the trajectory
starting at the centroid (0, 0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .seqio import Sequence

# 20 standard amino acids, alphabetical one-letter codes.
PROTEIN_ALPHABET = "ACDEFGHIKLMNPQRSTVWY"


class LayoutError(ValueError):
    """Raised for malformed attractor layouts or symbols without attractors."""


@dataclass
class AlphabetLayout:
    """Fixed attractor coordinates for an alphabet plus the contraction factor.

    Attributes:
        symbols: ordered alphabet symbols.
        coords: (n_symbols, 2) attractor coordinates, all inside [-1, 1]^2.
        alpha: contraction factor, strictly inside (0, 1).
        origin: starting point of every trajectory.
    """

    symbols: tuple[str, ...]
    coords: np.ndarray
    alpha: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        self.symbols = tuple(self.symbols)
        self.coords = np.asarray(self.coords, dtype=np.float64)
        self.origin = np.asarray(self.origin, dtype=np.float64)
        if not 0.0 < self.alpha < 1.0:
            raise LayoutError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.coords.shape != (len(self.symbols), 2):
            raise LayoutError(
                f"coords shape {self.coords.shape} does not match "
                f"{len(self.symbols)} symbols"
            )
        if self.origin.shape != (2,):
            raise LayoutError("origin must be a 2D point")
        if len(set(self.symbols)) != len(self.symbols):
            raise LayoutError("duplicate symbols in layout")
        if np.abs(self.coords).max(initial=0.0) > 1.0 or np.abs(self.origin).max() > 1.0:
            raise LayoutError("attractor coordinates and origin must lie in [-1, 1]^2")
        self._index = {s: i for i, s in enumerate(self.symbols)}
        self._min_sep = _min_pairwise_distance(self.coords)
        if len(self.symbols) >= 2 and self._min_sep == 0.0:
            raise LayoutError("attractor coordinates must be pairwise distinct")

    @property
    def min_separation(self) -> float:
        """Smallest distance between two attractors (spacing of the layout)."""
        return self._min_sep

    def coord(self, symbol: str) -> np.ndarray:
        i = self._index.get(symbol)
        if i is None:
            raise LayoutError(f"symbol {symbol!r} has no attractor in this layout")
        return self.coords[i]

    def indices(self, residues: str) -> np.ndarray:
        """Map a residue string to attractor indices, failing on unknown symbols."""
        try:
            return np.array([self._index[s] for s in residues], dtype=np.intp)
        except KeyError as exc:
            raise LayoutError(
                f"symbol {exc.args[0]!r} has no attractor in this layout"
            ) from None

    def sub_layout(self, symbols: str) -> "AlphabetLayout":
        """Restrict the layout to a subset of its symbols (same coordinates)."""
        idx = self.indices(symbols)
        return AlphabetLayout(tuple(symbols), self.coords[idx], self.alpha, self.origin)


@dataclass
class CgrTrajectory:
    """Ordered 2D points p_1..p_n produced by the contraction recursion."""

    points: np.ndarray
    source_id: str = ""

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("trajectory points must have shape (n, 2)")

    def __len__(self):
        return len(self.points)


def _min_pairwise_distance(coords: np.ndarray) -> float:
    if len(coords) < 2:
        return math.inf
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    return float(d[np.triu_indices(len(coords), k=1)].min())


def protein_layout(alpha: float = 0.5) -> AlphabetLayout:
    """Regular 20-gon layout for the standard amino acids.

    Symbol k (alphabetical order) sits at angle 2*pi*k/20 on the unit circle,
    so 'A' is at (1, 0). The origin is the centroid (0, 0) and the minimum
    attractor separation is 2*sin(pi/20).
    """
    k = np.arange(20)
    ang = 2.0 * np.pi * k / 20.0
    coords = np.column_stack((np.cos(ang), np.sin(ang)))
    return AlphabetLayout(tuple(PROTEIN_ALPHABET), coords, alpha)


def load_layout(path) -> AlphabetLayout:
    """Load a custom layout from JSON: {"alpha": a, "origin": [x, y], "coords": {sym: [x, y]}}.

    Symbols are ordered lexicographically so the layout is independent of key
    order in the file. Validates the same invariants as the built-in layout.
    """
    with open(path) as f:
        raw = json.load(f)
    if "coords" not in raw or "alpha" not in raw:
        raise LayoutError(f"{path}: layout file needs 'alpha' and 'coords'")
    symbols = tuple(sorted(raw["coords"]))
    coords = np.array([raw["coords"][s] for s in symbols], dtype=np.float64)
    origin = np.asarray(raw.get("origin", (0.0, 0.0)), dtype=np.float64)
    return AlphabetLayout(symbols, coords, float(raw["alpha"]), origin)


def cgr_map(seq: "Sequence", layout: AlphabetLayout) -> CgrTrajectory:
    """Compute the chaos-game trajectory of a sequence.

    Applies p_i = alpha*p_{i-1} + (1-alpha)*c(s_i) starting from the layout
    origin, in plain float64, one step per residue.
    """
    return CgrTrajectory(trajectory_points(seq.residues, layout), source_id=seq.id)


def trajectory_points(residues: str, layout: AlphabetLayout) -> np.ndarray:
    """Trajectory of a raw residue string (see cgr_map)."""
    idx = layout.indices(residues)
    a = layout.alpha
    b = 1.0 - a
    pts = np.empty((len(idx), 2))
    p = layout.origin.copy()
    attractors = layout.coords
    for i, k in enumerate(idx):
        p = a * p + b * attractors[k]
        pts[i] = p
    return pts


def final_point(traj: CgrTrajectory) -> np.ndarray:
    """Last trajectory point p_n; the whole-sequence fingerprint."""
    if len(traj.points) == 0:
        raise ValueError("empty trajectory has no final point")
    return traj.points[-1]
