"""Distance matrices, Rips complexes, H0 persistence, bottleneck distance.

A Rips complex at threshold eps keeps every vertex and connects pairs whose
Euclidean distance is <= eps (boundary included). Construction is restricted
to vertices and edges, with triangles behind an explicit flag. H0 persistence
comes from single-linkage merging: processing edges by ascending weight, each
union of two components records a death, and the component surviving at the
end is the single infinite class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cgr import CgrTrajectory


@dataclass
class DistanceMatrix:
    """Symmetric matrix of pairwise Euclidean distances with zero diagonal."""

    d: np.ndarray

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=np.float64)
        if self.d.ndim != 2 or self.d.shape[0] != self.d.shape[1]:
            raise ValueError("distance matrix must be square")

    @property
    def n(self) -> int:
        return self.d.shape[0]


@dataclass
class RipsComplex:
    """Vertices 0..n-1 plus the edges (and optional triangles) within epsilon."""

    epsilon: float
    n_vertices: int
    edges: np.ndarray  # (m, 2) int, i < j, lexicographically sorted
    triangles: np.ndarray | None = None  # (t, 3) int, i < j < k, or None

    @property
    def vertices(self) -> np.ndarray:
        return np.arange(self.n_vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


@dataclass
class PersistenceDiagramH0:
    """Birth/death pairs of connected components along the Rips filtration.

    Every component is born at 0; finite deaths are the merge weights
    (equivalently the minimum-spanning-tree edge weights) in ascending order,
    and exactly one component never dies.
    """

    finite_deaths: np.ndarray
    n_infinite: int = 1

    def __post_init__(self):
        self.finite_deaths = np.asarray(self.finite_deaths, dtype=np.float64)

    def pairs(self) -> list[tuple[float, float]]:
        out = [(0.0, float(d)) for d in self.finite_deaths]
        out.extend((0.0, math.inf) for _ in range(self.n_infinite))
        return out


def distance_matrix(traj: CgrTrajectory) -> DistanceMatrix:
    """All pairwise Euclidean distances of a trajectory."""
    p = traj.points
    if len(p) == 0:
        raise ValueError("cannot build a distance matrix from an empty trajectory")
    diff = p[:, None, :] - p[None, :, :]
    return DistanceMatrix(np.sqrt((diff**2).sum(axis=2)))


def rips_complex(
    dm: DistanceMatrix, epsilon: float, include_triangles: bool = False
) -> RipsComplex:
    """Build the complex at one threshold: edge (i, j) iff d[i][j] <= epsilon."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    n = dm.n
    iu, ju = np.triu_indices(n, k=1)
    mask = dm.d[iu, ju] <= epsilon
    edges = np.column_stack((iu[mask], ju[mask]))  # triu order is lexicographic
    triangles = None
    if include_triangles:
        adj = dm.d <= epsilon
        cond = adj[:, :, None] & adj[:, None, :] & adj[None, :, :]
        i = np.arange(n)
        ordered = (i[:, None, None] < i[None, :, None]) & (i[None, :, None] < i[None, None, :])
        triangles = np.argwhere(cond & ordered)
    return RipsComplex(float(epsilon), n, edges, triangles)


def epsilon_sweep(
    dm: DistanceMatrix, epsilons, include_triangles: bool = False
) -> list[RipsComplex]:
    """One complex per threshold; thresholds must be strictly ascending and >= 0."""
    eps = [float(e) for e in epsilons]
    if not eps:
        raise ValueError("epsilon list is empty")
    if eps[0] < 0 or any(b <= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be strictly ascending and >= 0")
    return [rips_complex(dm, e, include_triangles) for e in eps]


class _UnionFind:
    __slots__ = ("parent", "rank")

    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]  # path halving
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def h0_persistence(dm: DistanceMatrix) -> PersistenceDiagramH0:
    """Single-linkage persistence of connected components.

    Edges are processed by ascending weight (ties broken by index pair); each
    merge emits a death at the edge weight, leaving n-1 finite pairs for n
    points in general position plus the one infinite component.
    """
    n = dm.n
    if n < 1:
        raise ValueError("need at least one point")
    iu, ju = np.triu_indices(n, k=1)
    w = dm.d[iu, ju]
    order = np.lexsort((ju, iu, w))
    uf = _UnionFind(n)
    deaths = []
    for t in order:
        if uf.union(int(iu[t]), int(ju[t])):
            deaths.append(float(w[t]))
            if len(deaths) == n - 1:
                break
    return PersistenceDiagramH0(np.array(deaths))


def component_count(diagram: PersistenceDiagramH0, epsilon: float) -> int:
    """Number of connected components at threshold epsilon.

    Equals n minus the number of finite deaths <= epsilon.
    """
    n = len(diagram.finite_deaths) + diagram.n_infinite
    return n - int(np.count_nonzero(diagram.finite_deaths <= epsilon))


# ---------------------------------------------------------------------------
# Bottleneck distance
# ---------------------------------------------------------------------------

# Finite parts up to this size use the exact bitmask DP; larger ones use the
# threshold search with bipartite matching (also exact: the optimum is always
# one of the candidate costs).
_SMALL_DIAGRAM = 12


def bottleneck_distance(a: PersistenceDiagramH0, b: PersistenceDiagramH0) -> float:
    """Min-max matching distance between two diagrams, diagonal allowed.

    The infinite pairs are matched to each other by convention, so the result
    is driven by the finite parts. Costs are sup-norm displacements; an
    unmatched point pays half its lifetime (projection to the diagonal).
    """
    if a.n_infinite != b.n_infinite:
        raise ValueError(
            f"diagrams have different infinite-pair counts "
            f"({a.n_infinite} vs {b.n_infinite})"
        )
    pa = np.column_stack((np.zeros(len(a.finite_deaths)), a.finite_deaths))
    pb = np.column_stack((np.zeros(len(b.finite_deaths)), b.finite_deaths))
    return bottleneck_points(pa, pb)


def bottleneck_points(pa: np.ndarray, pb: np.ndarray) -> float:
    """Bottleneck distance between two finite (birth, death) point sets."""
    pa = np.asarray(pa, dtype=np.float64).reshape(-1, 2)
    pb = np.asarray(pb, dtype=np.float64).reshape(-1, 2)
    if len(pa) == 0 and len(pb) == 0:
        return 0.0
    if max(len(pa), len(pb)) <= _SMALL_DIAGRAM:
        return _bottleneck_small(pa, pb)
    return _bottleneck_threshold(pa, pb)


def _costs(pa, pb):
    """cost[i][j] = sup-norm distance; diag[i] = cost of diagonal projection."""
    cost = np.maximum(
        np.abs(pa[:, 0][:, None] - pb[:, 0][None, :]),
        np.abs(pa[:, 1][:, None] - pb[:, 1][None, :]),
    )
    diag_a = (pa[:, 1] - pa[:, 0]) / 2.0
    diag_b = (pb[:, 1] - pb[:, 0]) / 2.0
    return cost, diag_a, diag_b


def _bottleneck_small(pa, pb):
    """Exact minimax over all partial matchings via bitmask DP."""
    cost, diag_a, diag_b = _costs(pa, pb)
    na, nb = len(pa), len(pb)
    full = (1 << nb) - 1

    @lru_cache(maxsize=None)
    def best(i, used):
        if i == na:
            worst = 0.0
            for j in range(nb):
                if not used >> j & 1:
                    worst = max(worst, diag_b[j])
            return worst
        # send point i to the diagonal
        out = max(diag_a[i], best(i + 1, used))
        for j in range(nb):
            if not used >> j & 1:
                c = cost[i, j]
                if c < out:
                    out = min(out, max(c, best(i + 1, used | 1 << j)))
        return out

    try:
        return float(best(0, 0))
    finally:
        best.cache_clear()


def _bottleneck_threshold(pa, pb):
    """Binary search over candidate costs; feasibility via bipartite matching."""
    cost, diag_a, diag_b = _costs(pa, pb)
    candidates = np.unique(np.concatenate((cost.ravel(), diag_a, diag_b, [0.0])))
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _feasible(candidates[mid], cost, diag_a, diag_b):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def _feasible(t, cost, diag_a, diag_b):
    """Is there a perfect matching where every assignment costs <= t?

    Left side: points of A plus one diagonal slot per point of B. Right side:
    points of B plus one diagonal slot per point of A. A diagonal slot of B
    may absorb any diagonal slot of A at zero cost.
    """
    na, nb = len(diag_a), len(diag_b)
    n_left = na + nb
    n_right = nb + na
    adj = []
    for i in range(na):
        opts = list(np.nonzero(cost[i] <= t)[0])
        if diag_a[i] <= t:
            opts.append(nb + i)
        adj.append(opts)
    for j in range(nb):
        opts = list(range(nb, n_right))  # any diagonal slot of A, free
        if diag_b[j] <= t:
            opts.insert(0, j)
        adj.append(opts)

    match_right = [-1] * n_right

    def augment(u, seen):
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                if match_right[v] == -1 or augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    matched = 0
    for u in range(n_left):
        if augment(u, [False] * n_right):
            matched += 1
        else:
            return False
    return matched == n_left


# ---------------------------------------------------------------------------
# JSON export
# ---------------------------------------------------------------------------


def complex_to_json(cx: RipsComplex, traj: CgrTrajectory) -> dict:
    """Debug/golden export: threshold, coordinates, edge list, triangles."""
    out = {
        "epsilon": cx.epsilon,
        "coords": [[float(x), float(y)] for x, y in traj.points],
        "edges": [[int(i), int(j)] for i, j in cx.edges],
    }
    if cx.triangles is not None:
        out["triangles"] = [[int(i), int(j), int(k)] for i, j, k in cx.triangles]
    return out


def persistence_to_json(diagram: PersistenceDiagramH0) -> list:
    """[[birth, death], ...] with null standing in for the infinite death."""
    return [[b, None if math.isinf(d) else d] for b, d in diagram.pairs()]
