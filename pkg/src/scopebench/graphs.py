"""Structure-only views of point patterns: kNN graphs and node features."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .points import PointPattern


@dataclass
class EdgeList:
    """Undirected simple graph over pattern indices.

    Edges are stored as an (E, 2) int64 array with i < j per row, sorted
    lexicographically, so equal edge sets compare equal array-wise.
    """

    n_nodes: int
    edges: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if e.size:
            e = np.sort(e, axis=1)
            e = np.unique(e, axis=0)
            if (e[:, 0] == e[:, 1]).any():
                raise DataError("edge list contains self-loops")
            if e.max() >= self.n_nodes or e.min() < 0:
                raise DataError("edge index out of range")
        self.edges = e

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_nodes)


def normalize_coords(p: PointPattern) -> PointPattern:
    """Center a pattern and rescale it to approximately [-1, 1]^2.

    The centroid is subtracted and all coordinates are divided by the
    largest half-extent of the bounding box. Because the scale comes from
    the box (not from the centroid distance), extreme points need not touch
    +-1 exactly. A single point (or fully degenerate pattern) maps to the
    origin.
    """
    if p.n_points == 0:
        raise DataError("cannot normalize an empty pattern")
    pts = p.points
    centroid = pts.mean(axis=0)
    half_extents = (pts.max(axis=0) - pts.min(axis=0)) / 2.0
    scale = float(half_extents.max())
    if scale == 0.0:
        return p.replace_points(np.zeros_like(pts))
    return p.replace_points((pts - centroid) / scale)


def _knearest_indices(d2: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest per row of a squared-distance matrix.

    Ties are broken by (distance, lower index), identical to a stable sort
    of each full row. The fast path uses a partial partition and falls back
    to a stable sort only for rows with ties at the selection boundary.
    """
    cand = np.argpartition(d2, k - 1, axis=1)[:, :k]
    cand_d = np.take_along_axis(d2, cand, axis=1)
    tau = cand_d.max(axis=1)
    ambiguous = (d2 <= tau[:, None]).sum(axis=1) > k
    order = np.lexsort((cand, cand_d), axis=1)
    out = np.take_along_axis(cand, order, axis=1)
    for i in np.where(ambiguous)[0]:
        out[i] = np.argsort(d2[i], kind="stable")[:k]
    return out


def knn_graph(p: PointPattern, k: int = 5) -> EdgeList:
    """Symmetrized k-nearest-neighbor graph under the Euclidean metric.

    The directed kNN relation is symmetrized into an undirected edge set.
    Distance ties break toward the lower point index. If ``k >= n_points``
    it is clamped to ``n_points - 1`` with a warning.
    """
    n = p.n_points
    if n < 2:
        raise DataError("knn_graph needs at least 2 points")
    if k < 1:
        raise ConfigError("k must be >= 1")
    if k >= n:
        warnings.warn(f"k={k} >= n_points={n}; clamping to {n - 1}", stacklevel=2)
        k = n - 1
    pts = p.points
    dx = pts[:, 0, None] - pts[None, :, 0]
    dy = pts[:, 1, None] - pts[None, :, 1]
    d2 = dx * dx + dy * dy
    np.fill_diagonal(d2, np.inf)
    nbrs = _knearest_indices(d2, k)
    src = np.repeat(np.arange(n, dtype=np.int64), k)
    edges = np.column_stack([src, nbrs.ravel()])
    return EdgeList(n_nodes=n, edges=edges)


def local_degree_profile(p: PointPattern, e: EdgeList) -> np.ndarray:
    """Per-node degree statistics: (deg, min, max, mean, std of neighbor degrees).

    Isolated nodes get all-zero rows so downstream models never see NaNs.
    """
    n = e.n_nodes
    if p.n_points != n:
        raise DataError("pattern and edge list disagree on node count")
    deg = e.degrees().astype(np.float64)
    out = np.zeros((n, 5), dtype=np.float64)
    out[:, 0] = deg
    if e.n_edges == 0:
        return out
    src = np.concatenate([e.edges[:, 0], e.edges[:, 1]])
    dst = np.concatenate([e.edges[:, 1], e.edges[:, 0]])
    nd = deg[dst]
    order = np.argsort(src, kind="stable")
    src_s, nd_s = src[order], nd[order]
    bounds = np.searchsorted(src_s, np.arange(n + 1))
    for i in range(n):
        a, b = bounds[i], bounds[i + 1]
        if a == b:
            continue
        seg = nd_s[a:b]
        out[i, 1] = seg.min()
        out[i, 2] = seg.max()
        out[i, 3] = seg.mean()
        out[i, 4] = seg.std()
    return out
