"""Neighborhood binning of spatial-transcriptomics spot grids.

Spots sit on a square or hexagonal lattice in slide coordinates (microns).
For every anchor spot we collect its immediate lattice neighborhood (up to
9 total spots on square grids, 7 on hex grids), take the union of member
patch squares as the bounding box, and average per-spot target vectors.
Edge spots keep their partial neighborhoods; patches whose box contains no
detected cell are dropped.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, DataError

# Any spot closer than this multiple of the lattice pitch counts as an
# immediate neighbor: covers the 8-neighborhood (incl. diagonals at
# sqrt(2) * pitch) on square grids and the 6-neighborhood on hex grids,
# while excluding the next ring (2x / sqrt(3)x pitch).
NEIGHBOR_RADIUS_FACTOR = 1.5


class GridKind(str, enum.Enum):
    SQUARE = "square"
    HEX = "hex"


_MAX_NEIGHBORS = {GridKind.SQUARE: 8, GridKind.HEX: 6}


@dataclass
class SpotGrid:
    spot_ids: list[str]
    centers: np.ndarray  # (n, 2) float64, microns
    grid_kind: GridKind
    pixel_size_um: float

    def __post_init__(self) -> None:
        self.centers = np.asarray(self.centers, dtype=np.float64).reshape(-1, 2)
        self.grid_kind = GridKind(self.grid_kind)
        if self.pixel_size_um <= 0:
            raise ConfigError("pixel_size_um must be positive")
        if len(self.spot_ids) != self.centers.shape[0]:
            raise DataError("spot id/center count mismatch")
        if len(set(self.spot_ids)) != len(self.spot_ids):
            raise DataError("spot ids must be unique")

    @property
    def n_spots(self) -> int:
        return int(self.centers.shape[0])


@dataclass
class BinnedPatch:
    anchor_spot_id: str
    member_spot_ids: list[str]
    bounding_box: tuple[float, float, float, float]  # x0, y0, x1, y1
    averaged_targets: np.ndarray | None = None


def grid_pitch(centers: np.ndarray) -> float:
    """Lattice pitch estimated as the median nearest-neighbor distance."""
    if centers.shape[0] < 2:
        return 0.0
    tree = cKDTree(centers)
    dist, _ = tree.query(centers, k=2)
    return float(np.median(dist[:, 1]))


def bin_spots(grid: SpotGrid, patch_extent_um: float) -> list[BinnedPatch]:
    """Build one neighborhood patch per anchor spot (membership only).

    Members are the anchor plus every spot within 1.5x the lattice pitch,
    capped at the 8 (square) or 6 (hex) nearest; ties break by (distance,
    spot index). The bounding box is the union of member patch squares of
    side ``patch_extent_um`` centered on the spot centers. Targets are left
    unset; see :func:`average_targets`.
    """
    if grid.n_spots < 1:
        raise DataError("spot grid is empty")
    if patch_extent_um <= 0:
        raise ConfigError("patch_extent_um must be positive")
    cap = _MAX_NEIGHBORS[grid.grid_kind]
    centers = grid.centers
    half = patch_extent_um / 2.0
    patches: list[BinnedPatch] = []
    if grid.n_spots == 1:
        ids = [grid.spot_ids[0]]
        x, y = centers[0]
        return [
            BinnedPatch(ids[0], ids, (x - half, y - half, x + half, y + half))
        ]
    pitch = grid_pitch(centers)
    radius = NEIGHBOR_RADIUS_FACTOR * pitch
    tree = cKDTree(centers)
    neighbor_lists = tree.query_ball_point(centers, r=radius)
    for i in range(grid.n_spots):
        others = [j for j in neighbor_lists[i] if j != i]
        if others:
            d = np.linalg.norm(centers[others] - centers[i], axis=1)
            order = np.lexsort((others, d))
            others = [others[o] for o in order[:cap]]
        members = [i] + others
        mc = centers[members]
        box = (
            float(mc[:, 0].min() - half),
            float(mc[:, 1].min() - half),
            float(mc[:, 0].max() + half),
            float(mc[:, 1].max() + half),
        )
        patches.append(
            BinnedPatch(
                anchor_spot_id=grid.spot_ids[i],
                member_spot_ids=[grid.spot_ids[m] for m in members],
                bounding_box=box,
            )
        )
    return patches


def average_targets(
    patch: BinnedPatch, per_spot_targets: dict[str, np.ndarray]
) -> np.ndarray:
    """Componentwise mean of member target vectors."""
    rows = []
    dim = None
    for sid in patch.member_spot_ids:
        if sid not in per_spot_targets:
            raise DataError(f"missing target vector for spot {sid!r}")
        v = np.asarray(per_spot_targets[sid], dtype=np.float64)
        if dim is None:
            dim = v.shape
        elif v.shape != dim:
            raise DataError(f"target length mismatch at spot {sid!r}")
        rows.append(v)
    return np.mean(rows, axis=0)


def drop_empty_patches(
    patches: list[BinnedPatch], cell_xy: np.ndarray
) -> list[BinnedPatch]:
    """Remove patches whose bounding box contains no cell centroid."""
    cells = np.asarray(cell_xy, dtype=np.float64).reshape(-1, 2)
    if cells.shape[0] == 0:
        return []
    kept = []
    for p in patches:
        x0, y0, x1, y1 = p.bounding_box
        inside = (
            (cells[:, 0] >= x0)
            & (cells[:, 0] <= x1)
            & (cells[:, 1] >= y0)
            & (cells[:, 1] <= y1)
        )
        if inside.any():
            kept.append(p)
    return kept


# ----------------------------------------------------------------------
# CSV inputs
# ----------------------------------------------------------------------


def read_cells_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Per-slide cell centroids: header ``cell_id,x_um,y_um``."""
    ids: list[str] = []
    xy: list[tuple[float, float]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"cell_id", "x_um", "y_um"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected header cell_id,x_um,y_um")
        for row in reader:
            ids.append(row["cell_id"])
            xy.append((float(row["x_um"]), float(row["y_um"])))
    return ids, np.asarray(xy, dtype=np.float64).reshape(-1, 2)


def read_spot_grid_csv(path: Path) -> SpotGrid:
    """Spot grid: header ``spot_id,x_um,y_um,grid_kind,pixel_size_um``."""
    ids: list[str] = []
    xy: list[tuple[float, float]] = []
    kinds: set[str] = set()
    sizes: set[float] = set()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"spot_id", "x_um", "y_um", "grid_kind", "pixel_size_um"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DataError(
                f"{path}: expected header spot_id,x_um,y_um,grid_kind,pixel_size_um"
            )
        for row in reader:
            ids.append(row["spot_id"])
            xy.append((float(row["x_um"]), float(row["y_um"])))
            kinds.add(row["grid_kind"])
            sizes.add(float(row["pixel_size_um"]))
    if not ids:
        raise DataError(f"{path}: no spots")
    if len(kinds) != 1 or len(sizes) != 1:
        raise DataError(f"{path}: grid_kind/pixel_size_um must be constant per slide")
    return SpotGrid(
        spot_ids=ids,
        centers=np.asarray(xy, dtype=np.float64),
        grid_kind=GridKind(kinds.pop()),
        pixel_size_um=sizes.pop(),
    )
