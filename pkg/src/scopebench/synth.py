"""Synthetic 24-class point-pattern benchmark.

Each class pairs a sampling mechanism (noisy grid or uniform-rate Poisson
process) with density and/or noise landscapes on the unit square. The
registry below reproduces the benchmark's class table; classes 0-7 and 13
are noisy grids, the rest are inhomogeneous Poisson draws with mean count
900.

All samplers are pure functions of (spec, seed). Streams are derived with
``numpy.random.SeedSequence`` (PCG64), so datasets regenerate bit-identically
from a master seed, and every individual sample regenerates from the 64-bit
seed written into its file header.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .landscapes import IntensityLandscape, LandscapeKind
from .points import PointPattern

# Calibration of the adaptive grid: a uniform density at V voxels yields
# GRID_POINTS_PER_SIDE points per side in total (3x3 per voxel at V=10,
# i.e. exactly 900 points).
GRID_POINTS_PER_SIDE = 30

# Sub-grid used to estimate per-voxel density means.
_VOXEL_MEAN_SAMPLES = 8

SPLIT_NAMES = ("train", "val", "test")


class SamplingKind(str, enum.Enum):
    NOISY_GRID = "noisy_grid"
    UNIFORM_POISSON = "uniform_poisson"


@dataclass(frozen=True)
class ClassSpec:
    class_id: int
    sampling: SamplingKind
    voxels: int | None = None
    density: IntensityLandscape | None = None
    noise: IntensityLandscape | None = None
    base_noise_std: float = 0.01
    target_count: float = 900.0

    def to_dict(self) -> dict:
        return {
            "class_id": self.class_id,
            "sampling": self.sampling.value,
            "voxels": self.voxels,
            "density": self.density.to_dict() if self.density else None,
            "noise": self.noise.to_dict() if self.noise else None,
            "base_noise_std": self.base_noise_std,
            "target_count": self.target_count,
        }

    @staticmethod
    def from_dict(d: dict) -> "ClassSpec":
        return ClassSpec(
            class_id=d["class_id"],
            sampling=SamplingKind(d["sampling"]),
            voxels=d.get("voxels"),
            density=IntensityLandscape.from_dict(d["density"]) if d.get("density") else None,
            noise=IntensityLandscape.from_dict(d["noise"]) if d.get("noise") else None,
            base_noise_std=d.get("base_noise_std", 0.01),
            target_count=d.get("target_count", 900.0),
        )


def _registry() -> tuple[ClassSpec, ...]:
    L = IntensityLandscape
    grid = SamplingKind.NOISY_GRID
    pois = SamplingKind.UNIFORM_POISSON
    r3 = float(np.sqrt(0.2**2 / 3))
    r5 = float(np.sqrt(0.2**2 / 5))
    specs = [
        ClassSpec(0, grid, voxels=10, noise=L.constant()),
        ClassSpec(1, grid, voxels=10, noise=L.slope(3, 3)),
        ClassSpec(2, grid, voxels=10, density=L.slope(3, 3)),
        ClassSpec(3, grid, voxels=4, density=L.step(0.5, 1)),
        ClassSpec(4, grid, voxels=10, density=L.discs_emboss(1, 0.1, 2)),
        ClassSpec(5, grid, voxels=10, density=L.discs_emboss(3, 0.1, 2)),
        ClassSpec(6, grid, voxels=10, density=L.discs_deboss(1, 0.1)),
        ClassSpec(7, grid, voxels=10, density=L.discs_deboss(3, 0.1)),
        ClassSpec(8, pois, density=L.discs_emboss(3, 0.1, 2)),
        ClassSpec(9, pois, density=L.discs_deboss(1, 0.1)),
        ClassSpec(10, pois, density=L.constant()),
        ClassSpec(11, pois, density=L.discs_emboss(1, 0.1, 2)),
        ClassSpec(12, pois, density=L.discs_deboss(1, 0.1)),
        ClassSpec(13, grid, voxels=10, noise=L.step(0.5, 1)),
        ClassSpec(14, pois, density=L.discs_emboss(3, r3, 2)),
        ClassSpec(15, pois, density=L.discs_deboss(3, r3)),
        ClassSpec(16, pois, density=L.discs_emboss(5, r5, 2)),
        ClassSpec(17, pois, density=L.discs_deboss(5, r5)),
        ClassSpec(18, pois, density=L.slope(3, 3)),
        ClassSpec(19, pois, density=L.slope(2, 2)),
        ClassSpec(20, pois, density=L.slope(1, 1)),
        ClassSpec(21, pois, density=L.discs_emboss(1, 0.2, 2)),
        ClassSpec(22, pois, density=L.discs_deboss(1, 0.2)),
        ClassSpec(23, pois, density=L.step(0.5, 1)),
    ]
    return tuple(specs)


CLASS_REGISTRY: tuple[ClassSpec, ...] = _registry()
N_CLASSES = len(CLASS_REGISTRY)


def class_spec(class_id: int) -> ClassSpec:
    if not 0 <= class_id < N_CLASSES:
        raise ConfigError(f"unknown class_id {class_id}; registry holds 0..{N_CLASSES - 1}")
    return CLASS_REGISTRY[class_id]


# ----------------------------------------------------------------------
# Samplers
# ----------------------------------------------------------------------


def _mean_intensity(density: IntensityLandscape, samples: int = 64) -> float:
    g = (np.arange(samples) + 0.5) / samples
    gx, gy = np.meshgrid(g, g, indexing="ij")
    return float(density.evaluate(gx, gy).mean())


def sample_poisson(
    density: IntensityLandscape, mean_count: float, rng: np.random.Generator
) -> PointPattern:
    """Draw an inhomogeneous Poisson pattern on the unit square.

    The total count is Poisson(``mean_count``); positions are i.i.d. with
    density proportional to the landscape, realized by rejection against
    its supremum. Zero-density regions therefore contain no points.
    """
    if mean_count <= 0:
        raise ConfigError("mean_count must be positive")
    density = density.resolve_discs(rng)
    sup = density.sup()
    if sup <= 0 or _mean_intensity(density) <= 0:
        raise ConfigError("density is identically zero; cannot normalize")
    n = int(rng.poisson(mean_count))
    accepted = np.empty((0, 2), dtype=np.float64)
    while accepted.shape[0] < n:
        want = n - accepted.shape[0]
        m = max(2 * want, 64)
        cand = rng.uniform(0.0, 1.0, size=(m, 2))
        u = rng.uniform(0.0, 1.0, size=m)
        lam = density.evaluate(cand[:, 0], cand[:, 1])
        keep = cand[u * sup < lam]
        accepted = np.concatenate([accepted, keep], axis=0)
    return PointPattern(points=accepted[:n])


def _voxel_means(density: IntensityLandscape | None, voxels: int) -> np.ndarray:
    """Per-voxel mean density, estimated on a midpoint sub-grid."""
    if density is None:
        return np.ones((voxels, voxels))
    g = _VOXEL_MEAN_SAMPLES
    t = (np.arange(voxels * g) + 0.5) / (voxels * g)
    gx, gy = np.meshgrid(t, t, indexing="ij")
    vals = density.evaluate(gx, gy)
    return vals.reshape(voxels, g, voxels, g).mean(axis=(1, 3))


def grid_resolutions(density: IntensityLandscape | None, voxels: int) -> np.ndarray:
    """Sub-grid side length per voxel for the adaptive noisy grid.

    Each voxel carries an s x s regular sub-grid with
    ``s = round(s0 * sqrt(mean_v / mean_all))`` where ``mean_v`` is the
    voxel's mean density, ``mean_all`` the mean over all voxels, and
    ``s0 = GRID_POINTS_PER_SIDE / voxels`` (3 per voxel at V=10, so a
    uniform density yields exactly 900 points). Ties round to even.
    """
    if voxels < 1:
        raise ConfigError("voxels must be >= 1")
    means = _voxel_means(density, voxels)
    overall = means.mean()
    if overall <= 0:
        raise ConfigError("density is identically zero; cannot build a grid")
    s0 = GRID_POINTS_PER_SIDE / voxels
    return np.round(s0 * np.sqrt(means / overall)).astype(np.int64)


def sample_noisy_grid(
    density: IntensityLandscape | None,
    noise: IntensityLandscape | None,
    voxels: int,
    base_noise_std: float,
    rng: np.random.Generator,
) -> PointPattern:
    """Adaptive square-grid pattern with Gaussian positional jitter.

    The unit square splits into V x V voxels; each voxel gets a regular
    cell-centered sub-grid whose resolution follows the local density (see
    :func:`grid_resolutions`). Grid nodes are perturbed by isotropic
    Gaussian noise with std ``base_noise_std * noise(x, y)`` (1 if no noise
    landscape), clamped back into the unit square. Points landing where the
    density is exactly zero (deboss disc interiors) are dropped.
    """
    if density is not None:
        density = density.resolve_discs(rng)
    if noise is not None:
        noise = noise.resolve_discs(rng)
    sides = grid_resolutions(density, voxels)
    coords = []
    width = 1.0 / voxels
    for vi in range(voxels):
        for vj in range(voxels):
            s = int(sides[vi, vj])
            if s < 1:
                continue
            offs = (np.arange(s) + 0.5) / s * width
            px, py = np.meshgrid(vi * width + offs, vj * width + offs, indexing="ij")
            coords.append(np.column_stack([px.ravel(), py.ravel()]))
    pts = (
        np.concatenate(coords, axis=0)
        if coords
        else np.empty((0, 2), dtype=np.float64)
    )
    if pts.shape[0] and base_noise_std > 0:
        sigma = base_noise_std * (
            noise.evaluate(pts[:, 0], pts[:, 1]) if noise is not None else 1.0
        )
        pts = pts + rng.standard_normal(pts.shape) * np.asarray(sigma).reshape(-1, 1)
        pts = np.clip(pts, 0.0, 1.0)
    if density is not None and pts.shape[0]:
        pts = pts[density.evaluate(pts[:, 0], pts[:, 1]) > 0]
    return PointPattern(points=pts)


def generate_class(class_id: int, rng: np.random.Generator) -> PointPattern:
    """Generate one pattern of the given synthetic class."""
    spec = class_spec(class_id)
    if spec.sampling == SamplingKind.NOISY_GRID:
        pat = sample_noisy_grid(
            spec.density, spec.noise, spec.voxels or 1, spec.base_noise_std, rng
        )
    else:
        pat = sample_poisson(spec.density or IntensityLandscape.constant(),
                             spec.target_count, rng)
    pat.class_id = class_id
    return pat


# ----------------------------------------------------------------------
# Datasets and splits
# ----------------------------------------------------------------------


@dataclass
class SynthDataset:
    splits: dict[str, list[PointPattern]]
    registry: tuple[ClassSpec, ...]
    master_seed: int
    sizes: tuple[int, int, int]


def sample_seed(master_seed: int, class_id: int, split: str, index: int) -> int:
    """Derive the 64-bit seed of one sample from the master seed."""
    split_code = SPLIT_NAMES.index(split)
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(class_id, split_code, index))
    return int(ss.generate_state(1, np.uint64)[0])


def make_splits(
    sizes: tuple[int, int, int] = (1000, 100, 1000),
    master_seed: int = 0,
    class_ids: tuple[int, ...] | None = None,
) -> SynthDataset:
    """Generate train/val/test splits for all (or selected) classes.

    Every sample owns an independent seed stream derived from
    (master_seed, class_id, split, index), so regeneration with the same
    master seed is bit-identical and classes can be generated in parallel.
    """
    if any(s <= 0 for s in sizes):
        raise ConfigError("split sizes must be positive")
    ids = tuple(range(N_CLASSES)) if class_ids is None else class_ids
    splits: dict[str, list[PointPattern]] = {name: [] for name in SPLIT_NAMES}
    for class_id in ids:
        for split, size in zip(SPLIT_NAMES, sizes):
            for index in range(size):
                seed = sample_seed(master_seed, class_id, split, index)
                pat = generate_class(class_id, np.random.default_rng(seed))
                pat.seed = seed
                splits[split].append(pat)
    return SynthDataset(
        splits=splits, registry=CLASS_REGISTRY, master_seed=master_seed, sizes=tuple(sizes)
    )


# ----------------------------------------------------------------------
# Augmentations
# ----------------------------------------------------------------------


class AugmentMode(str, enum.Enum):
    ROT90_FLIP = "rot90_flip"
    FREE_ROTATION = "free_rotation"


_DIHEDRAL = [
    np.array([[1, 0], [0, 1]]),
    np.array([[0, -1], [1, 0]]),
    np.array([[-1, 0], [0, -1]]),
    np.array([[0, 1], [-1, 0]]),
    np.array([[-1, 0], [0, 1]]),
    np.array([[1, 0], [0, -1]]),
    np.array([[0, 1], [1, 0]]),
    np.array([[0, -1], [-1, 0]]),
]


def augment_points(
    p: PointPattern, mode: AugmentMode | str, rng: np.random.Generator
) -> PointPattern:
    """Random symmetry-group augmentation of a pattern.

    ``rot90_flip`` applies one of the 8 dihedral symmetries of the unit
    square (about its center); ``free_rotation`` rotates by an angle drawn
    from U[0, 2pi) about the pattern centroid. Labels are preserved.
    """
    if p.n_points == 0:
        raise DataError("cannot augment an empty pattern")
    mode = AugmentMode(mode)
    pts = p.points
    if mode == AugmentMode.ROT90_FLIP:
        mat = _DIHEDRAL[int(rng.integers(8))]
        out = (pts - 0.5) @ mat.T + 0.5
    else:
        theta = rng.uniform(0.0, 2.0 * np.pi)
        c, s = np.cos(theta), np.sin(theta)
        mat = np.array([[c, -s], [s, c]])
        centroid = pts.mean(axis=0)
        out = (pts - centroid) @ mat.T + centroid
    return p.replace_points(out)


def dihedral_element(index: int) -> np.ndarray:
    """The 2x2 matrix of one of the 8 square symmetries (0 = identity)."""
    return _DIHEDRAL[index % 8].copy()


# ----------------------------------------------------------------------
# On-disk dataset format
# ----------------------------------------------------------------------
#
# One directory per split; one text file per sample:
#     class_id,seed,n_points
#     x,y          (one row per point, 9 significant digits)
# plus registry.json listing all class specs.


def _sample_filename(class_id: int, index: int) -> str:
    return f"c{class_id:02d}_{index:05d}.csv"


def write_pattern(pattern: PointPattern, path: Path) -> None:
    lines = [f"{pattern.class_id if pattern.class_id is not None else -1},"
             f"{pattern.seed if pattern.seed is not None else 0},{pattern.n_points}"]
    for x, y in pattern.points:
        lines.append(f"{x:.9g},{y:.9g}")
    path.write_text("\n".join(lines) + "\n")


def read_pattern(path: Path) -> PointPattern:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if len(header) != 3:
            raise DataError(f"{path}: malformed header")
        class_id, seed, n = (int(v) for v in header)
        pts = np.loadtxt(fh, delimiter=",", ndmin=2) if n else np.empty((0, 2))
    if pts.shape[0] != n:
        raise DataError(f"{path}: header says {n} points, file has {pts.shape[0]}")
    return PointPattern(points=pts, class_id=None if class_id < 0 else class_id,
                        seed=seed)


def write_dataset(ds: SynthDataset, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    registry = [spec.to_dict() for spec in ds.registry]
    meta = {
        "master_seed": ds.master_seed,
        "sizes": list(ds.sizes),
        "classes": registry,
    }
    (out_dir / "registry.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    for split, patterns in ds.splits.items():
        split_dir = out_dir / split
        split_dir.mkdir(exist_ok=True)
        counters: dict[int, int] = {}
        for pat in patterns:
            cid = pat.class_id if pat.class_id is not None else -1
            idx = counters.get(cid, 0)
            counters[cid] = idx + 1
            write_pattern(pat, split_dir / _sample_filename(cid, idx))
