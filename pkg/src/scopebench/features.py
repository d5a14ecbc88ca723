"""Training-free feature baselines for multichannel images.

Three families: per-channel pixel statistics, one layer of random local
filters with global average pooling, and hand-crafted cell-count features
tiled to a fixed embedding width. All are pure functions of
(input, config, seed).
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, PayloadSizeError

CELLCOUNT_DIM = 256
CELLCOUNT_NOISE_STD = 0.01


@dataclass
class MultiChannelImage:
    channels: np.ndarray  # (C, H, W) nonnegative reals
    channel_names: list[str] | None = None

    def __post_init__(self) -> None:
        a = np.asarray(self.channels, dtype=np.float64)
        if a.ndim == 2:
            a = a[None]
        if a.ndim != 3:
            raise DataError("image must be (C, H, W)")
        self.channels = a

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.channels.shape  # type: ignore[return-value]


@dataclass
class FeatureVector:
    values: np.ndarray
    provenance: str

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not np.isfinite(self.values).all():
            raise DataError(f"non-finite feature values from {self.provenance}")


def pixel_features(img: MultiChannelImage, mode: str = "mean_std_skew") -> FeatureVector:
    """Channel-wise intensity statistics.

    ``mean`` gives one value per channel; ``mean_std_skew`` the population
    mean, std, and skewness (m3 / std^3, 0 for constant channels), ordered
    mean_1..mean_C, std_1..std_C, skew_1..skew_C.
    """
    c, h, w = img.shape
    if h * w == 0:
        raise DataError("empty image planes")
    flat = img.channels.reshape(c, -1)
    means = flat.mean(axis=1)
    if mode == "mean":
        return FeatureVector(means, provenance=f"pixel:{mode}")
    if mode != "mean_std_skew":
        raise ConfigError(f"unknown pixel feature mode {mode!r}")
    centered = flat - means[:, None]
    var = (centered**2).mean(axis=1)
    std = np.sqrt(var)
    m3 = (centered**3).mean(axis=1)
    skew = np.where(std > 0, m3 / np.where(std > 0, std, 1.0) ** 3, 0.0)
    return FeatureVector(
        np.concatenate([means, std, skew]), provenance=f"pixel:{mode}"
    )


def singleconv_filters(
    n_filters: int, kernel_size: int, n_channels: int, seed: int
) -> np.ndarray:
    """Random filters, i.i.d. normal with fan-in variance 1 / (k*k*C)."""
    rng = np.random.default_rng(seed)
    std = 1.0 / np.sqrt(kernel_size * kernel_size * n_channels)
    return rng.normal(0.0, std, size=(n_filters, n_channels, kernel_size, kernel_size))


def _window_means(plane: np.ndarray, k: int) -> np.ndarray:
    """Mean of plane over all valid kxk filter placements, per tap offset.

    Returns a (k, k) array M with M[dy, dx] = mean over valid positions of
    plane[y+dy, x+dx]; global average pooling of a valid cross-correlation
    is then the tap-weighted sum of M.
    """
    h, w = plane.shape
    hv, wv = h - k + 1, w - k + 1
    s = np.zeros((h + 1, w + 1), dtype=np.float64)
    np.cumsum(np.cumsum(plane, axis=0), axis=1, out=s[1:, 1:])
    rect = s[hv : hv + k, wv : wv + k] - s[0:k, wv : wv + k] - s[hv : hv + k, 0:k] + s[0:k, 0:k]
    return rect / (hv * wv)


def singleconv_apply(img: MultiChannelImage, weights: np.ndarray) -> np.ndarray:
    """Pooled valid-mode cross-correlation for given (F, C, k, k) filters.

    Global average pooling commutes with the correlation, so the result is
    the tap-weighted sum of per-offset window means (exact, via integral
    images) -- one value per filter, zero bias.
    """
    c, h, w = img.shape
    weights = np.asarray(weights, dtype=np.float64)
    if weights.ndim != 4 or weights.shape[1] != c:
        raise DataError(f"filters must be (F, {c}, k, k); got {weights.shape}")
    k = weights.shape[2]
    if weights.shape[3] != k:
        raise ConfigError("filters must be square")
    if k % 2 == 0:
        raise ConfigError("kernel size must be odd")
    if k > min(h, w):
        raise DataError(f"image {h}x{w} smaller than kernel {k}")
    means = np.stack([_window_means(img.channels[ci], k) for ci in range(c)])
    return np.tensordot(weights, means, axes=([1, 2, 3], [0, 1, 2]))


def singleconv_features(
    img: MultiChannelImage,
    n_filters: int = 32,
    kernel_size: int = 7,
    seed: int = 0,
) -> FeatureVector:
    """Random single-layer convolution with global average pooling.

    Filters are drawn from the seeded stream with zero bias; the image is
    cross-correlated in valid mode across all channels and averaged over
    positions, giving one value per filter.
    """
    weights = singleconv_filters(n_filters, kernel_size, img.shape[0], seed)
    values = singleconv_apply(img, weights)
    return FeatureVector(
        values, provenance=f"singleconv:F={n_filters},k={kernel_size},seed={seed}"
    )


def cellcount_base_features(count: float) -> np.ndarray:
    """The 16 fixed transforms of a cell count used as regression features."""
    c = float(count)
    if c < 0:
        raise ConfigError("cell count must be nonnegative")
    log1 = np.log1p(c)
    return np.array(
        [
            c,
            c**2,
            c**3,
            np.sqrt(c),
            log1,
            1.0 / (1.0 + c),
            np.sin(c / 10.0),
            np.cos(c / 10.0),
            np.sin(c / 100.0),
            np.cos(c / 100.0),
            c * log1,
            log1**2,
            c**0.25,
            np.tanh(c / 100.0),
            c % 10.0,
            min(c, 500.0),
        ]
    )


def cellcount_features(count: float, seed: int = 0) -> FeatureVector:
    """Cell-count embedding: 16 base features tiled to 256 dims plus noise.

    The base features repeat cyclically up to width 256 and a small amount
    (std 0.01) of seeded Gaussian noise decorrelates the copies so PCA
    stays well-posed.
    """
    base = cellcount_base_features(count)
    reps = int(np.ceil(CELLCOUNT_DIM / base.size))
    tiled = np.tile(base, reps)[:CELLCOUNT_DIM]
    rng = np.random.default_rng(seed)
    noisy = tiled + rng.normal(0.0, CELLCOUNT_NOISE_STD, size=CELLCOUNT_DIM)
    return FeatureVector(noisy, provenance=f"cellcount:seed={seed}")


def cellcount_table(
    counts: list[float],
    seed: int = 0,
    standardize: bool = False,
    stats: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Stack cell-count embeddings for a batch of items.

    Per-item noise streams derive from (seed, item index). With
    ``standardize`` the columns are z-scored; pass ``stats`` (mean, std)
    fitted on a training fold to standardize held-out items without
    leakage, otherwise the batch's own statistics are used.
    """
    rows = []
    for i, c in enumerate(counts):
        item_seed = int(
            np.random.SeedSequence(entropy=seed, spawn_key=(i,)).generate_state(1, np.uint64)[0]
        )
        rows.append(cellcount_features(c, seed=item_seed).values)
    mat = np.asarray(rows)
    if standardize:
        if stats is None:
            mu, sd = mat.mean(axis=0), mat.std(axis=0)
        else:
            mu, sd = stats
        mat = (mat - mu) / np.where(sd > 0, sd, 1.0)
    return mat


# ----------------------------------------------------------------------
# Planar raw image format: header C,H,W (u32le x3) + C*H*W float32 LE
# ----------------------------------------------------------------------


def write_raw_image(img: MultiChannelImage, path: Path) -> None:
    c, h, w = img.shape
    header = struct.pack("<III", c, h, w)
    payload = img.channels.astype("<f4").tobytes()
    Path(path).write_bytes(header + payload)


def read_raw_image(path: Path) -> MultiChannelImage:
    blob = Path(path).read_bytes()
    if len(blob) < 12:
        raise PayloadSizeError(f"{path}: missing raw image header")
    c, h, w = struct.unpack("<III", blob[:12])
    need = c * h * w * 4
    if len(blob) - 12 != need:
        raise PayloadSizeError(
            f"{path}: payload holds {len(blob) - 12} bytes, expected {need}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=12).reshape(c, h, w)
    return MultiChannelImage(channels=np.asarray(data, dtype=np.float64))


def read_image_manifest(path: Path) -> list[tuple[str, Path]]:
    """Directory manifest: header ``item_id,path``; paths resolve relative
    to the manifest's directory."""
    base = Path(path).parent
    out: list[tuple[str, Path]] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"item_id", "path"}.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected header item_id,path")
        for row in reader:
            p = Path(row["path"])
            out.append((row["item_id"], p if p.is_absolute() else base / p))
    if not out:
        raise DataError(f"{path}: empty manifest")
    return out
