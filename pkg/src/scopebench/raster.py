"""Binary rasterization of graph edges.

Point coordinates are mapped affinely onto integer pixel centers of a
native raster; each edge is then drawn as a width-w segment with round
caps. Pixel membership is decided entirely in integer arithmetic
(``4 * dist_sq_numerator <= w^2 * len_sq``), so rasters commute bit-exactly
with the 8 dihedral symmetries of the square. The native raster is resized
to the output size by bilinear interpolation and re-binarized at 0.5.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .graphs import EdgeList
from .points import PointPattern

Domain = tuple[tuple[float, float], tuple[float, float]]
UNIT_DOMAIN: Domain = ((0.0, 1.0), (0.0, 1.0))


@dataclass
class BinaryRaster:
    width: int
    height: int
    bits: np.ndarray  # (height, width) uint8 in {0, 1}

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.shape != (self.height, self.width):
            raise DataError("raster shape disagrees with width/height")


def _to_pixels(points: np.ndarray, size: tuple[int, int], domain: Domain) -> np.ndarray:
    w, h = size
    (x0, x1), (y0, y1) = domain
    if x1 <= x0 or y1 <= y0:
        raise ConfigError("degenerate raster domain")
    px = np.rint((points[:, 0] - x0) / (x1 - x0) * (w - 1)).astype(np.int64)
    py = np.rint((points[:, 1] - y0) / (y1 - y0) * (h - 1)).astype(np.int64)
    return np.column_stack([np.clip(px, 0, w - 1), np.clip(py, 0, h - 1)])


def _stamp_edges(bits: np.ndarray, a: np.ndarray, b: np.ndarray, width_px: int) -> None:
    """Set pixels within width_px/2 of each integer segment (round caps)."""
    h, w = bits.shape
    w2 = int(width_px) * int(width_px)
    dx = b[:, 0] - a[:, 0]
    dy = b[:, 1] - a[:, 1]
    len2 = dx * dx + dy * dy
    half = np.maximum(np.abs(dx), np.abs(dy)) // 2 + (width_px // 2 + 1)
    order = np.argsort(half, kind="stable")
    start = 0
    while start < len(order):
        hmax = int(half[order[start]])
        # grow the bucket until the window would more than double
        stop = start
        while stop < len(order) and half[order[stop]] <= 2 * hmax:
            stop += 1
        sel = order[start:stop]
        start = stop
        k = int(half[sel].max())
        rel = np.arange(-k, k + 1, dtype=np.int64)
        rx, ry = np.meshgrid(rel, rel, indexing="xy")
        cx = (a[sel, 0] + b[sel, 0]) // 2
        cy = (a[sel, 1] + b[sel, 1]) // 2
        px = cx[:, None, None] + rx[None]
        py = cy[:, None, None] + ry[None]
        apx = px - a[sel, 0][:, None, None]
        apy = py - a[sel, 1][:, None, None]
        bpx = px - b[sel, 0][:, None, None]
        bpy = py - b[sel, 1][:, None, None]
        edx = dx[sel][:, None, None]
        edy = dy[sel][:, None, None]
        el2 = len2[sel][:, None, None]
        s = apx * edx + apy * edy
        cross = apx * edy - apy * edx
        mid = (s >= 0) & (s <= el2) & (4 * cross * cross <= w2 * el2)
        cap_a = (s < 0) & (4 * (apx * apx + apy * apy) <= w2)
        cap_b = (s > el2) & (4 * (bpx * bpx + bpy * bpy) <= w2)
        mask = (mid | cap_a | cap_b) & (px >= 0) & (px < w) & (py >= 0) & (py < h)
        flat = (py * w + px)[mask]
        bits.reshape(-1)[flat] = 1


def rasterize_edges(
    p: PointPattern,
    e: EdgeList,
    edge_width_px: int = 1,
    size: tuple[int, int] = (224, 224),
    domain: Domain = UNIT_DOMAIN,
) -> BinaryRaster:
    """Draw edges onto the native raster without resizing."""
    w, h = size
    if w < 1 or h < 1:
        raise ConfigError("native raster must have positive area")
    if edge_width_px < 1:
        raise ConfigError("edge width must be >= 1 pixel")
    bits = np.zeros((h, w), dtype=np.uint8)
    if e.n_edges:
        pix = _to_pixels(p.points, size, domain)
        _stamp_edges(bits, pix[e.edges[:, 0]], pix[e.edges[:, 1]], edge_width_px)
    return BinaryRaster(width=w, height=h, bits=bits)


def resize_bilinear(img: np.ndarray, out_size: tuple[int, int]) -> np.ndarray:
    """Bilinear resampling with the pixel-area convention (as float64)."""
    ow, oh = out_size
    ih, iw = img.shape
    if (iw, ih) == (ow, oh):
        return img.astype(np.float64)
    src = img.astype(np.float64)

    def axis_coords(n_out: int, n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pos = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
        lo = np.floor(pos).astype(np.int64)
        frac = pos - lo
        lo0 = np.clip(lo, 0, n_in - 1)
        lo1 = np.clip(lo + 1, 0, n_in - 1)
        return lo0, lo1, frac

    x0, x1, fx = axis_coords(ow, iw)
    y0, y1, fy = axis_coords(oh, ih)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    return top * (1 - fy[:, None]) + bot * (fy[:, None])


def render_edges(
    p: PointPattern,
    e: EdgeList,
    edge_width_px: int = 1,
    native_size: tuple[int, int] = (224, 224),
    out_size: tuple[int, int] = (224, 224),
    domain: Domain = UNIT_DOMAIN,
) -> BinaryRaster:
    """Rasterize edges natively, then resize to ``out_size`` and re-binarize.

    Values >= 0.5 after bilinear resampling map to 1. With equal native and
    output sizes the resize is skipped entirely, keeping the raster exact.
    """
    native = rasterize_edges(p, e, edge_width_px, native_size, domain)
    if native_size == out_size:
        return native
    resized = resize_bilinear(native.bits, out_size)
    return BinaryRaster(
        width=out_size[0], height=out_size[1], bits=(resized >= 0.5).astype(np.uint8)
    )


# ----------------------------------------------------------------------
# Raster file formats: PGM (P5, maxval 1) and packed bits
# ----------------------------------------------------------------------


def write_pgm(raster: BinaryRaster, path: Path) -> None:
    header = f"P5\n{raster.width} {raster.height}\n1\n".encode("ascii")
    Path(path).write_bytes(header + raster.bits.tobytes())


def read_pgm(path: Path) -> BinaryRaster:
    blob = Path(path).read_bytes()
    fields: list[bytes] = []
    i = 0
    while len(fields) < 4 and i < len(blob):
        while i < len(blob) and blob[i : i + 1].isspace():
            i += 1
        j = i
        while j < len(blob) and not blob[j : j + 1].isspace():
            j += 1
        fields.append(blob[i:j])
        i = j
    if len(fields) < 4 or fields[0] != b"P5":
        raise DataError(f"{path}: not a P5 PGM file")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 1:
        raise DataError(f"{path}: expected maxval 1, found {maxval}")
    data = blob[i + 1 : i + 1 + w * h]
    if len(data) != w * h:
        raise DataError(f"{path}: truncated pixel payload")
    bits = np.frombuffer(data, dtype=np.uint8).reshape(h, w)
    return BinaryRaster(width=w, height=h, bits=bits.copy())


def write_packed_bits(raster: BinaryRaster, path: Path) -> None:
    header = struct.pack("<II", raster.width, raster.height)
    Path(path).write_bytes(header + np.packbits(raster.bits.reshape(-1)).tobytes())


def read_packed_bits(path: Path) -> BinaryRaster:
    blob = Path(path).read_bytes()
    if len(blob) < 8:
        raise DataError(f"{path}: missing packed-bit header")
    w, h = struct.unpack("<II", blob[:8])
    need = (w * h + 7) // 8
    payload = blob[8:]
    if len(payload) != need:
        raise DataError(f"{path}: payload holds {len(payload)} bytes, expected {need}")
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))[: w * h]
    return BinaryRaster(width=w, height=h, bits=bits.reshape(h, w))
