"""Bit-exact embedding interchange format.

A table is three sibling files sharing a base name:

* ``<name>.manifest.json`` -- ``{"version": 1, "n_items": N, "dim": D,
  "dtype": "f32le", "ids": [...], "meta_keys": [...]}``
* ``<name>.f32``           -- N*D float32 little-endian, row-major
* ``<name>.meta.csv``      -- long-format metadata, ``item_id,key,value``

Writsemantics are canonical (sorted meta keys, fixed row order, atomic
temp-file renames), so rewriting an unmodified table is byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    DuplicateIdError,
    NonFiniteError,
    PayloadSizeError,
)

FORMAT_VERSION = 1


@dataclass
class EmbeddingTable:
    """N x D float32 embeddings with item ids and per-item metadata.

    Metadata is columnar: ``meta[key][i]`` belongs to ``ids[i]``.
    """

    ids: list[str]
    data: np.ndarray
    meta: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise DataError("embedding data must be 2-D")
        n = len(self.ids)
        if self.data.shape[0] != n:
            raise DimensionMismatchError(
                f"{n} ids but {self.data.shape[0]} embedding rows"
            )
        if self.data.shape[1] < 1:
            raise DataError("embedding dimension must be positive")
        seen = set()
        for item in self.ids:
            if item in seen:
                raise DuplicateIdError(f"duplicate item id {item!r}")
            seen.add(item)
        bad = np.where(~np.isfinite(self.data))[0]
        if bad.size:
            raise NonFiniteError(f"non-finite value in row of item {self.ids[bad[0]]!r}")
        for key, col in self.meta.items():
            if len(col) != n:
                raise DataError(f"metadata column {key!r} has wrong length")

    @property
    def n_items(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def index_of(self) -> dict[str, int]:
        return {item: i for i, item in enumerate(self.ids)}

    def subset(self, indices: list[int] | np.ndarray) -> "EmbeddingTable":
        idx = np.asarray(indices, dtype=np.int64)
        return EmbeddingTable(
            ids=[self.ids[i] for i in idx],
            data=self.data[idx],
            meta={k: [col[i] for i in idx] for k, col in self.meta.items()},
        )


def atomic_write_bytes(path: Path, blob: bytes) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def table_paths(base: Path) -> tuple[Path, Path, Path]:
    base = Path(base)
    return (
        base.with_name(base.name + ".manifest.json"),
        base.with_name(base.name + ".f32"),
        base.with_name(base.name + ".meta.csv"),
    )


def write_table(table: EmbeddingTable, base: Path) -> None:
    """Write the interchange triplet for ``table`` under ``base``."""
    manifest_path, payload_path, meta_path = table_paths(base)
    meta_keys = sorted(table.meta.keys())
    manifest = {
        "version": FORMAT_VERSION,
        "n_items": table.n_items,
        "dim": table.dim,
        "dtype": "f32le",
        "ids": list(table.ids),
        "meta_keys": meta_keys,
    }
    atomic_write_bytes(manifest_path, canonical_json(manifest).encode("utf-8"))
    atomic_write_bytes(payload_path, table.data.astype("<f4").tobytes())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["item_id", "key", "value"])
    for i, item in enumerate(table.ids):
        for key in meta_keys:
            writer.writerow([item, key, table.meta[key][i]])
    atomic_write_bytes(meta_path, buf.getvalue().encode("utf-8"))


def read_table(base: Path) -> EmbeddingTable:
    """Read and validate an interchange triplet."""
    manifest_path, payload_path, meta_path = table_paths(base)
    if not manifest_path.exists():
        raise DataError(f"missing manifest {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: invalid JSON ({exc})") from exc
    if manifest.get("version") != FORMAT_VERSION:
        raise ConfigError(
            f"{manifest_path}: unsupported version {manifest.get('version')!r}"
        )
    if manifest.get("dtype") != "f32le":
        raise ConfigError(f"{manifest_path}: unsupported dtype {manifest.get('dtype')!r}")
    n, d = int(manifest["n_items"]), int(manifest["dim"])
    ids = list(manifest["ids"])
    if len(ids) != n:
        raise DimensionMismatchError(
            f"{manifest_path}: n_items={n} but {len(ids)} ids listed"
        )
    if d < 1:
        raise DataError(f"{manifest_path}: dim must be positive")
    blob = payload_path.read_bytes()
    if len(blob) != n * d * 4:
        raise PayloadSizeError(
            f"{payload_path}: payload holds {len(blob)} bytes, expected {n * d * 4}"
        )
    data = np.frombuffer(blob, dtype="<f4").reshape(n, d).copy()
    meta: dict[str, list[str]] = {k: [""] * n for k in manifest.get("meta_keys", [])}
    if meta_path.exists():
        index = {item: i for i, item in enumerate(ids)}
        if len(index) != len(ids):
            raise DuplicateIdError(f"{manifest_path}: duplicate ids in manifest")
        with open(meta_path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["item_id", "key", "value"]:
                raise DataError(f"{meta_path}: expected header item_id,key,value")
            for row in reader:
                if len(row) != 3:
                    raise DataError(f"{meta_path}: malformed row {row!r}")
                item, key, value = row
                if item not in index:
                    raise DataError(f"{meta_path}: unknown item id {item!r}")
                if key not in meta:
                    raise DataError(f"{meta_path}: key {key!r} missing from manifest")
                meta[key][index[item]] = value
    return EmbeddingTable(ids=ids, data=data, meta=meta)
