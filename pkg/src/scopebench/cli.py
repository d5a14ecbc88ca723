"""Command-line interface.

Every verb reads its parameters from a JSON config file (``--config``);
``--seed`` overrides the config seed and ``--out`` names the output
directory. Outputs are deterministic: rerunning a verb with the same
config and seed reproduces byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .binning import average_targets, bin_spots, drop_empty_patches, read_cells_csv, read_spot_grid_csv
from .errors import ConfigError, DataError, ScopeBenchError
from .features import (
    MultiChannelImage,
    cellcount_table,
    pixel_features,
    read_image_manifest,
    read_raw_image,
    singleconv_features,
)
from .graphs import knn_graph, normalize_coords
from .interchange import EmbeddingTable, atomic_write_bytes, canonical_json, write_table
from .points import PointPattern
from .raster import render_edges, write_packed_bits, write_pgm
from .reports import Report, RunConfig, emit_report, emit_stage_series, run_benchmark
from .synth import make_splits, read_pattern, write_dataset


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_synth_gen(args) -> None:
    cfg = _load_config(args.config)
    sizes = tuple(cfg.get("sizes", [1000, 100, 1000]))
    classes = cfg.get("classes")
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    ds = make_splits(
        sizes=sizes, master_seed=seed,
        class_ids=tuple(classes) if classes else None,
    )
    write_dataset(ds, _out_dir(args))


def _cmd_render_graph(args) -> None:
    cfg = _load_config(args.config)
    if "input" in cfg:
        pattern = read_pattern(Path(cfg["input"]))
    elif "cells" in cfg:
        _, xy = read_cells_csv(Path(cfg["cells"]))
        pattern = PointPattern(points=xy)
    else:
        raise ConfigError("render-graph config needs 'input' (pattern) or 'cells' (csv)")
    if cfg.get("normalize", True):
        pattern = normalize_coords(pattern)
        domain = ((-1.0, 1.0), (-1.0, 1.0))
    else:
        domain = ((0.0, 1.0), (0.0, 1.0))
    edges = knn_graph(pattern, k=cfg.get("k", 5))
    raster = render_edges(
        pattern,
        edges,
        edge_width_px=cfg.get("edge_width", 1),
        native_size=tuple(cfg.get("native_size", [224, 224])),
        out_size=tuple(cfg.get("out_size", [224, 224])),
        domain=domain,
    )
    fmt = cfg.get("format", "pgm")
    out = _out_dir(args)
    if fmt == "pgm":
        write_pgm(raster, out / cfg.get("name", "graph.pgm"))
    elif fmt == "packed":
        write_packed_bits(raster, out / cfg.get("name", "graph.bits"))
    else:
        raise ConfigError(f"unknown raster format {fmt!r}")


def _cmd_bin_spots(args) -> None:
    cfg = _load_config(args.config)
    grid = read_spot_grid_csv(Path(cfg["spots"]))
    patches = bin_spots(grid, patch_extent_um=cfg["patch_extent_um"])
    if "cells" in cfg:
        _, xy = read_cells_csv(Path(cfg["cells"]))
        patches = drop_empty_patches(patches, xy)
    targets = None
    if "targets" in cfg:
        targets = {}
        with open(cfg["targets"], newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header[0] != "item_id":
                raise DataError(f"{cfg['targets']}: expected header item_id,...")
            for row in reader:
                targets[row[0]] = np.array([float(v) for v in row[1:]])
    payload = []
    for p in patches:
        entry = {
            "anchor": p.anchor_spot_id,
            "members": p.member_spot_ids,
            "bounding_box": list(p.bounding_box),
        }
        if targets is not None:
            entry["averaged_targets"] = [float(v) for v in average_targets(p, targets)]
        payload.append(entry)
    atomic_write_bytes(
        _out_dir(args) / "patches.json", canonical_json(payload).encode("utf-8")
    )


def _feature_table(args, extractor, provenance_meta: dict) -> None:
    cfg = _load_config(args.config)
    entries = read_image_manifest(Path(cfg["manifest"]))
    ids, rows = [], []
    for item_id, path in entries:
        img = read_raw_image(path)
        rows.append(extractor(img, cfg).values)
        ids.append(item_id)
    meta = {k: [v] * len(ids) for k, v in provenance_meta.items()}
    table = EmbeddingTable(ids=ids, data=np.asarray(rows, dtype=np.float32), meta=meta)
    write_table(table, _out_dir(args) / cfg.get("name", "features"))


def _cmd_feat_pixel(args) -> None:
    def extract(img: MultiChannelImage, cfg: dict):
        return pixel_features(img, mode=cfg.get("mode", "mean_std_skew"))

    _feature_table(args, extract, {"baseline": "pixel"})


def _cmd_feat_singleconv(args) -> None:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)

    def extract(img: MultiChannelImage, cfg: dict):
        return singleconv_features(
            img,
            n_filters=cfg.get("n_filters", 32),
            kernel_size=cfg.get("kernel_size", 7),
            seed=seed,
        )

    _feature_table(args, extract, {"baseline": "singleconv", "seed": str(seed)})


def _cmd_feat_cellcount(args) -> None:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    ids, counts = [], []
    with open(cfg["counts"], newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"item_id", "count"}.issubset(reader.fieldnames):
            raise DataError(f"{cfg['counts']}: expected header item_id,count")
        for row in reader:
            ids.append(row["item_id"])
            counts.append(float(row["count"]))
    mat = cellcount_table(counts, seed=seed, standardize=cfg.get("standardize", False))
    table = EmbeddingTable(
        ids=ids,
        data=mat.astype(np.float32),
        meta={"baseline": ["cellcount"] * len(ids)},
    )
    write_table(table, _out_dir(args) / cfg.get("name", "features"))


def _make_eval_cmd(benchmark: str):
    def cmd(args) -> None:
        cfg = _load_config(args.config)
        config = RunConfig(
            benchmark=benchmark,
            inputs=cfg.get("inputs", {}),
            params=cfg.get("params", {}),
            seed=args.seed if args.seed is not None else cfg.get("seed", 0),
        )
        report = run_benchmark(config, out_dir=_out_dir(args))
        emit_report(report, cfg.get("format", "csvdir"), _out_dir(args))

    return cmd


def _cmd_report(args) -> None:
    cfg = _load_config(args.config)
    paths: list[Path] = []
    if "reports" in cfg:
        paths = [Path(p) for p in cfg["reports"]]
    elif "dir" in cfg:
        paths = sorted(Path(cfg["dir"]).glob("**/report.json"))
    if not paths:
        raise ConfigError("report config needs 'reports' (list) or 'dir' with report.json files")
    reports = [Report.from_file(p) for p in paths]
    out = _out_dir(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "benchmark", "mean", "std"])
    for rep in reports:
        mean, std = rep.summary()
        label = str(rep.metadata.get("model", rep.config_hash[:12]))
        w.writerow([label, rep.benchmark, repr(mean), repr(std)])
    atomic_write_bytes(out / "bars.csv", buf.getvalue().encode("utf-8"))
    emit_stage_series(reports, out)


_VERBS = {
    "synth-gen": (_cmd_synth_gen, "generate the 24-class synthetic point-pattern dataset"),
    "render-graph": (_cmd_render_graph, "render a kNN cell graph as a binary raster"),
    "bin-spots": (_cmd_bin_spots, "bin spot grids into neighborhood patches"),
    "feat-pixel": (_cmd_feat_pixel, "channel statistics features for an image manifest"),
    "feat-singleconv": (_cmd_feat_singleconv, "random single-conv features for an image manifest"),
    "feat-cellcount": (_cmd_feat_cellcount, "cell-count embeddings from a counts CSV"),
    "eval-retrieval": (_make_eval_cmd("retrieval"), "tail recall against a pair set"),
    "eval-map": (_make_eval_cmd("map"), "replicate-retrieval mean average precision"),
    "eval-regression": (_make_eval_cmd("regression"), "PCA + ridge expression prediction"),
    "eval-knn": (_make_eval_cmd("knn"), "kNN label probing"),
    "rsa": (_make_eval_cmd("rsa"), "rank-based representational similarity across tables"),
    "pca-diag": (_make_eval_cmd("pca_diag"), "PCA dimensionality diagnostics"),
    "report": (_cmd_report, "aggregate run reports into plot-ready CSVs"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scopebench",
        description="Benchmarking toolkit for microscopy representation evaluation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, (_, help_text) in _VERBS.items():
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--config", type=str, default=None, help="JSON config file")
        p.add_argument("--out", type=str, default=None, help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler, _ = _VERBS[args.verb]
    try:
        handler(args)
    except ScopeBenchError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except KeyError as exc:
        print(f"error [config]: missing config key {exc}", file=sys.stderr)
        return ConfigError.exit_code
    except FileNotFoundError as exc:
        print(f"error [data]: {exc}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
