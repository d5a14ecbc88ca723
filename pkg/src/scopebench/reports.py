"""Benchmark orchestration, raw-value persistence, and report emission.

A run is a pure function of (inputs, config, seed): raw per-fold values
are persisted exactly and every aggregate can be recomputed from them.
Reports never embed timestamps, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, DataError
from .interchange import (
    EmbeddingTable,
    atomic_write_bytes,
    canonical_json,
    read_table,
)
from .metrics import (
    PairSet,
    cosine_matrix,
    map_retrieval,
    pair_ranking,
    read_labels_csv,
    recall_at_tail,
    rsa_matrix,
    knn_probe,
)
from .profiles import FoldSpec, build_profiles, make_folds
from .regression import expression_pipeline, pca_fit, variance_explained_first2

BENCHMARKS = ("retrieval", "map", "regression", "knn", "rsa", "pca_diag")


@dataclass
class RunConfig:
    benchmark: str
    inputs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.benchmark not in BENCHMARKS:
            raise ConfigError(
                f"unknown benchmark {self.benchmark!r}; expected one of {BENCHMARKS}"
            )

    def to_dict(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "inputs": self.inputs,
            "params": self.params,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode("utf-8")).hexdigest()

    @staticmethod
    def from_file(path: Path, seed: int | None = None) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        cfg = RunConfig(
            benchmark=raw.get("benchmark", ""),
            inputs=raw.get("inputs", {}),
            params=raw.get("params", {}),
            seed=raw.get("seed", 0),
        )
        if seed is not None:
            cfg.seed = seed
        return cfg


@dataclass
class Report:
    benchmark: str
    config_hash: str
    tool_version: str
    rows: list[dict]  # {"fold": int, "target": str, "value": float}
    metadata: dict = field(default_factory=dict)

    def targets(self) -> list[str]:
        return sorted({r["target"] for r in self.rows})

    def folds(self) -> list[int]:
        return sorted({r["fold"] for r in self.rows})

    def per_target(self) -> dict[str, tuple[float, float]]:
        """Mean and standard deviation across folds, per target."""
        out = {}
        for t in self.targets():
            vals = np.array(
                [r["value"] for r in self.rows if r["target"] == t and np.isfinite(r["value"])]
            )
            out[t] = (float(vals.mean()), float(vals.std())) if vals.size else (float("nan"), float("nan"))
        return out

    def fold_scores(self) -> dict[int, float]:
        out = {}
        for f in self.folds():
            vals = np.array(
                [r["value"] for r in self.rows if r["fold"] == f and np.isfinite(r["value"])]
            )
            out[f] = float(vals.mean()) if vals.size else float("nan")
        return out

    def summary(self) -> tuple[float, float]:
        scores = np.array([v for v in self.fold_scores().values() if np.isfinite(v)])
        if not scores.size:
            return float("nan"), float("nan")
        return float(scores.mean()), float(scores.std())

    def to_dict(self) -> dict:
        mean, std = self.summary()
        return {
            "benchmark": self.benchmark,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "metadata": self.metadata,
            "summary": {"mean": mean, "std": std},
            "per_target": {t: {"mean": m, "std": s} for t, (m, s) in self.per_target().items()},
            "per_fold": {str(f): v for f, v in self.fold_scores().items()},
            "raw": self.rows,
        }

    @staticmethod
    def from_file(path: Path) -> "Report":
        raw = json.loads(Path(path).read_text())
        return Report(
            benchmark=raw["benchmark"],
            config_hash=raw["config_hash"],
            tool_version=raw["tool_version"],
            rows=raw["raw"],
            metadata=raw.get("metadata", {}),
        )


def _raw_csv(rows: list[dict]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["fold", "target", "value"])
    for r in sorted(rows, key=lambda r: (r["fold"], r["target"])):
        writer.writerow([r["fold"], r["target"], repr(float(r["value"]))])
    return buf.getvalue().encode("utf-8")


# ----------------------------------------------------------------------
# Benchmark implementations
# ----------------------------------------------------------------------


def _load_targets_csv(path: Path) -> tuple[dict[str, np.ndarray], list[str]]:
    """Targets: header ``item_id,<gene names...>``, one row per item."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "item_id" or len(header) < 2:
            raise DataError(f"{path}: expected header item_id,g1,...")
        genes = header[1:]
        table: dict[str, np.ndarray] = {}
        for row in reader:
            if len(row) != len(header):
                raise DataError(f"{path}: malformed row {row[:3]!r}...")
            table[row[0]] = np.array([float(v) for v in row[1:]])
    return table, genes


def _bench_retrieval(config: RunConfig) -> list[dict]:
    p = config.params
    table = read_table(Path(config.inputs["table"]))
    pair_sets = PairSet.from_csv(Path(config.inputs["pairs"]))
    group_key = p.get("group_key", "gene")
    folds = make_folds(
        table,
        scheme=p.get("scheme", "per_gene_subsample"),
        seed=config.seed,
        n_folds=p.get("n_folds"),
        n_per=p.get("n_per", 10),
        gene_key=group_key,
    )
    rows = []
    index = table.index_of()
    for fold in folds.folds():
        members = [index[i] for i in folds.members(fold)]
        profiles = build_profiles(table.subset(members), group_key=group_key)
        sim = cosine_matrix(profiles.data, profiles.ids)
        for source, truth in pair_sets.items():
            rec = recall_at_tail(
                sim,
                truth,
                q=p.get("q", 0.05),
                tail=p.get("tail", "top"),
                per_row=p.get("per_row", False),
            )
            rows.append({"fold": fold, "target": source, "value": rec})
    return rows


def _bench_map(config: RunConfig) -> list[dict]:
    p = config.params
    table = read_table(Path(config.inputs["table"]))
    label_key = p.get("label_key", "compound")
    plate_key = p.get("plate_key", "plate")
    if config.inputs.get("labels"):
        table.meta[label_key] = _item_labels(table, label_key, config.inputs["labels"])
    folds = make_folds(
        table,
        scheme="plate_grouped",
        seed=config.seed,
        n_folds=p.get("n_folds"),
        plates_per_lab=p.get("plates_per_lab", 4),
        plate_key=plate_key,
        lab_key=p.get("lab_key", "lab"),
    )
    index = table.index_of()
    rows = []
    for fold in folds.folds():
        members = [index[i] for i in folds.members(fold)]
        sub = table.subset(members)
        # replicate profiles: one per (label, plate)
        composite = [
            f"{a}|{b}" for a, b in zip(sub.meta[label_key], sub.meta[plate_key])
        ]
        sub.meta["_replicate"] = composite
        profiles = build_profiles(
            sub,
            group_key="_replicate",
            center=p.get("center", "negcontrol_per_plate"),
            plate_key=plate_key,
            control_key=p.get("control_key", "control"),
            negative_value=p.get("negative_value", "negcon"),
        )
        control_key = p.get("control_key", "control")
        negative_value = p.get("negative_value", "negcon")
        if control_key in profiles.meta and not p.get("include_negatives", False):
            keep = [
                i
                for i in range(profiles.n_items)
                if profiles.meta[control_key][i] != negative_value
            ]
            profiles = profiles.subset(keep)
        result = map_retrieval(profiles.data, profiles.meta[label_key], profiles.ids)
        for group, ap in result.per_group.items():
            rows.append({"fold": fold, "target": group, "value": ap})
    return rows


def _bench_regression(config: RunConfig) -> list[dict]:
    p = config.params
    table = read_table(Path(config.inputs["table"]))
    targets, genes = _load_targets_csv(Path(config.inputs["targets"]))
    missing = [i for i in table.ids if i not in targets]
    if missing:
        raise DataError(f"items lacking target rows: {missing[:5]}")
    y = np.stack([targets[i] for i in table.ids])
    fold_key = p.get("fold_key")
    if fold_key:
        if fold_key not in table.meta:
            raise ConfigError(f"fold_key {fold_key!r} not in metadata")
        labels = sorted(set(table.meta[fold_key]))
        fold_arr = np.array([labels.index(v) for v in table.meta[fold_key]])
    else:
        n_folds = p.get("n_folds", 5)
        rng = np.random.default_rng(config.seed)
        fold_arr = rng.permutation(table.n_items) % n_folds
    report = expression_pipeline(
        table.data,
        y,
        fold_arr,
        gene_names=genes,
        m=p.get("m", 256),
        alpha=p.get("alpha", 1.0),
    )
    rows = []
    for fi, fold in enumerate(report.fold_ids):
        for gi, gene in enumerate(report.genes):
            rows.append(
                {"fold": fold, "target": gene, "value": float(report.per_fold_pcc[fi, gi])}
            )
    return rows


def _item_labels(table, label_key: str, labels_csv: str | None) -> list[str]:
    """Labels from an ``item_id,group`` CSV when given, else from metadata."""
    if labels_csv is not None:
        mapping = read_labels_csv(Path(labels_csv))
        missing = [i for i in table.ids if i not in mapping]
        if missing:
            raise DataError(f"items lacking labels: {missing[:5]}")
        return [mapping[i] for i in table.ids]
    if label_key not in table.meta:
        raise ConfigError(f"metadata key {label_key!r} not present")
    return list(table.meta[label_key])


def _bench_knn(config: RunConfig) -> list[dict]:
    p = config.params
    train = read_table(Path(config.inputs["train"]))
    test = read_table(Path(config.inputs["test"]))
    label_key = p.get("label_key", "label")
    acc = knn_probe(
        train.data,
        _item_labels(train, label_key, config.inputs.get("train_labels")),
        test.data,
        _item_labels(test, label_key, config.inputs.get("test_labels")),
        k=p.get("k", 20),
    )
    return [{"fold": 0, "target": "top1_accuracy", "value": acc}]


def _bench_rsa(config: RunConfig) -> list[dict]:
    tables = config.inputs.get("tables")
    if not isinstance(tables, list) or len(tables) < 2:
        raise ConfigError("rsa needs inputs.tables: a list of >= 2 table paths")
    names = config.params.get("names") or [Path(t).name for t in tables]
    rankings = []
    for path in tables:
        t = read_table(Path(path))
        rankings.append(pair_ranking(cosine_matrix(t.data, t.ids)))
    m, order = rsa_matrix(rankings, names)
    rows = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            rows.append(
                {"fold": 0, "target": f"{names[i]}|{names[j]}", "value": float(m[i, j])}
            )
    rows.append(
        {"fold": 0, "target": "_leaf_order", "value": float("nan"),
         "order": [names[k] for k in order]}
    )
    return rows


def _bench_pca_diag(config: RunConfig) -> list[dict]:
    table = read_table(Path(config.inputs["table"]))
    m = config.params.get("m", 16)
    model = pca_fit(table.data, m=min(m, table.n_items - 1, table.dim))
    rows = [
        {
            "fold": 0,
            "target": "variance_explained_first2",
            "value": variance_explained_first2(table.data),
        }
    ]
    for k, ratio in enumerate(model.explained_variance_ratio):
        rows.append({"fold": 0, "target": f"ratio_{k:03d}", "value": float(ratio)})
    return rows


_RUNNERS = {
    "retrieval": _bench_retrieval,
    "map": _bench_map,
    "regression": _bench_regression,
    "knn": _bench_knn,
    "rsa": _bench_rsa,
    "pca_diag": _bench_pca_diag,
}


def run_benchmark(config: RunConfig, out_dir: Path | None = None) -> Report:
    """Execute one benchmark and optionally persist raw values + report."""
    rows = _RUNNERS[config.benchmark](config)
    report = Report(
        benchmark=config.benchmark,
        config_hash=config.config_hash(),
        tool_version=__version__,
        rows=[r for r in rows if "order" not in r],
        metadata={
            str(k): v
            for k, v in config.params.get("metadata", {}).items()
        },
    )
    extra = [r for r in rows if "order" in r]
    if extra:
        report.metadata["leaf_order"] = extra[0]["order"]
    if out_dir is not None:
        out_dir = Path(out_dir)
        atomic_write_bytes(out_dir / "raw_values.csv", _raw_csv(report.rows))
        atomic_write_bytes(
            out_dir / "report.json",
            canonical_json(report.to_dict()).encode("utf-8"),
        )
    return report


# ----------------------------------------------------------------------
# Report emission
# ----------------------------------------------------------------------


def emit_report(report: Report, fmt: str, out_dir: Path) -> list[Path]:
    """Emit a report as CSV files, one JSON file, or plot-ready CSVs."""
    out_dir = Path(out_dir)
    written: list[Path] = []
    if fmt == "json":
        path = out_dir / f"{report.benchmark}_report.json"
        atomic_write_bytes(path, canonical_json(report.to_dict()).encode("utf-8"))
        return [path]
    if fmt == "csvdir":
        raw = out_dir / f"{report.benchmark}_raw.csv"
        atomic_write_bytes(raw, _raw_csv(report.rows))
        written.append(raw)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target", "mean", "std"])
        for t, (m, s) in sorted(report.per_target().items()):
            w.writerow([t, repr(m), repr(s)])
        per_target = out_dir / f"{report.benchmark}_per_target.csv"
        atomic_write_bytes(per_target, buf.getvalue().encode("utf-8"))
        written.append(per_target)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fold", "score"])
        for f, v in sorted(report.fold_scores().items()):
            w.writerow([f, repr(v)])
        mean, std = report.summary()
        w.writerow(["mean", repr(mean)])
        w.writerow(["std", repr(std)])
        folds = out_dir / f"{report.benchmark}_folds.csv"
        atomic_write_bytes(folds, buf.getvalue().encode("utf-8"))
        written.append(folds)
        return written
    if fmt == "plotdata":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["target", "mean", "std"])
        for t, (m, s) in sorted(report.per_target().items()):
            w.writerow([t, repr(m), repr(s)])
        bars = out_dir / f"{report.benchmark}_bars.csv"
        atomic_write_bytes(bars, buf.getvalue().encode("utf-8"))
        return [bars]
    raise ConfigError(f"unknown report format {fmt!r}")


def emit_stage_series(reports: list[Report], out_dir: Path) -> Path:
    """Per-(family, stage) min/max of summary scores across model configs.

    Feeds the stage-wise line plots: each report's metadata must carry
    ``family`` and ``stage`` (and usually ``model``).
    """
    groups: dict[tuple[str, str], list[float]] = {}
    for rep in reports:
        fam = str(rep.metadata.get("family", "unknown"))
        stage = str(rep.metadata.get("stage", "0"))
        mean, _ = rep.summary()
        if np.isfinite(mean):
            groups.setdefault((fam, stage), []).append(mean)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "stage", "min", "max", "n_models"])
    for (fam, stage), vals in sorted(groups.items()):
        w.writerow([fam, stage, repr(min(vals)), repr(max(vals)), len(vals)])
    path = Path(out_dir) / "stage_series.csv"
    atomic_write_bytes(path, buf.getvalue().encode("utf-8"))
    return path
