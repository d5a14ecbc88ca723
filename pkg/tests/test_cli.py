import csv
import json

import numpy as np
import pytest

from scopebench.cli import main
from scopebench.interchange import EmbeddingTable, read_table, write_table
from scopebench.synth import write_pattern
from scopebench.points import PointPattern
from scopebench.features import MultiChannelImage, write_raw_image


def _write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _snapshot(root):
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def _gene_fixture(tmp_path):
    rng = np.random.default_rng(0)
    ids, genes, rows = [], [], []
    for g in range(4):
        anchor = rng.normal(size=6)
        for i in range(12):
            ids.append(f"g{g}_i{i}")
            genes.append(f"gene{g}")
            rows.append(anchor + 0.1 * rng.normal(size=6))
    write_table(
        EmbeddingTable(ids=ids, data=np.asarray(rows, dtype=np.float32), meta={"gene": genes}),
        tmp_path / "genes",
    )
    pairs = tmp_path / "pairs.csv"
    pairs.write_text("id_a,id_b,source\ngene0,gene1,lit\ngene2,gene3,lit\n")
    return tmp_path / "genes", pairs


def test_synth_gen_writes_dataset_and_registry(tmp_path):
    cfg = _write_json(
        tmp_path / "cfg.json", {"sizes": [2, 1, 1], "classes": [0, 10]}
    )
    out = tmp_path / "ds"
    assert main(["synth-gen", "--config", cfg, "--seed", "5", "--out", str(out)]) == 0
    reg = json.loads((out / "registry.json").read_text())
    assert len(reg["classes"]) == 24
    files = sorted((out / "train").glob("*.csv"))
    assert len(files) == 4  # 2 classes x 2 train samples
    header = files[0].read_text().splitlines()[0]
    assert len(header.split(",")) == 3


def test_render_graph_from_pattern(tmp_path):
    rng = np.random.default_rng(1)
    pat = PointPattern(rng.uniform(size=(40, 2)), class_id=3, seed=9)
    write_pattern(pat, tmp_path / "sample.csv")
    cfg = _write_json(
        tmp_path / "cfg.json",
        {"input": str(tmp_path / "sample.csv"), "k": 3, "native_size": [64, 64],
         "out_size": [64, 64], "name": "g.pgm"},
    )
    out = tmp_path / "render"
    assert main(["render-graph", "--config", cfg, "--out", str(out)]) == 0
    blob = (out / "g.pgm").read_bytes()
    assert blob.startswith(b"P5\n64 64\n1\n")


def test_bin_spots_cli(tmp_path):
    spots = tmp_path / "spots.csv"
    lines = ["spot_id,x_um,y_um,grid_kind,pixel_size_um"]
    for i in range(3):
        for j in range(3):
            lines.append(f"s{i}{j},{i * 100},{j * 100},square,0.5")
    spots.write_text("\n".join(lines) + "\n")
    cells = tmp_path / "cells.csv"
    cells.write_text("cell_id,x_um,y_um\nc1,100,100\n")
    targets = tmp_path / "targets.csv"
    targets.write_text(
        "item_id,t1,t2\n" + "\n".join(
            f"s{i}{j},1.0,2.0" for i in range(3) for j in range(3)
        ) + "\n"
    )
    cfg = _write_json(
        tmp_path / "cfg.json",
        {"spots": str(spots), "patch_extent_um": 80.0,
         "cells": str(cells), "targets": str(targets)},
    )
    out = tmp_path / "bins"
    assert main(["bin-spots", "--config", cfg, "--out", str(out)]) == 0
    patches = json.loads((out / "patches.json").read_text())
    # every surviving patch contains the single cell at (100, 100)
    assert all("averaged_targets" in p for p in patches)
    center = next(p for p in patches if p["anchor"] == "s11")
    assert len(center["members"]) == 9


def _image_fixture(tmp_path, n=3):
    rng = np.random.default_rng(2)
    man = tmp_path / "manifest.csv"
    rows = ["item_id,path"]
    for i in range(n):
        img = MultiChannelImage(rng.uniform(size=(2, 16, 16)).astype(np.float32))
        write_raw_image(img, tmp_path / f"img{i}.raw")
        rows.append(f"item{i},img{i}.raw")
    man.write_text("\n".join(rows) + "\n")
    return man


def test_feat_pixel_and_singleconv(tmp_path):
    man = _image_fixture(tmp_path)
    cfg = _write_json(tmp_path / "p.json", {"manifest": str(man), "name": "px"})
    assert main(["feat-pixel", "--config", cfg, "--out", str(tmp_path / "fp")]) == 0
    t = read_table(tmp_path / "fp" / "px")
    assert t.dim == 6  # 2 channels x (mean, std, skew)

    cfg2 = _write_json(
        tmp_path / "s.json",
        {"manifest": str(man), "n_filters": 8, "kernel_size": 3, "name": "sc"},
    )
    assert main(["feat-singleconv", "--config", cfg2, "--seed", "3",
                 "--out", str(tmp_path / "fs")]) == 0
    t2 = read_table(tmp_path / "fs" / "sc")
    assert t2.dim == 8
    assert t2.meta["seed"] == ["3", "3", "3"]


def test_feat_cellcount(tmp_path):
    counts = tmp_path / "counts.csv"
    counts.write_text("item_id,count\na,10\nb,900\n")
    cfg = _write_json(tmp_path / "c.json", {"counts": str(counts), "name": "cc"})
    assert main(["feat-cellcount", "--config", cfg, "--seed", "1",
                 "--out", str(tmp_path / "fc")]) == 0
    t = read_table(tmp_path / "fc" / "cc")
    assert t.dim == 256 and t.ids == ["a", "b"]


def test_eval_retrieval_cli_and_determinism(tmp_path):
    base, pairs = _gene_fixture(tmp_path)
    cfg = _write_json(
        tmp_path / "cfg.json",
        {"inputs": {"table": str(base), "pairs": str(pairs)},
         "params": {"q": 0.4, "n_per": 3}, "seed": 0},
    )
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["eval-retrieval", "--config", cfg, "--out", str(out1)]) == 0
    assert main(["eval-retrieval", "--config", cfg, "--out", str(out2)]) == 0
    assert _snapshot(out1) == _snapshot(out2)
    report = json.loads((out1 / "report.json").read_text())
    assert report["benchmark"] == "retrieval"
    assert (out1 / "retrieval_per_target.csv").exists()


def test_eval_knn_cli(tmp_path):
    rng = np.random.default_rng(3)
    tr = np.vstack([rng.normal(size=(6, 3)) + [3, 0, 0],
                    rng.normal(size=(6, 3)) + [0, 3, 0]]).astype(np.float32)
    write_table(
        EmbeddingTable(ids=[f"t{i}" for i in range(12)], data=tr,
                       meta={"label": ["x"] * 6 + ["y"] * 6}),
        tmp_path / "train",
    )
    write_table(
        EmbeddingTable(ids=["q0", "q1"], data=tr[[0, 6]],
                       meta={"label": ["x", "y"]}),
        tmp_path / "test",
    )
    cfg = _write_json(
        tmp_path / "cfg.json",
        {"inputs": {"train": str(tmp_path / "train"), "test": str(tmp_path / "test")},
         "params": {"k": 1}},
    )
    assert main(["eval-knn", "--config", cfg, "--out", str(tmp_path / "res")]) == 0
    report = json.loads((tmp_path / "res" / "report.json").read_text())
    assert report["summary"]["mean"] == 1.0


def test_report_verb_aggregates_runs(tmp_path):
    base, pairs = _gene_fixture(tmp_path)
    for stage in (1, 2):
        cfg = _write_json(
            tmp_path / f"cfg{stage}.json",
            {"inputs": {"table": str(base), "pairs": str(pairs)},
             "params": {"q": 0.4, "n_per": 3,
                        "metadata": {"model": f"m{stage}", "family": "cnn",
                                     "stage": str(stage)}},
             "seed": 0},
        )
        assert main(["eval-retrieval", "--config", cfg,
                     "--out", str(tmp_path / f"run{stage}")]) == 0
    rcfg = _write_json(tmp_path / "rcfg.json", {"dir": str(tmp_path)})
    assert main(["report", "--config", rcfg, "--out", str(tmp_path / "agg")]) == 0
    with open(tmp_path / "agg" / "bars.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["label"] for r in rows} == {"m1", "m2"}
    assert (tmp_path / "agg" / "stage_series.csv").exists()


def test_config_error_exit_code(tmp_path):
    cfg = _write_json(tmp_path / "cfg.json", {})
    assert main(["render-graph", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_data_error_exit_code(tmp_path):
    base, pairs = _gene_fixture(tmp_path)
    # truncate the payload to force a data error
    payload = base.with_name("genes.f32")
    payload.write_bytes(payload.read_bytes()[:-4])
    cfg = _write_json(
        tmp_path / "cfg.json",
        {"inputs": {"table": str(base), "pairs": str(pairs)}, "params": {"q": 0.4}},
    )
    assert main(["eval-retrieval", "--config", cfg, "--out", str(tmp_path / "x")]) == 3


def test_missing_input_file_is_data_error(tmp_path):
    cfg = _write_json(
        tmp_path / "cfg.json",
        {"input": str(tmp_path / "nope.csv")},
    )
    assert main(["render-graph", "--config", cfg, "--out", str(tmp_path)]) == 3
