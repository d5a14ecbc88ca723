"""Profile aggregation with control centering, and fold construction.

Profiles average item embeddings per group (one vector per gene or
compound). Optional batch-effect mitigation subtracts each plate's mean
negative-control embedding from the plate's rows before aggregation.
Fold schemes cover both retrieval protocols: a per-gene subsample with a
fixed number of images per gene, and plate-grouped folds drawing the same
number of compound plates from every laboratory.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .interchange import EmbeddingTable


@dataclass
class FoldSpec:
    assignments: dict[str, int]
    scheme: str
    n_folds: int

    def members(self, fold: int) -> list[str]:
        return [item for item, f in self.assignments.items() if f == fold]

    def folds(self) -> list[int]:
        return sorted(set(self.assignments.values()))


def build_profiles(
    table: EmbeddingTable,
    group_key: str,
    center: str = "none",
    plate_key: str = "plate",
    control_key: str = "control",
    negative_value: str = "negcon",
    aggregate: str = "mean",
) -> EmbeddingTable:
    """Aggregate item embeddings into one profile per group.

    Groups come from metadata ``group_key``; the aggregation statistic is
    the arithmetic mean (``median`` available). With
    ``center="negcontrol_per_plate"`` every row is first centered by the
    mean embedding of its plate's negative-control rows; plates without
    negative controls are an error. Metadata constant within a group is
    carried over to the profile.
    """
    if group_key not in table.meta:
        raise ConfigError(f"metadata key {group_key!r} not present")
    if aggregate not in ("mean", "median"):
        raise ConfigError(f"unknown aggregate {aggregate!r}")
    data = table.data.astype(np.float64)
    if center == "negcontrol_per_plate":
        for key in (plate_key, control_key):
            if key not in table.meta:
                raise ConfigError(f"centering requires metadata key {key!r}")
        plates = np.asarray(table.meta[plate_key])
        is_neg = np.asarray(table.meta[control_key]) == negative_value
        missing = sorted(set(plates[~is_neg]) - set(plates[is_neg]))
        if missing:
            raise DataError(f"plates lacking negative controls: {missing}")
        data = data.copy()
        for plate in sorted(set(plates.tolist())):
            rows = plates == plate
            ref = data[rows & is_neg].mean(axis=0)
            data[rows] -= ref
    elif center != "none":
        raise ConfigError(f"unknown centering mode {center!r}")
    groups = np.asarray(table.meta[group_key])
    out_ids: list[str] = []
    out_rows: list[np.ndarray] = []
    out_meta: dict[str, list[str]] = {k: [] for k in table.meta}
    for g in sorted(set(groups.tolist())):
        members = np.where(groups == g)[0]
        block = data[members]
        out_ids.append(g)
        out_rows.append(block.mean(axis=0) if aggregate == "mean" else np.median(block, axis=0))
        for key, col in table.meta.items():
            vals = {col[i] for i in members}
            out_meta[key].append(vals.pop() if len(vals) == 1 else "")
    return EmbeddingTable(
        ids=out_ids, data=np.asarray(out_rows, dtype=np.float32), meta=out_meta
    )


def make_folds(
    table: EmbeddingTable,
    scheme: str,
    seed: int = 0,
    n_folds: int | None = None,
    n_per: int = 10,
    plates_per_lab: int = 4,
    gene_key: str = "gene",
    plate_key: str = "plate",
    lab_key: str = "lab",
) -> FoldSpec:
    """Deterministically assign items to evaluation folds.

    ``per_gene_subsample`` (default 3 folds) samples ``n_per`` items per
    gene into each fold without replacement, disjoint across folds while
    supply allows; a short gene's items are dealt round-robin with a
    warning. ``plate_grouped`` (default 5 folds) draws ``plates_per_lab``
    plates per laboratory for every fold, without overlap across folds;
    all items on a selected plate join the plate's fold.
    """
    rng = np.random.default_rng(seed)
    if scheme == "per_gene_subsample":
        folds = 3 if n_folds is None else n_folds
        if gene_key not in table.meta:
            raise ConfigError(f"metadata key {gene_key!r} not present")
        genes = np.asarray(table.meta[gene_key])
        assignments: dict[str, int] = {}
        short: list[str] = []
        for gene in sorted(set(genes.tolist())):
            members = np.where(genes == gene)[0]
            perm = members[rng.permutation(len(members))]
            want = folds * n_per
            if len(perm) < want:
                short.append(gene)
            take = perm[: min(len(perm), want)]
            quota = [0] * folds
            f = 0
            for idx in take:
                while quota[f] >= n_per:
                    f = (f + 1) % folds
                assignments[table.ids[idx]] = f
                quota[f] += 1
                f = (f + 1) % folds
        if short:
            warnings.warn(
                f"{len(short)} gene(s) below {folds}x{n_per} items; "
                f"dealt round-robin: {short[:5]}",
                stacklevel=2,
            )
        return FoldSpec(assignments=assignments, scheme=scheme, n_folds=folds)
    if scheme == "plate_grouped":
        folds = 5 if n_folds is None else n_folds
        for key in (plate_key, lab_key):
            if key not in table.meta:
                raise ConfigError(f"metadata key {key!r} not present")
        plates = np.asarray(table.meta[plate_key])
        labs = np.asarray(table.meta[lab_key])
        plate_fold: dict[str, int] = {}
        short_labs: list[str] = []
        for lab in sorted(set(labs.tolist())):
            lab_plates = sorted(set(plates[labs == lab].tolist()))
            perm = [lab_plates[i] for i in rng.permutation(len(lab_plates))]
            want = folds * plates_per_lab
            if len(perm) < want:
                short_labs.append(lab)
            for k, plate in enumerate(perm[: min(len(perm), want)]):
                plate_fold[plate] = k // plates_per_lab if len(perm) >= want else k % folds
        if short_labs:
            warnings.warn(
                f"lab(s) below {folds}x{plates_per_lab} plates; "
                f"spread round-robin: {short_labs}",
                stacklevel=2,
            )
        assignments = {
            table.ids[i]: plate_fold[plates[i]]
            for i in range(table.n_items)
            if plates[i] in plate_fold
        }
        return FoldSpec(assignments=assignments, scheme=scheme, n_folds=folds)
    raise ConfigError(f"unknown fold scheme {scheme!r}")
