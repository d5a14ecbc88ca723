"""Similarity-based evaluation of frozen embeddings.

Cosine similarity matrices, tail recall against literature pair sets,
replicate-retrieval mean average precision, rank correlations, rank-based
representational similarity with hierarchical clustering, and kNN label
probing. Everything is a deterministic, read-only function of its inputs.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, UnresolvedIdError


@dataclass
class SimilarityMatrix:
    item_ids: list[str]
    values: np.ndarray  # (n, n)
    zero_rows: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.item_ids)


@dataclass
class PairSet:
    """Unordered item-id pairs (ground-truth relationships)."""

    pairs: set[tuple[str, str]]
    source: str = ""

    def __post_init__(self) -> None:
        canon = set()
        for a, b in self.pairs:
            if a == b:
                raise DataError(f"self-pair {a!r} in pair set {self.source!r}")
            canon.add((a, b) if a < b else (b, a))
        self.pairs = canon

    @staticmethod
    def from_csv(path: Path) -> dict[str, "PairSet"]:
        """Read ``id_a,id_b,source`` rows into one PairSet per source."""
        by_source: dict[str, set[tuple[str, str]]] = {}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            need = {"id_a", "id_b", "source"}
            if reader.fieldnames is None or not need.issubset(reader.fieldnames):
                raise DataError(f"{path}: expected header id_a,id_b,source")
            for row in reader:
                by_source.setdefault(row["source"], set()).add((row["id_a"], row["id_b"]))
        return {src: PairSet(pairs=p, source=src) for src, p in sorted(by_source.items())}


def read_labels_csv(path: Path) -> dict[str, str]:
    """Item labels: header ``item_id,group``."""
    out: dict[str, str] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"item_id", "group"}
        if reader.fieldnames is None or not need.issubset(reader.fieldnames):
            raise DataError(f"{path}: expected header item_id,group")
        for row in reader:
            out[row["item_id"]] = row["group"]
    if not out:
        raise DataError(f"{path}: no labels")
    return out


def cosine_matrix(data: np.ndarray, item_ids: list[str] | None = None) -> SimilarityMatrix:
    """All-pairs cosine similarity of table rows.

    All-zero rows cannot be normalized; their similarities are defined as 0
    and the row indices are returned in ``zero_rows``.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2:
        raise DataError("embedding table must be 2-D")
    n = x.shape[0]
    ids = item_ids if item_ids is not None else [str(i) for i in range(n)]
    norms = np.linalg.norm(x, axis=1)
    zero = np.where(norms == 0)[0]
    safe = np.where(norms > 0, norms, 1.0)
    xn = x / safe[:, None]
    s = xn @ xn.T
    s = (s + s.T) / 2.0
    nonzero = norms > 0
    s[~nonzero, :] = 0.0
    s[:, ~nonzero] = 0.0
    np.fill_diagonal(s, np.where(nonzero, 1.0, 0.0))
    return SimilarityMatrix(item_ids=list(ids), values=s, zero_rows=zero.tolist())


def _pair_index_map(ids: list[str]) -> dict[str, int]:
    idx = {}
    for i, name in enumerate(ids):
        if name in idx:
            raise DataError(f"duplicate item id {name!r}")
        idx[name] = i
    return idx


def pair_similarities(sim: SimilarityMatrix) -> np.ndarray:
    """Upper-triangle similarities in row-major (i < j) pair order."""
    iu = np.triu_indices(sim.n, k=1)
    return sim.values[iu]


def recall_at_tail(
    sim: SimilarityMatrix,
    truth: PairSet,
    q: float = 0.05,
    tail: str = "top",
    per_row: bool = False,
) -> float:
    """Fraction of ground-truth pairs inside the chosen similarity tail.

    Globally (default), the ceil(q * C(n,2)) most (``top``) or least
    (``bottom``) similar unordered pairs are selected, with ties broken by
    the stable pair index. With ``per_row`` each item instead contributes
    its ceil(q * (n-1)) nearest (or farthest) partners, and a truth pair
    counts as recalled when either endpoint selects the other.
    """
    if not 0.0 < q < 1.0:
        raise ConfigError("q must lie strictly between 0 and 1")
    if tail not in ("top", "bottom"):
        raise ConfigError(f"unknown tail {tail!r}")
    index = _pair_index_map(sim.item_ids)
    resolved = []
    unresolved = []
    for a, b in sorted(truth.pairs):
        if a in index and b in index:
            i, j = sorted((index[a], index[b]))
            resolved.append((i, j))
        else:
            unresolved.append((a, b))
    if not resolved:
        raise UnresolvedIdError(
            f"no truth pair resolves against the table; unresolved: {unresolved[:10]}"
        )
    n = sim.n
    if per_row:
        m = int(np.ceil(q * (n - 1)))
        vals = sim.values.copy()
        np.fill_diagonal(vals, -np.inf if tail == "top" else np.inf)
        keys = -vals if tail == "top" else vals
        order = np.argsort(keys, axis=1, kind="stable")[:, :m]
        chosen = np.zeros((n, n), dtype=bool)
        np.put_along_axis(chosen, order, True, axis=1)
        hits = sum(1 for i, j in resolved if chosen[i, j] or chosen[j, i])
        return hits / len(resolved)
    sims = pair_similarities(sim)
    n_pairs = sims.size
    m = int(np.ceil(q * n_pairs))
    keys = -sims if tail == "top" else sims
    selected = np.zeros(n_pairs, dtype=bool)
    selected[np.argsort(keys, kind="stable")[:m]] = True
    # row-major upper-triangle offset of pair (i, j), i < j
    row_start = np.cumsum(np.concatenate([[0], np.arange(n - 1, 0, -1)]))
    hits = sum(1 for i, j in resolved if selected[row_start[i] + (j - i - 1)])
    return hits / len(resolved)


@dataclass
class MapResult:
    per_group: dict[str, float]
    mean_ap: float
    excluded_groups: list[str] = field(default_factory=list)


def average_precision(relevant: np.ndarray) -> float:
    """AP of a binary relevance list in rank order."""
    rel = np.asarray(relevant, dtype=bool)
    total = int(rel.sum())
    if total == 0:
        return 0.0
    ranks = np.where(rel)[0] + 1
    precisions = np.arange(1, total + 1) / ranks
    return float(precisions.mean())


def map_retrieval(data: np.ndarray, labels: list[str],
                  item_ids: list[str] | None = None) -> MapResult:
    """Replicate-retrieval mean average precision.

    Every item queries all others ranked by cosine similarity (descending,
    ties by stable item order); positives are same-group items. Group AP
    averages the group's query APs; mAP averages group APs. Groups with a
    single member cannot be queried and are excluded with a warning.
    """
    labels = list(labels)
    n = len(labels)
    if data.shape[0] != n:
        raise DataError("labels and table row count disagree")
    groups: dict[str, list[int]] = {}
    for i, g in enumerate(labels):
        groups.setdefault(g, []).append(i)
    excluded = sorted(g for g, members in groups.items() if len(members) < 2)
    if excluded:
        warnings.warn(f"excluding singleton groups: {excluded}", stacklevel=2)
    usable = {g: m for g, m in groups.items() if len(m) >= 2}
    if len(usable) < 2:
        raise DataError("need at least 2 groups with >= 2 members each")
    sim = cosine_matrix(data, item_ids).values
    lab = np.asarray(labels)
    per_group: dict[str, float] = {}
    for g in sorted(usable):
        aps = []
        for qi in usable[g]:
            others = np.concatenate([np.arange(qi), np.arange(qi + 1, n)])
            order = others[np.argsort(-sim[qi, others], kind="stable")]
            aps.append(average_precision(lab[order] == g))
        per_group[g] = float(np.mean(aps))
    return MapResult(
        per_group=per_group,
        mean_ap=float(np.mean(list(per_group.values()))),
        excluded_groups=excluded,
    )


# ----------------------------------------------------------------------
# Correlation statistics
# ----------------------------------------------------------------------


def pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    """Product-moment correlation; 0 (with a warning) at zero variance."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise DataError("pearson_r inputs differ in length")
    if x.size < 2:
        raise DataError("pearson_r needs at least 2 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc**2).sum() * (yc**2).sum())
    if denom == 0.0:
        warnings.warn("zero variance input; defining r = 0", stacklevel=2)
        return 0.0
    return float(np.clip((xc * yc).sum() / denom, -1.0, 1.0))


def average_rank(v: np.ndarray) -> np.ndarray:
    """Ranks 1..n with average-rank tie handling."""
    v = np.asarray(v).reshape(-1)
    order = np.argsort(v, kind="stable")
    sv = v[order]
    boundaries = np.concatenate([[0], np.where(np.diff(sv) != 0)[0] + 1, [v.size]])
    ranks = np.empty(v.size, dtype=np.float64)
    for a, b in zip(boundaries[:-1], boundaries[1:]):
        ranks[order[a:b]] = (a + b + 1) / 2.0
    return ranks


def spearman_rho(x: np.ndarray, y: np.ndarray) -> float:
    """Rank correlation: Pearson of tie-averaged ranks."""
    x = np.asarray(x).reshape(-1)
    y = np.asarray(y).reshape(-1)
    if x.size != y.size:
        raise DataError("spearman_rho inputs differ in length")
    return pearson_r(average_rank(x), average_rank(y))


def pair_ranking(sim: SimilarityMatrix) -> np.ndarray:
    """Rank vector (tie-averaged) of all C(n,2) pair similarities."""
    return average_rank(pair_similarities(sim))


# ----------------------------------------------------------------------
# Representational similarity across models
# ----------------------------------------------------------------------


def _average_linkage_order(dist: np.ndarray, names: list[str]) -> list[int]:
    """Leaf order from average-linkage clustering, ties broken by name.

    Inputs are processed in name order, merges pick the smallest pairwise
    average distance (ties by the lexicographically smallest name pair),
    and a merged cluster lists the branch with the smaller leading name
    first, so the order is stable under permutation of the inputs.
    """
    n = len(names)
    by_name = sorted(range(n), key=lambda i: names[i])
    clusters: list[list[int]] = [[i] for i in by_name]
    while len(clusters) > 1:
        best = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                d = float(
                    np.mean([dist[i, j] for i in clusters[a] for j in clusters[b]])
                )
                key = (
                    d,
                    min(names[i] for i in clusters[a] + clusters[b]),
                    max(names[i] for i in clusters[a] + clusters[b]),
                )
                if best is None or key < best[0]:
                    best = (key, a, b)
        _, a, b = best
        left, right = clusters[a], clusters[b]
        if min(names[i] for i in right) < min(names[i] for i in left):
            left, right = right, left
        merged = left + right
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)]
        clusters.append(merged)
    return clusters[0]


def rsa_matrix(
    rankings: list[np.ndarray], model_names: list[str]
) -> tuple[np.ndarray, list[int]]:
    """Model-by-model Spearman correlation with a clustered leaf order.

    Every ranking must cover the same pair universe (equal length). The
    returned order indexes ``model_names`` so correlated models sit
    adjacently (average linkage on distance 1 - rho).
    """
    if len(rankings) != len(model_names):
        raise DataError("one ranking per model name required")
    if len(rankings) < 1:
        raise DataError("need at least one ranking")
    length = rankings[0].size
    for r, name in zip(rankings, model_names):
        if r.size != length:
            raise DataError(f"ranking for {name!r} covers a different pair universe")
    k = len(rankings)
    m = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            rho = spearman_rho(rankings[i], rankings[j])
            m[i, j] = m[j, i] = rho
    order = _average_linkage_order(1.0 - m, list(model_names))
    return m, order


# ----------------------------------------------------------------------
# kNN probing
# ----------------------------------------------------------------------


def knn_probe(
    train: np.ndarray,
    train_labels: list[str],
    test: np.ndarray,
    test_labels: list[str],
    k: int = 20,
) -> float:
    """Top-1 accuracy of cosine-distance kNN majority voting.

    Vote ties resolve toward the label with the smallest mean distance
    among its voters, then by label sort order.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    train = np.asarray(train, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if train.shape[0] == 0:
        raise DataError("empty train table")
    if train.shape[0] < k:
        k = train.shape[0]
    tr_labels = np.asarray(list(train_labels))
    norms_tr = np.linalg.norm(train, axis=1)
    norms_te = np.linalg.norm(test, axis=1)
    tr = train / np.where(norms_tr > 0, norms_tr, 1.0)[:, None]
    te = test / np.where(norms_te > 0, norms_te, 1.0)[:, None]
    dist = 1.0 - te @ tr.T
    correct = 0
    for qi in range(test.shape[0]):
        row = dist[qi]
        cand = np.argpartition(row, k - 1)[:k]
        cand = cand[np.lexsort((cand, row[cand]))]
        votes: dict[str, list[float]] = {}
        for ci in cand:
            votes.setdefault(str(tr_labels[ci]), []).append(float(row[ci]))
        best = sorted(
            votes.items(), key=lambda kv: (-len(kv[1]), float(np.mean(kv[1])), kv[0])
        )[0][0]
        if best == str(test_labels[qi]):
            correct += 1
    return correct / max(test.shape[0], 1)
