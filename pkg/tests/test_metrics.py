import numpy as np
import pytest
from scipy import stats as scipy_stats

from scopebench.errors import ConfigError, DataError, UnresolvedIdError
from scopebench.metrics import (
    MapResult,
    PairSet,
    SimilarityMatrix,
    average_precision,
    average_rank,
    cosine_matrix,
    knn_probe,
    map_retrieval,
    pair_ranking,
    pair_similarities,
    pearson_r,
    recall_at_tail,
    rsa_matrix,
    spearman_rho,
)


# ----------------------------------------------------------------------
# Cosine similarity
# ----------------------------------------------------------------------


def test_cosine_identical_orthogonal_scaled():
    x = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0]])
    s = cosine_matrix(x)
    assert s.values[0, 1] == pytest.approx(1.0, abs=1e-12)
    assert s.values[0, 2] == pytest.approx(0.0, abs=1e-12)
    assert s.values[0, 3] == pytest.approx(1.0, abs=1e-12)  # scale invariance


def test_cosine_zero_rows_flagged():
    x = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
    s = cosine_matrix(x)
    assert s.zero_rows == [1]
    assert (s.values[1] == 0).all() and (s.values[:, 1] == 0).all()


def test_cosine_symmetric_unit_diagonal():
    rng = np.random.default_rng(0)
    s = cosine_matrix(rng.normal(size=(20, 8)))
    assert np.abs(s.values - s.values.T).max() == 0.0
    assert np.abs(np.diag(s.values) - 1).max() == 0.0


# ----------------------------------------------------------------------
# Tail recall
# ----------------------------------------------------------------------


def _sim_from_values(vals: np.ndarray, ids: list[str]) -> SimilarityMatrix:
    return SimilarityMatrix(item_ids=ids, values=vals)


def test_recall_perfect_when_truth_is_top():
    # three items, pair sims: (a,b)=0.9 (a,c)=0.1 (b,c)=0.0
    vals = np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.0], [0.1, 0.0, 1.0]])
    sim = _sim_from_values(vals, ["a", "b", "c"])
    truth = PairSet(pairs={("a", "b")})
    assert recall_at_tail(sim, truth, q=0.4, tail="top") == 1.0


def test_recall_zero_when_truth_is_bottom():
    vals = np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.5], [0.1, 0.5, 1.0]])
    sim = _sim_from_values(vals, ["a", "b", "c"])
    truth = PairSet(pairs={("a", "c")})  # the least similar pair
    assert recall_at_tail(sim, truth, q=0.34, tail="top") == 0.0
    assert recall_at_tail(sim, truth, q=0.34, tail="bottom") == 1.0


def test_recall_random_null_expectation():
    # permutation Monte-Carlo oracle: with random embeddings the expected
    # recall equals the selected tail fraction
    rng = np.random.default_rng(42)
    ids = [f"g{i}" for i in range(50)]
    truth = PairSet(
        pairs={
            (f"g{a}", f"g{b}")
            for a, b in rng.integers(0, 50, size=(80, 2))
            if a != b
        }
    )
    recalls = [
        recall_at_tail(
            cosine_matrix(rng.normal(size=(50, 32)), ids), truth, q=0.05
        )
        for _ in range(100)
    ]
    assert np.mean(recalls) == pytest.approx(0.05, abs=0.01)


def test_recall_invariant_under_monotone_transform():
    rng = np.random.default_rng(1)
    ids = [f"i{k}" for k in range(12)]
    vals = rng.uniform(-1, 1, size=(12, 12))
    vals = (vals + vals.T) / 2
    truth = PairSet(pairs={("i0", "i1"), ("i2", "i5"), ("i3", "i9")})
    sim = _sim_from_values(vals, ids)
    warped = _sim_from_values(np.tanh(3.0 * vals) + 5.0, ids)
    for q in (0.05, 0.2, 0.5):
        assert recall_at_tail(sim, truth, q=q) == recall_at_tail(warped, truth, q=q)


def test_recall_per_row_mode():
    vals = np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.0], [0.1, 0.0, 1.0]])
    sim = _sim_from_values(vals, ["a", "b", "c"])
    truth = PairSet(pairs={("a", "b")})
    assert recall_at_tail(sim, truth, q=0.5, per_row=True) == 1.0


def test_recall_unresolved_ids_error():
    sim = cosine_matrix(np.eye(3), ["a", "b", "c"])
    with pytest.raises(UnresolvedIdError):
        recall_at_tail(sim, PairSet(pairs={("x", "y")}), q=0.1)
    with pytest.raises(ConfigError):
        recall_at_tail(sim, PairSet(pairs={("a", "b")}), q=1.5)


# ----------------------------------------------------------------------
# mAP
# ----------------------------------------------------------------------


def test_map_separated_clusters_is_one():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(5, 4)) * 0.01 + np.array([10, 0, 0, 0])
    b = rng.normal(size=(5, 4)) * 0.01 + np.array([0, 10, 0, 0])
    res = map_retrieval(np.vstack([a, b]), ["A"] * 5 + ["B"] * 5)
    assert res.mean_ap == pytest.approx(1.0, abs=1e-12)


def test_average_precision_enumeration():
    # positives at ranks 1 and 3 of 3: AP = (1/1 + 2/3) / 2
    assert average_precision([1, 0, 1]) == pytest.approx(5 / 6, abs=1e-12)
    assert average_precision([0, 1, 1]) == pytest.approx((1 / 2 + 2 / 3) / 2, abs=1e-12)
    assert average_precision([0, 0, 0]) == 0.0


def _exhaustive_ap_oracle(sim_row, labels, qi):
    """Walk the explicitly sorted candidate list, accumulating precision."""
    n = len(labels)
    cands = [(float(-sim_row[j]), j) for j in range(n) if j != qi]
    cands.sort()
    hits, total, out = 0, 0, []
    for rank, (_, j) in enumerate(cands, start=1):
        if labels[j] == labels[qi]:
            hits += 1
            out.append(hits / rank)
    return sum(out) / hits if hits else 0.0


def test_map_matches_exhaustive_oracle_small_sets():
    rng = np.random.default_rng(3)
    for trial in range(200):
        n = int(rng.integers(4, 7))
        labels = [str(rng.integers(0, 2)) for _ in range(n)]
        if len({l for l in labels if labels.count(l) >= 2}) < 2:
            continue
        x = rng.normal(size=(n, 3))
        res = map_retrieval(x, labels)
        sim = cosine_matrix(x).values
        groups = {}
        for i, l in enumerate(labels):
            groups.setdefault(l, []).append(i)
        for g, members in groups.items():
            if len(members) < 2:
                continue
            oracle = np.mean([_exhaustive_ap_oracle(sim[qi], labels, qi) for qi in members])
            assert abs(res.per_group[g] - oracle) < 1e-12


def test_map_random_baseline():
    rng = np.random.default_rng(4)
    vals = []
    for _ in range(100):
        x = rng.normal(size=(8 * 48, 16))
        labels = [f"c{i % 8}" for i in range(8 * 48)]
        vals.append(map_retrieval(x, labels).mean_ap)
    assert np.mean(vals) == pytest.approx(0.125, abs=0.02)


def test_map_scale_invariance_exact():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(12, 6))
    labels = ["a", "b", "c"] * 4
    r1 = map_retrieval(x, labels)
    r2 = map_retrieval(1000.0 * x, labels)
    for g in r1.per_group:
        assert abs(r1.per_group[g] - r2.per_group[g]) < 1e-12


def test_map_excludes_singletons_with_warning():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(5, 3))
    with pytest.warns(UserWarning, match="singleton"):
        res = map_retrieval(x, ["a", "a", "b", "b", "lonely"])
    assert res.excluded_groups == ["lonely"]
    with pytest.raises(DataError), pytest.warns(UserWarning, match="singleton"):
        map_retrieval(x, ["a", "a", "a", "a", "lonely"])


# ----------------------------------------------------------------------
# Correlations
# ----------------------------------------------------------------------


def test_pearson_linear_relations():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    assert pearson_r(x, 2 * x) == 1.0
    assert pearson_r(x, -x) == -1.0


def test_pearson_frozen_value():
    assert pearson_r([1, 2, 3], [1, 2, 4]) == pytest.approx(0.9819805060619659, abs=1e-12)
    oracle = scipy_stats.pearsonr([1, 2, 3], [1, 2, 4]).statistic
    assert pearson_r([1, 2, 3], [1, 2, 4]) == pytest.approx(oracle, abs=1e-12)


def test_pearson_zero_variance_flagged():
    with pytest.warns(UserWarning, match="zero variance"):
        assert pearson_r([1, 1, 1], [1, 2, 3]) == 0.0


def test_pearson_length_mismatch():
    with pytest.raises(DataError):
        pearson_r([1, 2], [1, 2, 3])


def test_spearman_basic():
    assert spearman_rho([1, 2, 3], [10, 20, 30]) == 1.0
    assert spearman_rho([1, 2, 3], [3, 2, 1]) == -1.0
    assert spearman_rho([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-12)


def test_spearman_monotone_transform_is_one():
    rng = np.random.default_rng(7)
    x = rng.normal(size=50)
    assert spearman_rho(x, np.exp(x)) == pytest.approx(1.0, abs=1e-12)


def test_average_rank_ties_match_scipy():
    rng = np.random.default_rng(8)
    for _ in range(100):
        v = rng.integers(0, 6, size=int(rng.integers(3, 20))).astype(float)
        mine = average_rank(v)
        oracle = scipy_stats.rankdata(v, method="average")
        assert np.abs(mine - oracle).max() < 1e-12


def test_spearman_matches_scipy_with_ties():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.integers(4, 15))
        x = rng.integers(0, 5, size=n).astype(float)
        y = rng.integers(0, 5, size=n).astype(float)
        if np.unique(x).size < 2 or np.unique(y).size < 2:
            continue
        oracle = scipy_stats.spearmanr(x, y).statistic
        assert spearman_rho(x, y) == pytest.approx(oracle, abs=1e-12)


# ----------------------------------------------------------------------
# RSA
# ----------------------------------------------------------------------


def test_rsa_diagonal_and_duplicates():
    rng = np.random.default_rng(10)
    r1 = pair_ranking(cosine_matrix(rng.normal(size=(10, 4))))
    r2 = pair_ranking(cosine_matrix(rng.normal(size=(10, 4))))
    m, order = rsa_matrix([r1, r2, r1], ["a", "b", "a_copy"])
    assert np.allclose(np.diag(m), 1.0)
    assert m[0, 2] == pytest.approx(1.0, abs=1e-12)  # duplicated model
    assert sorted(order) == [0, 1, 2]


def test_rsa_clusters_closest_pair_first():
    # hand-run average linkage: models A and B nearly identical, C distinct;
    # A and B must end up adjacent in the leaf order
    rng = np.random.default_rng(11)
    base = rng.normal(size=(12, 6))
    ra = pair_ranking(cosine_matrix(base))
    rb = pair_ranking(cosine_matrix(base + rng.normal(size=base.shape) * 0.01))
    rc = pair_ranking(cosine_matrix(rng.normal(size=(12, 6))))
    _, order = rsa_matrix([rc, ra, rb], ["c", "a", "b"])
    pos = {name: order.index(i) for i, name in enumerate(["c", "a", "b"])}
    assert abs(pos["a"] - pos["b"]) == 1


def test_rsa_order_permutation_stable():
    rng = np.random.default_rng(12)
    rks = [pair_ranking(cosine_matrix(rng.normal(size=(9, 5)))) for _ in range(4)]
    names = ["m0", "m1", "m2", "m3"]
    _, order1 = rsa_matrix(rks, names)
    perm = [2, 0, 3, 1]
    _, order2 = rsa_matrix([rks[i] for i in perm], [names[i] for i in perm])
    leaves1 = [names[i] for i in order1]
    leaves2 = [[names[i] for i in perm][j] for j in order2]
    assert leaves1 == leaves2


def test_rsa_mismatched_universe_errors():
    with pytest.raises(DataError):
        rsa_matrix([np.arange(6.0), np.arange(10.0)], ["a", "b"])


def test_pair_ranking_length():
    s = cosine_matrix(np.random.default_rng(13).normal(size=(8, 3)))
    assert pair_ranking(s).size == 8 * 7 // 2
    assert pair_similarities(s).size == 28


# ----------------------------------------------------------------------
# kNN probing
# ----------------------------------------------------------------------


def test_knn_probe_memorizes_train_points():
    rng = np.random.default_rng(14)
    x = rng.normal(size=(10, 4))
    labels = [str(i) for i in range(10)]
    assert knn_probe(x, labels, x[3:4], [labels[3]], k=1) == 1.0


def test_knn_probe_separated_clusters():
    rng = np.random.default_rng(15)
    tr_a = rng.normal(size=(20, 4)) * 0.01 + np.array([5, 0, 0, 0])
    tr_b = rng.normal(size=(20, 4)) * 0.01 + np.array([0, 5, 0, 0])
    te_a = rng.normal(size=(5, 4)) * 0.01 + np.array([5, 0, 0, 0])
    te_b = rng.normal(size=(5, 4)) * 0.01 + np.array([0, 5, 0, 0])
    acc = knn_probe(
        np.vstack([tr_a, tr_b]),
        ["a"] * 20 + ["b"] * 20,
        np.vstack([te_a, te_b]),
        ["a"] * 5 + ["b"] * 5,
        k=5,
    )
    assert acc == 1.0


def test_knn_probe_matches_brute_force_oracle():
    rng = np.random.default_rng(16)
    train = rng.normal(size=(30, 5))
    test = rng.normal(size=(12, 5))
    tr_labels = [str(rng.integers(0, 3)) for _ in range(30)]
    te_labels = [str(rng.integers(0, 3)) for _ in range(12)]
    acc = knn_probe(train, tr_labels, test, te_labels, k=3)

    def cos_dist(u, v):
        return 1.0 - float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))

    correct = 0
    for qi in range(12):
        ranked = sorted((cos_dist(test[qi], train[j]), j) for j in range(30))[:3]
        votes = {}
        for d, j in ranked:
            votes.setdefault(tr_labels[j], []).append(d)
        winner = sorted(
            votes.items(), key=lambda kv: (-len(kv[1]), float(np.mean(kv[1])), kv[0])
        )[0][0]
        correct += winner == te_labels[qi]
    assert acc == correct / 12


def test_knn_probe_empty_train_errors():
    with pytest.raises(DataError):
        knn_probe(np.empty((0, 3)), [], np.ones((1, 3)), ["a"], k=1)
