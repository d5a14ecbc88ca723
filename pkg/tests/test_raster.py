import numpy as np
import pytest

from scopebench.errors import DataError
from scopebench.graphs import EdgeList, knn_graph
from scopebench.points import PointPattern
from scopebench.raster import (
    BinaryRaster,
    rasterize_edges,
    read_packed_bits,
    read_pgm,
    render_edges,
    resize_bilinear,
    write_packed_bits,
    write_pgm,
)


def test_empty_edge_set_gives_zero_raster():
    pat = PointPattern(np.array([[0.2, 0.2], [0.8, 0.8]]))
    e = EdgeList(n_nodes=2, edges=np.empty((0, 2)))
    r = rasterize_edges(pat, e, 1, (32, 32))
    assert r.bits.sum() == 0


def test_single_horizontal_edge_sets_exactly_one_row():
    pat = PointPattern(np.array([[0.0, 0.5], [1.0, 0.5]]))
    e = EdgeList(n_nodes=2, edges=np.array([[0, 1]]))
    r = rasterize_edges(pat, e, 1, (64, 64))
    rows = r.bits.sum(axis=1)
    assert (rows > 0).sum() == 1
    assert rows.max() == 64


def test_diagonal_edge_is_thin():
    pat = PointPattern(np.array([[0.0, 0.0], [1.0, 1.0]]))
    e = EdgeList(n_nodes=2, edges=np.array([[0, 1]]))
    r = rasterize_edges(pat, e, 1, (33, 33))
    assert r.bits.sum() == 33  # exactly the diagonal pixels


def test_wider_edges_are_supersets():
    rng = np.random.default_rng(0)
    pat = PointPattern(rng.uniform(size=(20, 2)))
    e = knn_graph(pat, 3)
    r1 = rasterize_edges(pat, e, 1, (64, 64))
    r3 = rasterize_edges(pat, e, 3, (64, 64))
    assert (r3.bits >= r1.bits).all()
    assert r3.bits.sum() > r1.bits.sum()


def _rotate_pattern_90(pts: np.ndarray) -> np.ndarray:
    # (x, y) -> (y, 1 - x): a 90-degree rotation about the square center
    return np.column_stack([pts[:, 1], 1.0 - pts[:, 0]])


def test_rotation_commutes_with_rasterization():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(size=(30, 2))
        pat = PointPattern(pts)
        e = knn_graph(pat, 3)
        r = rasterize_edges(pat, e, 1, (48, 48))
        rot = PointPattern(_rotate_pattern_90(pts))
        r_rot = rasterize_edges(rot, e, 1, (48, 48))
        assert np.array_equal(r_rot.bits, np.rot90(r.bits)), f"seed {seed}"


def test_all_dihedral_symmetries_commute():
    rng = np.random.default_rng(3)
    pts = rng.uniform(size=(25, 2))
    pat = PointPattern(pts)
    e = knn_graph(pat, 3)
    base = rasterize_edges(pat, e, 2, (40, 40)).bits
    flipped = PointPattern(np.column_stack([1.0 - pts[:, 0], pts[:, 1]]))
    r_flip = rasterize_edges(flipped, e, 2, (40, 40)).bits
    assert np.array_equal(r_flip, base[:, ::-1])


def test_render_resizes_and_rebinarizes():
    rng = np.random.default_rng(1)
    pat = PointPattern(rng.uniform(size=(40, 2)))
    e = knn_graph(pat, 5)
    out = render_edges(pat, e, 1, native_size=(448, 448), out_size=(224, 224))
    assert out.bits.shape == (224, 224)
    assert set(np.unique(out.bits)) <= {0, 1}
    assert out.bits.sum() > 0


def test_render_identity_when_sizes_match():
    rng = np.random.default_rng(2)
    pat = PointPattern(rng.uniform(size=(20, 2)))
    e = knn_graph(pat, 3)
    native = rasterize_edges(pat, e, 1, (64, 64))
    out = render_edges(pat, e, 1, native_size=(64, 64), out_size=(64, 64))
    assert np.array_equal(native.bits, out.bits)


def test_resize_bilinear_constant_preserved():
    img = np.ones((16, 16))
    out = resize_bilinear(img, (7, 7))
    assert np.allclose(out, 1.0)


def test_resize_bilinear_matches_manual_2x_upsample():
    img = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = resize_bilinear(img, (4, 4))
    # corners replicate the source corners under the pixel-area convention
    assert out[0, 0] == 0.0 and out[0, 3] == 1.0
    assert np.allclose(out, out.T)


def test_pgm_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    bits = (rng.uniform(size=(13, 17)) > 0.5).astype(np.uint8)
    r = BinaryRaster(width=17, height=13, bits=bits)
    write_pgm(r, tmp_path / "a.pgm")
    back = read_pgm(tmp_path / "a.pgm")
    assert back.width == 17 and back.height == 13
    assert np.array_equal(back.bits, bits)


def test_packed_bits_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    bits = (rng.uniform(size=(21, 10)) > 0.3).astype(np.uint8)
    r = BinaryRaster(width=10, height=21, bits=bits)
    write_packed_bits(r, tmp_path / "a.bits")
    back = read_packed_bits(tmp_path / "a.bits")
    assert np.array_equal(back.bits, bits)


def test_packed_bits_truncated_errors(tmp_path):
    r = BinaryRaster(width=16, height=16, bits=np.ones((16, 16), dtype=np.uint8))
    write_packed_bits(r, tmp_path / "a.bits")
    blob = (tmp_path / "a.bits").read_bytes()
    (tmp_path / "bad.bits").write_bytes(blob[:-3])
    with pytest.raises(DataError):
        read_packed_bits(tmp_path / "bad.bits")


def test_pgm_bad_magic_errors(tmp_path):
    (tmp_path / "bad.pgm").write_bytes(b"P6\n2 2\n255\n\x00\x00\x00\x00")
    with pytest.raises(DataError):
        read_pgm(tmp_path / "bad.pgm")
