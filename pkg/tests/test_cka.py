import numpy as np
import pytest

from netsim.cka import (center_columns, flatten_layer, layer_similarity_matrix,
                        linear_cka, read_similarity_csv, write_similarity_csv)
from netsim.errors import DataError, DegenerateActivationsError, ShapeError

from conftest import make_set


def gram_cka_oracle(x, y):
    """Independent route: raw linear Gram matrices, explicit double centering,
    normalized HSIC."""
    n = x.shape[0]
    h = np.eye(n) - np.ones((n, n)) / n
    k = h @ (x @ x.T) @ h
    l = h @ (y @ y.T) @ h
    hsic_xy = np.sum(k * l)
    hsic_xx = np.sum(k * k)
    hsic_yy = np.sum(l * l)
    return hsic_xy / np.sqrt(hsic_xx * hsic_yy)


def test_center_columns():
    x = np.array([[1.0, 1.0, 5.0], [-1.0, 2.0, 5.0], [0.0, 3.0, 5.0]])
    c = center_columns(x)
    np.testing.assert_allclose(c.sum(axis=0), 0.0, atol=1e-9 * x.shape[0])
    np.testing.assert_array_equal(c[:, 0], [1.0, -1.0, 0.0])   # already centered
    np.testing.assert_array_equal(c[:, 1], [-1.0, 0.0, 1.0])   # mean subtraction
    np.testing.assert_array_equal(c[:, 2], [0.0, 0.0, 0.0])    # constant column


def test_self_similarity_is_exactly_one(rng):
    for _ in range(20):
        x = rng.normal(size=(rng.integers(2, 30), rng.integers(1, 10)))
        assert abs(linear_cka(x, x) - 1.0) < 1e-10


def test_symmetry_is_exact(rng):
    for _ in range(50):
        rows = int(rng.integers(4, 32))
        x = rng.normal(size=(rows, int(rng.integers(1, 12))))
        y = rng.normal(size=(rows, int(rng.integers(1, 12))))
        assert linear_cka(x, y) == linear_cka(y, x)


def test_symmetry_exact_on_equal_shapes(rng):
    for _ in range(20):
        x = rng.normal(size=(10, 6))
        y = rng.normal(size=(10, 6))
        assert linear_cka(x, y) == linear_cka(y, x)


def test_orthogonal_and_scaling_invariance(rng):
    for _ in range(10):
        x = rng.normal(size=(20, 7))
        q, _ = np.linalg.qr(rng.normal(size=(7, 7)))
        assert abs(linear_cka(x, 3.7 * (x @ q)) - 1.0) < 1e-8
        y = rng.normal(size=(20, 4))
        assert abs(linear_cka(x, -2.5 * y) - linear_cka(x, y)) < 1e-10


def test_matches_gram_hsic_oracle(rng):
    for _ in range(30):
        x = rng.normal(size=(8, 3))
        y = rng.normal(size=(8, 5))
        assert abs(linear_cka(x, y) - gram_cka_oracle(x, y)) < 1e-10


def test_range(rng):
    for _ in range(30):
        x = rng.normal(size=(12, 5))
        y = rng.normal(size=(12, 5))
        v = linear_cka(x, y)
        assert 0.0 <= v <= 1.0 + 1e-9


def test_degenerate_inputs_raise(rng):
    x = rng.normal(size=(6, 3))
    constant = np.full((6, 2), 3.14)
    with pytest.raises(DegenerateActivationsError):
        linear_cka(x, constant)
    with pytest.raises(DegenerateActivationsError):
        linear_cka(constant, x)


def test_row_count_mismatch(rng):
    with pytest.raises(ShapeError):
        linear_cka(rng.normal(size=(6, 3)), rng.normal(size=(7, 3)))


def test_flatten_modes():
    block = np.array([[[[1.0, 2.0], [3.0, 4.0]]],
                      [[[5.0, 6.0], [7.0, 8.0]]]])  # 2 examples, 1x2x2
    flat = flatten_layer(block, "flatten")
    np.testing.assert_array_equal(flat, [[1, 2, 3, 4], [5, 6, 7, 8]])
    mean = flatten_layer(block, "spatial_mean")
    np.testing.assert_array_equal(mean, [[2.5], [6.5]])
    already = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(flatten_layer(already, "flatten"), already)
    np.testing.assert_array_equal(flatten_layer(already, "spatial_mean"), already)


def test_flatten_errors():
    with pytest.raises(ShapeError):
        flatten_layer(np.zeros((2, 0, 2, 2)), "flatten")
    with pytest.raises(ShapeError):
        flatten_layer(np.zeros((1, 2)), "flatten")
    with pytest.raises(ShapeError):
        flatten_layer(np.zeros((2, 2, 2)), "flatten")
    with pytest.raises(ValueError):
        flatten_layer(np.zeros((2, 2)), "max_pool")


def test_layer_matrix_self_pair_diagonal():
    a = make_set("a", [3, 5, 2], rows=12, seed=3)
    s = layer_similarity_matrix(a, a)
    np.testing.assert_allclose(np.diag(s.values), 1.0, atol=1e-10)
    assert s.degenerate_pairs == 0


def test_layer_matrix_matches_per_entry_oracle():
    a = make_set("a", [3, 4], rows=10, seed=5)
    b = make_set("b", [2, 5, 3], rows=10, seed=6)
    s = layer_similarity_matrix(a, b)
    assert (s.n, s.m) == (2, 3)
    for i in range(2):
        for j in range(3):
            want = gram_cka_oracle(a.matrices[i], b.matrices[j])
            assert abs(s.values[i, j] - want) < 1e-10


def test_layer_matrix_transpose_symmetry():
    a = make_set("a", [3, 4, 6], rows=14, seed=8)
    b = make_set("b", [2, 5], rows=14, seed=9)
    s_ab = layer_similarity_matrix(a, b)
    s_ba = layer_similarity_matrix(b, a)
    np.testing.assert_allclose(s_ab.values, s_ba.values.T, atol=1e-12, rtol=0)


def test_layer_matrix_counts_degenerate_pairs():
    a = make_set("a", [3, 2], rows=10, seed=11)
    b = make_set("b", [4], rows=10, seed=12)
    a.matrices[1] = np.full((10, 2), 7.0)  # constant layer
    s = layer_similarity_matrix(a, b)
    assert s.degenerate_pairs == 1
    assert s.values[1, 0] == 0.0


def test_layer_matrix_example_count_mismatch():
    a = make_set("a", [3], rows=10, seed=1)
    b = make_set("b", [3], rows=11, seed=2)
    with pytest.raises(DataError):
        layer_similarity_matrix(a, b)


def test_matrix_csv_round_trip(tmp_path):
    a = make_set("a", [3, 4], rows=10, seed=5)
    b = make_set("b", [2, 5, 3], rows=10, seed=6)
    s = layer_similarity_matrix(a, b)
    write_similarity_csv(s, tmp_path / "s.csv")
    back = read_similarity_csv(tmp_path / "s.csv", "a", "b")
    np.testing.assert_array_equal(back.values, s.values)
