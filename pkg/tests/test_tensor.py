"""Typed tensors: dimensions, bases, vec/reshape, typed multiplication."""

from __future__ import annotations

import numpy as np
import pytest

from cajal import (
    BOOL, Tensor, add, approx_eq, basis, dim, matmul_typed, parse_type,
    reshape, scale, vec, zeros,
)


def t(src: str):
    return parse_type(src)


def test_dim():
    assert dim(t("2")) == 2
    assert dim(t("2 -o 2")) == 4
    assert dim(t("2 -o 2 -o 2")) == 8
    assert dim(t("(2 -o 2) -o 2")) == 8
    assert dim(t("(2 -o 2 -o 2) -o (2 -o 2 -o 2) -o 2")) == 8 * 16


def test_shapes_enforced():
    Tensor(t("2"), [[1.0], [0.0]])
    Tensor(t("2 -o 2"), [[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        Tensor(t("2"), [[1.0, 0.0]])
    with pytest.raises(ValueError):
        Tensor(t("2 -o 2"), [[1, 0, 0], [0, 1, 0]])


def test_basis_bool():
    b = basis(t("2"))
    assert [x.array.ravel().tolist() for x in b] == [[1, 0], [0, 1]]


def test_basis_arrow_column_major_single_entry():
    b = basis(t("2 -o 2"))
    assert [x.array.tolist() for x in b] == [
        [[1, 0], [0, 0]],
        [[0, 0], [1, 0]],
        [[0, 1], [0, 0]],
        [[0, 0], [0, 1]],
    ]


def test_basis_length_matches_dim():
    assert len(basis(t("2 -o 2 -o 2"))) == 8


def test_vec_identity_matrix():
    m = Tensor(t("2 -o 2"), [[1, 0], [0, 1]])
    assert vec(m).tolist() == [1, 0, 0, 1]


def test_vec_formula_on_rectangular_array():
    # Column-major flatten applied to a plain 2x3 array-like.
    assert vec([[2, 4, 0], [0, 0, 1]]).tolist() == [2, 0, 4, 0, 0, 1]


def test_vec_passes_vectors_through():
    v = Tensor(t("2"), [[5.0], [0.0]])
    assert vec(v).tolist() == [5.0, 0.0]


def test_reshape_examples():
    m = reshape([1, 0, 0, 1], t("2 -o 2"))
    assert m.array.tolist() == [[1, 0], [0, 1]]
    v = reshape([1, 0], t("2"))
    assert v.array.tolist() == [[1], [0]]
    with pytest.raises(ValueError):
        reshape([1, 0, 0], t("2 -o 2"))


def test_reshape_vec_round_trip():
    rng = np.random.default_rng(5)
    for src in ("2", "2 -o 2", "2 -o 2 -o 2", "(2 -o 2) -o 2"):
        ty = t(src)
        flat = rng.normal(size=dim(ty))
        m = reshape(flat, ty)
        assert np.array_equal(vec(m), flat)
        assert reshape(vec(m), ty) == m


def test_matmul_typed_identity():
    f = Tensor(t("2 -o 2"), [[1, 0], [0, 1]])
    a = Tensor(t("2"), [[1.0], [0.0]])
    assert matmul_typed(f, a).array.tolist() == [[1.0], [0.0]]


def test_matmul_typed_recovers_matrix_from_hypermatrix():
    # Both columns vec the identity: partially applying a function whose
    # branches agree yields the identity on the remaining argument.
    f = Tensor(t("2 -o 2 -o 2"), [[1, 1], [0, 0], [0, 0], [1, 1]])
    for col in ([[1.0], [0.0]], [[0.0], [1.0]]):
        out = matmul_typed(f, Tensor(t("2"), col))
        assert out.cajal_type == t("2 -o 2")
        assert out.array.tolist() == [[1.0, 0.0], [0.0, 1.0]]


def test_matmul_typed_zero():
    z = zeros(t("2 -o 2"))
    a = Tensor(t("2"), [[0.3], [0.7]])
    assert matmul_typed(z, a).array.tolist() == [[0.0], [0.0]]


def test_matmul_typed_type_errors():
    f = Tensor(t("2 -o 2"), [[1, 0], [0, 1]])
    with pytest.raises(TypeError):
        matmul_typed(f, zeros(t("2 -o 2")))
    with pytest.raises(TypeError):
        matmul_typed(zeros(t("2")), zeros(t("2")))


def test_matmul_typed_is_linear_in_argument():
    rng = np.random.default_rng(7)
    ty_f, ty_a = t("(2 -o 2) -o 2 -o 2"), t("2 -o 2")
    f = reshape(rng.normal(size=dim(ty_f)), ty_f)
    a = reshape(rng.normal(size=dim(ty_a)), ty_a)
    b = reshape(rng.normal(size=dim(ty_a)), ty_a)
    lhs = matmul_typed(f, add(scale(2.5, a), scale(-1.5, b)))
    rhs = add(scale(2.5, matmul_typed(f, a)), scale(-1.5, matmul_typed(f, b)))
    assert approx_eq(lhs, rhs, 1e-12)


def test_basis_vecs_to_standard_basis():
    for src in ("2", "2 -o 2", "2 -o 2 -o 2"):
        ty = t(src)
        mat = np.column_stack([vec(b) for b in basis(ty)])
        assert np.array_equal(mat, np.eye(dim(ty)))


def test_add_scale_approx_eq():
    a = Tensor(t("2"), [[1.0], [0.0]])
    b = Tensor(t("2"), [[0.0], [1.0]])
    assert add(a, b).array.tolist() == [[1.0], [1.0]]
    m = Tensor(t("2 -o 2"), [[1, 1], [0, 0]])
    assert scale(2.0, m).array.tolist() == [[2.0, 2.0], [0.0, 0.0]]
    assert approx_eq(a, Tensor(t("2"), [[1.0], [1e-12]]), 1e-9)
    assert not approx_eq(a, b, 1e-9)
    assert not approx_eq(a, m, 1.0)
    with pytest.raises(TypeError):
        add(a, m)


def test_tensor_immutable():
    a = Tensor(t("2"), [[1.0], [0.0]])
    with pytest.raises(AttributeError):
        a.array = None
    with pytest.raises(ValueError):
        a.array[0, 0] = 5.0


def test_json_round_trip_and_stability():
    m = Tensor(t("2 -o 2"), [[1, 0], [0, 1]])
    payload = m.to_json()
    assert payload == ('{"type": "2 -o 2", "shape": [2, 2], '
                       '"data_row_major": [[1.0, 0.0], [0.0, 1.0]]}')
    assert Tensor.from_json(payload) == m
    assert m.to_json() == payload


def test_json_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        Tensor.from_json('{"type": "2", "shape": [4, 1], '
                         '"data_row_major": [[1.0], [0.0]]}')
