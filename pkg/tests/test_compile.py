"""Compiler: golden matrices, mode semantics, environment discipline."""

from __future__ import annotations

import numpy as np
import pytest

from cajal import (
    BOOL, CORRECT, HARD_BRANCH, CompileError, Context, Tensor,
    TypePreservingRandom, compile_closed, compile_env, compile_expr, dim,
    parse_expr, parse_type, typecheck, vec,
)
from cajal.compile import compile as compile_derivation


def closed(src: str) -> np.ndarray:
    return compile_closed(parse_expr(src)).array


def test_literals():
    assert closed("tt").tolist() == [[1.0], [0.0]]
    assert closed("ff").tolist() == [[0.0], [1.0]]


def test_identity_matrix():
    assert closed("\\x:2. x").tolist() == [[1, 0], [0, 1]]


def test_constant_true_matrix():
    assert closed("\\x:2. if x then tt else tt").tolist() == [[1, 1], [0, 0]]


def test_two_argument_second_projection_matrix():
    m = closed("\\x:2. \\y:2. if x then y else y")
    assert m.tolist() == [[1, 1], [0, 0], [0, 0], [1, 1]]


def test_two_argument_first_projection_matrix():
    m = closed("\\x:2. \\y:2. if y then x else x")
    assert m.tolist() == [[1, 0], [0, 1], [1, 0], [0, 1]]


def test_negation_matrix():
    assert closed("\\x:2. if x then ff else tt").tolist() == [[0, 1], [1, 0]]


def test_application_is_matrix_vector_product():
    assert closed("(\\x:2. if x then ff else tt) tt").tolist() == [[0.0], [1.0]]
    assert closed("(\\x:2. x) ff").tolist() == [[0.0], [1.0]]


def test_free_variable_reads_environment():
    ctx = Context([("x", BOOL)])
    v = Tensor(BOOL, [[0.25], [0.75]])
    out = compile_expr(ctx, parse_expr("x"), {"x": v})
    assert out == v


def test_soft_branch_mixes_branches():
    # if x then tt else ff is the identity map on the condition vector.
    ctx = Context([("x", BOOL)])
    e = parse_expr("if x then tt else ff")
    out = compile_expr(ctx, e, {"x": Tensor(BOOL, [[0.3], [0.7]])})
    assert np.allclose(out.array, [[0.3], [0.7]], atol=1e-12)


def test_equality_body_is_the_expected_bilinear_form():
    src = "if x then (if y then tt else ff) else (if y then ff else tt)"
    ctx = Context([("x", BOOL), ("y", BOOL)])
    e = parse_expr(src)
    rng = np.random.default_rng(11)
    for _ in range(20):
        a1, a2, b1, b2 = rng.normal(size=4)
        out = compile_expr(ctx, e, {
            "x": Tensor(BOOL, [[a1], [a2]]),
            "y": Tensor(BOOL, [[b1], [b2]]),
        })
        expect = [[a1 * b1 + a2 * b2], [a1 * b2 + a2 * b1]]
        assert np.allclose(out.array, expect, atol=1e-12)


def test_lambda_columns_are_body_outputs_on_basis():
    d = typecheck(Context(), parse_expr("\\f:2 -o 2. f tt"))
    m = compile_derivation(d)
    # Column j is vec of the body's output on the j-th basis matrix, and
    # applying a basis matrix to tt selects that matrix's first column.
    assert m.array.tolist() == [[1, 0, 0, 0], [0, 1, 0, 0]]


def test_env_missing():
    ctx = Context([("x", BOOL)])
    with pytest.raises(CompileError) as exc:
        compile_expr(ctx, parse_expr("x"), {})
    assert exc.value.kind == "EnvMissing"
    assert exc.value.var == "x"


def test_env_type_mismatch():
    ctx = Context([("x", parse_type("2 -o 2"))])
    with pytest.raises(CompileError) as exc:
        compile_expr(ctx, parse_expr("x tt"), {"x": Tensor(BOOL, [[1.0], [0.0]])})
    assert exc.value.kind == "EnvTypeMismatch"


def test_env_extras_ignored():
    out = compile_expr(Context(), parse_expr("tt"),
                       {"junk": Tensor(BOOL, [[9.0], [9.0]])})
    assert out.array.tolist() == [[1.0], [0.0]]


def test_hard_branch_on_basis_conditions_matches_correct():
    for src in ("if tt then ff else tt", "if ff then ff else tt",
                "\\x:2. if x then ff else tt"):
        e = parse_expr(src)
        assert compile_closed(e, HARD_BRANCH) == compile_closed(e, CORRECT)


def test_hard_branch_takes_else_unless_alpha1_is_one():
    ctx = Context([("x", BOOL)])
    e = parse_expr("if x then tt else ff")
    env = {"x": Tensor(BOOL, [[0.999], [0.001]])}
    out = compile_expr(ctx, e, env, HARD_BRANCH)
    assert out.array.tolist() == [[0.0], [1.0]]
    env = {"x": Tensor(BOOL, [[1.0], [0.0]])}
    out = compile_expr(ctx, e, env, HARD_BRANCH)
    assert out.array.tolist() == [[1.0], [0.0]]


def test_modes_agree_when_no_conditional():
    for src in ("tt", "\\x:2. x", "(\\x:2 -o 2. x tt) (\\y:2. y)"):
        e = parse_expr(src)
        correct = compile_closed(e, CORRECT)
        assert compile_closed(e, HARD_BRANCH) == correct
        mode = TypePreservingRandom(seed=3)
        assert compile_closed(e, mode) == correct
        assert mode.sampled_maps == []


def test_random_mode_is_deterministic_per_seed():
    e = parse_expr("\\x:2. if x then ff else tt")
    a = compile_closed(e, TypePreservingRandom(seed=17))
    b = compile_closed(e, TypePreservingRandom(seed=17))
    c = compile_closed(e, TypePreservingRandom(seed=18))
    assert a == b
    assert a != c


def test_random_mode_records_one_map_per_conditional():
    e = parse_expr("\\x:2. \\y:2. if x then (if y then tt else ff) "
                   "else (if y then ff else tt)")
    mode = TypePreservingRandom(seed=0)
    compile_closed(e, mode)
    # The nested lambdas probe 2x2 basis pairs; each probe compiles the
    # outer conditional and both inner ones, so 4 * 3 maps are sampled.
    assert len(mode.sampled_maps) == 12
    assert all(r.shape == (2, 8) for r in mode.sampled_maps)


def test_random_mode_output_shape_is_type_shape():
    e = parse_expr("\\x:2. if x then (\\y:2. y) else (\\y:2. y)")
    out = compile_closed(e, TypePreservingRandom(seed=9))
    assert out.cajal_type == parse_type("2 -o 2 -o 2")
    assert out.shape == (4, 2)


def test_random_mode_conditional_is_linear_in_condition():
    # With branches held fixed, the sampled map sees kron(cond, branches),
    # which is linear in the condition vector.
    ctx = Context([("x", BOOL)])
    e = parse_expr("if x then tt else ff")

    def run(c1, c2):
        env = {"x": Tensor(BOOL, [[c1], [c2]])}
        return compile_expr(ctx, e, env, TypePreservingRandom(seed=4)).array

    lhs = run(0.2 + 0.5, 0.4 - 0.1)
    rhs = run(0.2, 0.4) + run(0.5, -0.1)
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_compile_env_maps_values_at_declared_types():
    ctx = Context([("b", BOOL), ("f", parse_type("2 -o 2"))])
    src = {"b": parse_expr("ff"), "f": parse_expr("\\x:2. x")}
    env = compile_env(ctx, src)
    assert env["b"].array.tolist() == [[0.0], [1.0]]
    assert env["f"].array.tolist() == [[1, 0], [0, 1]]


def test_compile_env_rejections():
    ctx = Context([("b", BOOL)])
    with pytest.raises(CompileError) as exc:
        compile_env(ctx, {})
    assert exc.value.kind == "EnvMissing"
    with pytest.raises(CompileError) as exc:
        compile_env(ctx, {"b": parse_expr("(\\x:2. x) tt")})
    assert exc.value.kind == "EnvTypeMismatch"
    with pytest.raises(CompileError) as exc:
        compile_env(ctx, {"b": parse_expr("\\x:2. x")})
    assert exc.value.kind == "EnvTypeMismatch"


def test_church_coded_connectives_are_16_by_8():
    from cajal.experiments import Task
    for kind in ("EQ", "XOR", "AND", "OR"):
        m = compile_closed(Task(kind).church)
        assert m.shape == (16, 8)
        assert dim(m.cajal_type.domain) == 8


def test_vec_of_literal_compiles():
    assert vec(compile_closed(parse_expr("tt"))).tolist() == [1.0, 0.0]
