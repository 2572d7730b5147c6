"""Structural helpers: free variables, freshening, pretty-printing."""

from __future__ import annotations

import hypothesis as hyp
from hypothesis import strategies as st

from cajal import (
    App, BOOL, FF, If, Lam, Lolli, TT, Var, alpha_eq, free_vars, freshen,
    parse_expr, pretty,
)

names = st.sampled_from(["x", "y", "z", "w"])
types = st.recursive(st.just(BOOL),
                     lambda t: st.builds(Lolli, t, t), max_leaves=4)
exprs = st.recursive(
    st.one_of(st.builds(Var, names), st.just(TT()), st.just(FF())),
    lambda e: st.one_of(
        st.builds(If, e, e, e),
        st.builds(Lam, names, types, e),
        st.builds(App, e, e),
    ),
    max_leaves=25,
)


def test_free_vars_examples():
    assert free_vars(parse_expr("\\x:2. x")) == set()
    assert free_vars(parse_expr("if x then tt else ff")) == {"x"}
    assert free_vars(parse_expr("\\x:2. if x then y else y")) == {"y"}
    assert free_vars(App(Var("f"), Var("f"))) == {"f"}


def test_free_vars_matches_name_collector():
    # Independent oracle: collect all variable occurrences minus all
    # binder names. Valid only for terms whose binders are all distinct
    # from each other and from free names, so freshen first.
    def occurrences(e):
        match e:
            case Var(name):
                return {name}
            case TT() | FF():
                return set()
            case If(c, t, f):
                return occurrences(c) | occurrences(t) | occurrences(f)
            case Lam(_, _, body):
                return occurrences(body)
            case App(fn, arg):
                return occurrences(fn) | occurrences(arg)

    def binders(e):
        match e:
            case If(c, t, f):
                return binders(c) | binders(t) | binders(f)
            case Lam(b, _, body):
                return {b} | binders(body)
            case App(fn, arg):
                return binders(fn) | binders(arg)
            case _:
                return set()

    @hyp.given(exprs)
    @hyp.settings(max_examples=200, deadline=None)
    def run(e):
        f = freshen(e)
        assert free_vars(f) == occurrences(f) - binders(f)

    run()


def test_freshen_shadowing():
    e = Lam("x", BOOL, Lam("x", BOOL, Var("x")))
    f = freshen(e)
    assert isinstance(f, Lam) and isinstance(f.body, Lam)
    assert f.binder != f.body.binder
    assert f.body.body == Var(f.body.binder)
    assert alpha_eq(e, f)


def test_freshen_already_fresh_is_identity():
    e = parse_expr("\\x:2. x")
    assert freshen(e) == e


def test_freshen_separates_duplicate_binders():
    e = App(Lam("x", BOOL, Var("x")), Lam("x", BOOL, Var("x")))
    f = freshen(e)
    assert f.fn.binder != f.arg.binder
    assert alpha_eq(e, f)


@hyp.given(exprs)
@hyp.settings(max_examples=300, deadline=None)
def test_freshen_alpha_equivalent_and_idempotent(e):
    f = freshen(e)
    assert alpha_eq(e, f)
    assert freshen(f) == f


@hyp.given(exprs)
@hyp.settings(max_examples=300, deadline=None)
def test_freshen_preserves_free_vars(e):
    assert free_vars(freshen(e)) == free_vars(e)


@hyp.given(exprs)
@hyp.settings(max_examples=300, deadline=None)
def test_freshen_makes_binders_distinct(e):
    seen = []

    def collect(e):
        match e:
            case If(c, t, f):
                collect(c), collect(t), collect(f)
            case Lam(b, _, body):
                seen.append(b)
                collect(body)
            case App(fn, arg):
                collect(fn), collect(arg)
            case _:
                pass

    f = freshen(e)
    collect(f)
    assert len(seen) == len(set(seen))
    assert not (set(seen) & free_vars(f))


def test_pretty_examples():
    assert pretty(TT()) == "tt"
    assert pretty(Lam("x", BOOL, Var("x"))) == "\\x:2. x"
    assert pretty(App(App(Var("f"), Var("a")), Var("b"))) == "f a b"
    assert pretty(App(Var("f"), App(Var("a"), Var("b")))) == "f (a b)"


@hyp.given(exprs)
@hyp.settings(max_examples=300, deadline=None)
def test_parse_pretty_round_trip(e):
    f = freshen(e)
    assert parse_expr(pretty(f)) == f
