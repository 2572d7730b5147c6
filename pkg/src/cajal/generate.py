"""Random generation of well-typed programs, values, and environments.

Generation is type-directed: each call owns a context that the produced
subterm must consume exactly. Applications and conditionals partition
their context randomly between premises; conditional branches receive
the identical share. When random productions fail to apply, a canonical
inhabitant is constructed instead, so generation as a whole never fails.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .syntax import (
    App, BOOL, Bool, Context, Expr, FF, If, Lam, Lolli, TT, Type, Var, freshen,
)


@dataclass
class GenConfig:
    seed: int = 0
    max_depth: int = 8
    type_weights: dict[str, float] = field(
        default_factory=lambda: {"Bool": 0.7, "Lolli": 0.3})
    count: int = 1000

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        total = sum(self.type_weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"type_weights must sum to 1, got {total}")


def gen_type(rng: random.Random, weights: dict[str, float], depth: int = 2) -> Type:
    """Random type; arrow probability taken from weights, depth-bounded."""
    if depth <= 0 or rng.random() < weights.get("Bool", 0.7):
        return BOOL
    return Lolli(gen_type(rng, weights, depth - 1),
                 gen_type(rng, weights, depth - 1))


def gen_context(rng: random.Random, weights: dict[str, float],
                max_vars: int = 3) -> Context:
    n = rng.randint(0, max_vars)
    return Context([(f"v{i}", gen_type(rng, weights, depth=1))
                    for i in range(n)])


# -- canonical inhabitants -------------------------------------------------

def _consume(e: Expr, t: Type, target: Type) -> Expr:
    """An expression of type target whose usage equals e's, for e : t."""
    if t == target:
        return e
    match t:
        case Bool():
            return If(e, _canonical_closed(target), _canonical_closed(target))
        case Lolli(domain, codomain):
            return _consume(App(e, _canonical_closed(domain)), codomain, target)
    raise AssertionError(f"unknown type {t!r}")


def _canonical_closed(t: Type) -> Expr:
    match t:
        case Bool():
            return TT()
        case Lolli(domain, codomain):
            return Lam("c", domain, _consume(Var("c"), domain, codomain))
    raise AssertionError(f"unknown type {t!r}")


def canonical(ctx: Context, target: Type) -> Expr:
    """A linear inhabitant of target consuming ctx exactly; always exists."""
    bindings = list(ctx)
    if not bindings:
        return _canonical_closed(target)
    (x, t), rest = bindings[0], Context(bindings[1:])
    if not rest.bindings and t == target:
        return Var(x)
    shared = canonical(rest, target)
    return If(_consume(Var(x), t, BOOL), shared, shared)


# -- random generation -----------------------------------------------------

_RETRIES = 4


def _split(rng: random.Random, bindings: list) -> tuple[list, list]:
    left, right = [], []
    for b in bindings:
        (left if rng.random() < 0.5 else right).append(b)
    return left, right


def _gen(rng: random.Random, cfg: GenConfig, ctx: Context, target: Type,
         depth: int, counter: list[int]) -> Expr:
    bindings = list(ctx)
    if depth <= 0:
        return canonical(ctx, target)

    choices = ["if", "app"]
    if isinstance(target, Lolli):
        choices += ["lam", "lam", "lam"]
    if len(bindings) == 1 and bindings[0][1] == target:
        choices += ["var", "var"]
    if not bindings and target == BOOL:
        choices += ["lit", "lit", "lit"]

    for _ in range(_RETRIES):
        kind = rng.choice(choices)
        if kind == "var":
            return Var(bindings[0][0])
        if kind == "lit":
            return TT() if rng.random() < 0.5 else FF()
        if kind == "lam":
            assert isinstance(target, Lolli)
            counter[0] += 1
            x = f"x{counter[0]}"
            inner = Context(bindings + [(x, target.domain)])
            body = _gen(rng, cfg, inner, target.codomain, depth - 1, counter)
            return Lam(x, target.domain, body)
        if kind == "app":
            arg_type = gen_type(rng, cfg.type_weights, depth=1)
            c1, c2 = _split(rng, bindings)
            fn = _gen(rng, cfg, Context(c1), Lolli(arg_type, target),
                      depth - 1, counter)
            arg = _gen(rng, cfg, Context(c2), arg_type, depth - 1, counter)
            return App(fn, arg)
        if kind == "if":
            c1, c2 = _split(rng, bindings)
            cond = _gen(rng, cfg, Context(c1), BOOL, depth - 1, counter)
            then_branch = _gen(rng, cfg, Context(c2), target, depth - 1, counter)
            else_branch = _gen(rng, cfg, Context(c2), target, depth - 1, counter)
            return If(cond, then_branch, else_branch)
    return canonical(ctx, target)


def gen_program(cfg: GenConfig, ctx: Context, target: Type) -> Expr:
    """Generate e with ctx |- e : target; the result is freshened."""
    rng = random.Random(cfg.seed)
    counter = [0]
    e = _gen(rng, cfg, ctx, target, cfg.max_depth, counter)
    return freshen(e)


def gen_value(rng: random.Random, cfg: GenConfig, t: Type, depth: int = 3) -> Expr:
    """Random closed value of type t (a literal for 2, a lambda for arrows)."""
    match t:
        case Bool():
            return TT() if rng.random() < 0.5 else FF()
        case Lolli(domain, codomain):
            body_cfg = GenConfig(seed=rng.randrange(2 ** 32),
                                 max_depth=depth, type_weights=cfg.type_weights)
            body = _gen(random.Random(body_cfg.seed), body_cfg,
                        Context([("a", domain)]), codomain, depth, [0])
            return freshen(Lam("a", domain, body))
    raise AssertionError(f"unknown type {t!r}")


def gen_source_env(rng: random.Random, cfg: GenConfig, ctx: Context) -> dict[str, Expr]:
    """Random closed values conforming to ctx."""
    return {x: gen_value(rng, cfg, t) for x, t in ctx}
