"""Executable property suites for the compiler's metatheory.

Each suite generates random well-typed programs and checks one claim:
behavior preservation (evaluating then compiling equals compiling),
linearity in the environment, invariance to closing environments, and
termination of evaluation. Failures are recorded with enough detail to
replay from the per-case seed.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

import numpy as np

from .compile import compile_closed, compile_env, compile_expr
from .evaluate import EvalError, apply_env, evaluate
from .generate import GenConfig, gen_context, gen_program, gen_source_env, gen_type
from .syntax import BOOL, Context, FF, TT, is_value
from .tensor import Tensor, add, approx_eq, scale, shape_of
from .typecheck import typecheck
from .parser import parse_type  # noqa: F401  (re-exported for replay scripts)
from .syntax import pretty


@dataclass
class Failure:
    case_seed: int
    program: str
    env: str
    expected: str
    got: str


@dataclass
class PropertyReport:
    name: str
    cases: int = 0
    failures: list[Failure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def record(self, case_seed: int, program: str, env: str,
               expected: str, got: str) -> None:
        self.failures.append(Failure(case_seed, program, env, expected, got))

    def to_json(self) -> str:
        return json.dumps({
            "property": self.name,
            "cases": self.cases,
            "failures": [vars(f) for f in self.failures],
        }, separators=(", ", ": "))

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.failures)} FAILURES"
        return f"{self.name}: {self.cases} cases, {status}"


def _case_seed(cfg: GenConfig, i: int) -> int:
    return (cfg.seed * 1_000_003 + i) % (2 ** 32)


def check_behavior_preservation(cfg: GenConfig) -> PropertyReport:
    """Closed e : t evaluates to v with compile(e) == compile(v) exactly;
    at type 2 the compilation also differs from the other boolean's."""
    report = PropertyReport("behavior_preservation")
    for i in range(cfg.count):
        seed = _case_seed(cfg, i)
        rng = random.Random(seed)
        target = gen_type(rng, cfg.type_weights, depth=2)
        e = gen_program(GenConfig(seed, cfg.max_depth, cfg.type_weights, 1),
                        Context(), target)
        report.cases += 1
        v = evaluate(e)
        ce = compile_closed(e)
        cv = compile_closed(v)
        if not approx_eq(ce, cv, 1e-9):
            report.record(seed, pretty(e), "", f"compile(v) = {cv!r}", f"{ce!r}")
            continue
        if target == BOOL:
            other = FF() if isinstance(v, TT) else TT()
            co = compile_closed(other)
            if approx_eq(ce, co, 1e-9):
                report.record(seed, pretty(e), "",
                              f"distinct from {co!r}", f"{ce!r}")
    return report


def _random_tensor(np_rng: np.random.Generator, t) -> Tensor:
    return Tensor(t, np_rng.uniform(-1.0, 1.0, size=shape_of(t)))


def check_linearity(cfg: GenConfig) -> PropertyReport:
    """compile is linear in each environment entry: random alpha in
    [-10, 10] and conforming tensors satisfy the combination identity."""
    report = PropertyReport("linearity")
    for i in range(cfg.count):
        seed = _case_seed(cfg, i)
        rng = random.Random(seed)
        np_rng = np.random.default_rng(seed)
        var_type = gen_type(rng, cfg.type_weights, depth=1)
        target = gen_type(rng, cfg.type_weights, depth=1)
        ctx = Context([("x", var_type)])
        e = gen_program(GenConfig(seed, cfg.max_depth, cfg.type_weights, 1),
                        ctx, target)
        report.cases += 1
        v1 = _random_tensor(np_rng, var_type)
        v2 = _random_tensor(np_rng, var_type)
        a1, a2 = np_rng.uniform(-10.0, 10.0, size=2)
        combined = add(scale(a1, v1), scale(a2, v2))
        lhs = compile_expr(ctx, e, {"x": combined})
        rhs = add(scale(a1, compile_expr(ctx, e, {"x": v1})),
                  scale(a2, compile_expr(ctx, e, {"x": v2})))
        if not approx_eq(lhs, rhs, 1e-6):
            report.record(seed, pretty(e),
                          f"x := {a1}*{v1!r} + {a2}*{v2!r}",
                          f"{rhs!r}", f"{lhs!r}")
    return report


def check_closing_invariance(cfg: GenConfig) -> PropertyReport:
    """Substituting a source environment then compiling equals compiling
    under the pointwise-compiled environment."""
    report = PropertyReport("closing_invariance")
    for i in range(cfg.count):
        seed = _case_seed(cfg, i)
        rng = random.Random(seed)
        ctx = gen_context(rng, cfg.type_weights, max_vars=3)
        target = gen_type(rng, cfg.type_weights, depth=1)
        e = gen_program(GenConfig(seed, cfg.max_depth, cfg.type_weights, 1),
                        ctx, target)
        report.cases += 1
        src = gen_source_env(rng, GenConfig(seed, 3, cfg.type_weights, 1), ctx)
        closed = apply_env(e, src) if src else e
        lhs = compile_closed(closed)
        rhs = compile_expr(ctx, e, compile_env(ctx, src))
        if not approx_eq(lhs, rhs, 1e-9):
            env_text = ", ".join(f"{x} := {pretty(v)}" for x, v in src.items())
            report.record(seed, pretty(e), env_text, f"{rhs!r}", f"{lhs!r}")
    return report


def check_termination(cfg: GenConfig) -> PropertyReport:
    """Every generated program evaluates to a value within the fuel budget
    under every generated conforming source environment."""
    report = PropertyReport("termination")
    for i in range(cfg.count):
        seed = _case_seed(cfg, i)
        rng = random.Random(seed)
        ctx = gen_context(rng, cfg.type_weights, max_vars=3)
        target = gen_type(rng, cfg.type_weights, depth=2)
        e = gen_program(GenConfig(seed, cfg.max_depth, cfg.type_weights, 1),
                        ctx, target)
        report.cases += 1
        src = gen_source_env(rng, GenConfig(seed, 3, cfg.type_weights, 1), ctx)
        try:
            v = evaluate(e, src)
        except EvalError as err:
            env_text = ", ".join(f"{x} := {pretty(w)}" for x, w in src.items())
            report.record(seed, pretty(e), env_text, "a value", str(err))
            continue
        if not is_value(v):
            report.record(seed, pretty(e), "", "a value", pretty(v))
    return report


SUITES = {
    "behavior": check_behavior_preservation,
    "linearity": check_linearity,
    "closing": check_closing_invariance,
    "termination": check_termination,
}


def run_suite(name: str, cfg: GenConfig) -> PropertyReport:
    return SUITES[name](cfg)
