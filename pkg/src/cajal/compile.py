"""Compile typing derivations to tensors.

Rules (mode=Correct):
  variables look up the environment; tt and ff become the standard basis
  of R^2; a lambda probes its body on each basis vector of the domain and
  packs the vec'd outputs as matrix columns; application is typed
  matrix-vector multiplication; a conditional is the soft branch
  alpha1 * then + alpha2 * else.

HardBranch replaces the conditional by a discrete switch on alpha1 == 1;
TypePreservingRandom replaces it by a randomly initialized linear map
applied to the tensor product of the condition with both branch outputs.
Both weaker modes leave every other rule untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .evaluate import SourceEnv
from .syntax import BOOL, Context, Expr, Lam, Type, is_value
from .tensor import Tensor, TargetEnv, add, basis, dim, matmul_typed, reshape, scale, vec
from .typecheck import Derivation, TypeCheckError, typecheck


class CompileError(Exception):
    """kind is EnvTypeMismatch or EnvMissing; var names the binding."""

    def __init__(self, kind: str, var: str, detail: str = ""):
        self.kind = kind
        self.var = var
        msg = f"{kind}: {var}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class CompileMode:
    """Base marker; see Correct, HardBranch, TypePreservingRandom."""
    __slots__ = ()


@dataclass(frozen=True)
class Correct(CompileMode):
    __slots__ = ()


@dataclass(frozen=True)
class HardBranch(CompileMode):
    __slots__ = ()


@dataclass
class TypePreservingRandom(CompileMode):
    """Conditionals become He-initialized random linear maps.

    The same mode object threads one RNG stream through a compilation, so
    reusing an object continues the stream; construct a fresh one per
    compile for reproducible output. Sampled maps are recorded in
    sampled_maps in the order their conditionals were reached.
    """

    seed: int
    rng: np.random.Generator = field(init=False, repr=False)
    sampled_maps: list[np.ndarray] = field(init=False, repr=False)

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)
        self.sampled_maps = []

    def sample_map(self, out_dim: int, fan_in: int) -> np.ndarray:
        std = np.sqrt(2.0 / fan_in)
        r = self.rng.normal(0.0, std, size=(out_dim, fan_in))
        self.sampled_maps.append(r)
        return r


CORRECT = Correct()
HARD_BRANCH = HardBranch()


def _check_conformance(ctx: Context, env: TargetEnv) -> None:
    for x, t in ctx:
        if x not in env:
            raise CompileError("EnvMissing", x)
        if env[x].cajal_type != t:
            raise CompileError("EnvTypeMismatch", x,
                               f"expected {t}, found {env[x].cajal_type}")


def _restrict(env: TargetEnv, ctx: Context) -> TargetEnv:
    return {x: env[x] for x, _ in ctx}


def compile(d: Derivation, env: TargetEnv | None = None,
            mode: CompileMode = CORRECT) -> Tensor:
    """Compile a derivation under a conforming target environment."""
    env = dict(env or {})
    _check_conformance(d.context, env)
    return _compile(d, _restrict(env, d.context), mode)


def _compile(d: Derivation, env: TargetEnv, mode: CompileMode) -> Tensor:
    match d.rule:
        case "Var":
            return env[d.expr.name]
        case "True":
            return Tensor(BOOL, [[1.0], [0.0]])
        case "False":
            return Tensor(BOOL, [[0.0], [1.0]])
        case "Lam":
            assert isinstance(d.expr, Lam)
            (d_body,) = d.premises
            binder, domain_type = d.expr.binder, d.expr.annot
            outer = {x: env[x] for x, _ in d_body.context if x != binder}
            columns = []
            for b in basis(domain_type):
                inner = dict(outer)
                inner[binder] = b
                columns.append(vec(_compile(d_body, inner, mode)))
            return Tensor(d.type, np.column_stack(columns))
        case "App":
            d_fn, d_arg = d.premises
            f = _compile(d_fn, _restrict(env, d_fn.context), mode)
            a = _compile(d_arg, _restrict(env, d_arg.context), mode)
            return matmul_typed(f, a)
        case "If":
            d_c, d_t, d_f = d.premises
            c = _compile(d_c, _restrict(env, d_c.context), mode)
            branch_env = _restrict(env, d_t.context)
            b1 = _compile(d_t, branch_env, mode)
            b2 = _compile(d_f, branch_env, mode)
            a1, a2 = float(c.array[0, 0]), float(c.array[1, 0])
            match mode:
                case Correct():
                    return add(scale(a1, b1), scale(a2, b2))
                case HardBranch():
                    return b1 if a1 == 1.0 else b2
                case TypePreservingRandom():
                    z = np.kron(vec(c), np.concatenate([vec(b1), vec(b2)]))
                    r = mode.sample_map(dim(d.type), z.size)
                    return reshape(r @ z, d.type)
            raise AssertionError(f"unknown mode {mode!r}")
    raise AssertionError(f"unknown rule {d.rule!r}")


def compile_env(ctx: Context, src: SourceEnv) -> TargetEnv:
    """Compile each closed value of a source environment at its declared type."""
    out: TargetEnv = {}
    for x, t in ctx:
        if x not in src:
            raise CompileError("EnvMissing", x)
        v = src[x]
        if not is_value(v):
            raise CompileError("EnvTypeMismatch", x, "not a value")
        try:
            d = typecheck(Context(), v)
        except TypeCheckError as err:
            raise CompileError("EnvTypeMismatch", x, str(err)) from err
        if d.type != t:
            raise CompileError("EnvTypeMismatch", x,
                               f"expected {t}, found {d.type}")
        out[x] = _compile(d, {}, CORRECT)
    return out


def compile_closed(e: Expr, mode: CompileMode = CORRECT) -> Tensor:
    """Typecheck a closed expression and compile it."""
    return compile(typecheck(Context(), e), {}, mode)


def compile_expr(ctx: Context, e: Expr, env: TargetEnv,
                 mode: CompileMode = CORRECT) -> Tensor:
    """Typecheck ctx |- e and compile it under env."""
    return compile(typecheck(ctx, e), env, mode)
