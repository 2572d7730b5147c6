"""A linear lambda calculus over booleans that compiles to linear neurons.

Programs are typechecked under a linear discipline (every variable used
exactly once), evaluated by a big-step call-by-value semantics, and
compiled to real vectors and matrices in which conditionals become
condition-weighted linear combinations of their branches.
"""

from importlib import resources

from .syntax import (
    App, BOOL, Bool, Context, Expr, FF, If, Lam, Lolli, TT, Type, Var,
    alpha_eq, free_vars, freshen, is_value, pretty, pretty_type,
)
from .parser import ParseError, parse_expr, parse_type
from .typecheck import Derivation, TypeCheckError, split_contexts, typecheck, validate_derivation
from .evaluate import DEFAULT_FUEL, EvalError, SourceEnv, apply_env, evaluate, substitute
from .tensor import (
    Tensor, TargetEnv, add, approx_eq, basis, dim, matmul_typed, reshape, scale,
    shape_of, vec, zeros,
)
from .compile import (
    CORRECT, CompileError, CompileMode, Correct, HARD_BRANCH, HardBranch,
    TypePreservingRandom, compile, compile_closed, compile_env, compile_expr,
)
from .generate import GenConfig, canonical, gen_context, gen_program, gen_source_env, gen_type, gen_value
from .properties import (
    PropertyReport, SUITES, check_behavior_preservation,
    check_closing_invariance, check_linearity, check_termination, run_suite,
)
from .autodiff import (
    AdamState, Graph, Node, adam_step, finite_diff_grad, grad_probe_branch,
)
from .experiments import (
    MetricSeries, Model, ModelConfig, Sweep, Task, TASK_KINDS, basis_fidelity,
    build_model, export_metrics, gen_task_data, render_figures, run_experiment,
    train_one,
)


def program_source(name: str) -> str:
    """Source text of a bundled .cj program, e.g. program_source("eq")."""
    return (resources.files("cajal") / "programs" / f"{name}.cj").read_text()


def program_names() -> list[str]:
    """Names of all bundled .cj programs."""
    root = resources.files("cajal") / "programs"
    return sorted(p.name[:-3] for p in root.iterdir() if p.name.endswith(".cj"))
