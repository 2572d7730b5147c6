"""Command-line interface.

Subcommands: check, eval, compile, verify, experiment. Exit codes:
0 success, 1 type/parse/eval/verification failure, 2 usage error.
Program files use the .cj extension; a `-- context: x:2, y:2` comment
declares types for free variables. CAJAL_SEED sets the default seed.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from .compile import (
    CORRECT, HARD_BRANCH, CompileError, TypePreservingRandom, compile,
    compile_env,
)
from .evaluate import EvalError, evaluate
from .experiments import (
    FULL_SWEEP, Sweep, Task, TASK_KINDS, export_metrics, render_figures,
    run_experiment,
)
from .generate import GenConfig
from .parser import ParseError, parse_expr, parse_type
from .properties import SUITES
from .syntax import Context, Type, free_vars, is_value, pretty, pretty_type
from .tensor import Tensor, dim, reshape, shape_of
from .typecheck import TypeCheckError, typecheck

_CONTEXT_RE = re.compile(r"^\s*--\s*context:\s*(.*)$", re.MULTILINE)


def _default_seed() -> int:
    return int(os.environ.get("CAJAL_SEED", "0"))


def load_program(path: str) -> tuple[Context, "object"]:
    """Read a .cj file; returns its declared context and parsed body."""
    with open(path) as fh:
        src = fh.read()
    bindings = []
    m = _CONTEXT_RE.search(src)
    if m and m.group(1).strip():
        for part in m.group(1).split(","):
            name, _, type_text = part.partition(":")
            if not type_text:
                raise ParseError(1, 1, f"malformed context entry {part.strip()!r}")
            bindings.append((name.strip(), parse_type(type_text.strip())))
    return Context(bindings), parse_expr(src)


def _merge_vars(ctx: Context, var_flags: list[str]) -> Context:
    bindings = dict(ctx.bindings)
    for flag in var_flags or []:
        name, _, type_text = flag.partition(":")
        if not type_text:
            raise ParseError(1, 1, f"malformed --var {flag!r} (want name:type)")
        bindings[name.strip()] = parse_type(type_text.strip())
    return Context(list(bindings.items()))


def _parse_env_values(flags: list[str]) -> dict:
    env = {}
    for flag in flags or []:
        name, eq, text = flag.partition("=")
        if not eq:
            raise ParseError(1, 1, f"malformed --env {flag!r} (want name=value)")
        v = parse_expr(text)
        if not is_value(v):
            raise ParseError(1, 1, f"--env {name}: {text!r} is not a value")
        env[name.strip()] = v
    return env


def _parse_env_vecs(flags: list[str], ctx: Context) -> dict:
    env = {}
    for flag in flags or []:
        name, eq, text = flag.partition("=")
        name = name.strip()
        if not eq:
            raise ParseError(1, 1, f"malformed --env-vec {flag!r} (want name=[..])")
        t = ctx.lookup(name)
        if t is None:
            raise CompileError("EnvMissing", name, "no declared type in context")
        data = json.loads(text)
        a = np.array(data, dtype=np.float64)
        if a.ndim == 1:
            if a.size != dim(t):
                raise CompileError("EnvTypeMismatch", name,
                                   f"length {a.size}, type {t} has dim {dim(t)}")
            env[name] = reshape(a, t)
        else:
            if a.shape != shape_of(t):
                raise CompileError("EnvTypeMismatch", name,
                                   f"shape {a.shape}, type {t} wants {shape_of(t)}")
            env[name] = Tensor(t, a)
    return env


# -- subcommands -----------------------------------------------------------

def _cmd_check(args) -> int:
    ctx, e = load_program(args.file)
    ctx = _merge_vars(ctx, args.var)
    d = typecheck(ctx, e)
    if args.json:
        print(json.dumps({"type": pretty_type(d.type)}))
    else:
        print(pretty_type(d.type))
    return 0


def _cmd_eval(args) -> int:
    ctx, e = load_program(args.file)
    env = _parse_env_values(args.env)
    missing = free_vars(e) - set(env)
    if missing:
        raise EvalError("UnboundVar", ", ".join(sorted(missing)))
    v = evaluate(e, env)
    if args.json:
        print(json.dumps({"value": pretty(v)}))
    else:
        print(pretty(v))
    return 0


def _cmd_compile(args) -> int:
    ctx, e = load_program(args.file)
    ctx = _merge_vars(ctx, args.var)
    d = typecheck(ctx, e)
    values = _parse_env_values(args.env)
    env = compile_env(ctx.restrict(set(values)), values)
    env.update(_parse_env_vecs(args.env_vec, ctx))
    if args.mode == "correct":
        mode = CORRECT
    elif args.mode == "hard":
        mode = HARD_BRANCH
    else:
        mode = TypePreservingRandom(args.seed)
    t = compile(d, env, mode)
    payload = t.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
    if args.json or not args.out:
        print(payload)
    return 0


def _cmd_verify(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    cfg = GenConfig(seed=args.seed, max_depth=args.max_depth, count=args.count)
    reports = [SUITES[n](cfg) for n in names]
    if args.json:
        print(json.dumps([json.loads(r.to_json()) for r in reports]))
    else:
        for r in reports:
            print(r.summary())
            for f in r.failures[:10]:
                print(f"  seed {f.case_seed}: {f.program}")
    return 0 if all(r.ok for r in reports) else 1


def _cmd_experiment(args) -> int:
    models = [m.strip() for m in args.models.split(",")]
    for m in models:
        if m not in ("I", "D", "C", "T"):
            raise ValueError(f"unknown model {m!r}")
    if args.full_sweep:
        sweep = FULL_SWEEP
    else:
        sweep = Sweep()
    if args.lrs:
        sweep.lrs = [float(x) for x in args.lrs.split(",")]
    if args.batches:
        sweep.batch_sizes = [int(x) for x in args.batches.split(",")]
    sweep.seeds = list(range(args.base_seed, args.base_seed + args.seeds))
    series = []
    for kind in args.task.split(","):
        kind = kind.strip().upper()
        if kind not in TASK_KINDS:
            raise ValueError(f"unknown task {kind!r}")
        series += run_experiment(Task(kind), models, sweep, steps=args.steps,
                                 workers=args.workers)
    paths = export_metrics(series, args.out_dir)
    figure_paths = render_figures(series, args.out_dir)
    result = {"metrics": paths["csv"], "summary": paths["json"],
              "figures": figure_paths}
    if args.json:
        print(json.dumps(result))
    else:
        for key, value in result.items():
            print(f"{key}: {value}")
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cajal", description=__doc__)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="typecheck a program file")
    c.add_argument("file")
    c.add_argument("--var", action="append", metavar="NAME:TYPE",
                   help="declare a free variable's type")
    c.set_defaults(fn=_cmd_check)

    e = sub.add_parser("eval", help="evaluate a program file")
    e.add_argument("file")
    e.add_argument("--env", action="append", metavar="NAME=VALUE",
                   help="bind a free variable to a closed value")
    e.set_defaults(fn=_cmd_eval)

    k = sub.add_parser("compile", help="compile a program file to a tensor")
    k.add_argument("file")
    k.add_argument("--var", action="append", metavar="NAME:TYPE")
    k.add_argument("--env", action="append", metavar="NAME=VALUE",
                   help="bind a free variable to a closed value")
    k.add_argument("--env-vec", action="append", metavar="NAME=[..]",
                   help="bind a free variable to a raw tensor")
    k.add_argument("--mode", choices=["correct", "hard", "random"],
                   default="correct")
    k.add_argument("--seed", type=int, default=_default_seed())
    k.add_argument("--out", help="write tensor JSON to this file")
    k.set_defaults(fn=_cmd_compile)

    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    v.add_argument("--seed", type=int, default=_default_seed())
    v.add_argument("--count", type=int, default=1000)
    v.add_argument("--max-depth", type=int, default=8)
    v.set_defaults(fn=_cmd_verify)

    x = sub.add_parser("experiment", help="train models on synthetic tasks")
    x.add_argument("--task", default="EQ", help="comma-separated: EQ,XOR,AND,OR")
    x.add_argument("--models", default="I,D,C,T", help="comma-separated subset of I,D,C,T")
    x.add_argument("--steps", type=int, default=2000)
    x.add_argument("--seeds", type=int, default=5, help="number of seeds")
    x.add_argument("--base-seed", type=int, default=_default_seed())
    x.add_argument("--lrs", help="comma-separated learning rates")
    x.add_argument("--batches", help="comma-separated batch sizes")
    x.add_argument("--full-sweep", action="store_true",
                   help="4 learning rates x 4 batch sizes")
    x.add_argument("--workers", type=int, default=1)
    x.add_argument("--out-dir", default="experiment-out")
    x.set_defaults(fn=_cmd_experiment)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (ParseError, TypeCheckError, EvalError, CompileError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
