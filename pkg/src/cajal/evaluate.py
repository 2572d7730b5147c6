"""Big-step call-by-value evaluation with capture-avoiding substitution.

The four rules: values evaluate to themselves; a conditional evaluates
its condition to tt or ff and then exactly one branch; an application
evaluates the function, then the argument, then the substituted body.
"""

from __future__ import annotations

from .syntax import App, Expr, FF, If, Lam, TT, Var, free_vars, freshen, is_value

DEFAULT_FUEL = 10 ** 6

# A source environment maps names to closed values.
SourceEnv = dict[str, Expr]


class EvalError(Exception):
    """kind is one of StuckNonBoolCondition, StuckNonFunction, UnboundVar,
    FuelExhausted. Stuck errors never arise for typechecked closed
    programs; FuelExhausted would indicate an implementation bug."""

    def __init__(self, kind: str, detail: str = "", steps: int | None = None):
        self.kind = kind
        self.steps = steps
        msg = kind if not detail else f"{kind}: {detail}"
        if steps is not None:
            msg = f"{kind} after {steps} steps"
        super().__init__(msg)


def substitute(x: str, v: Expr, e: Expr) -> Expr:
    """Replace free occurrences of x in e by v.

    v must be closed or have binders disjoint from e's (guaranteed when
    both come out of freshen/parse), so no capture can occur.
    """
    match e:
        case Var(name):
            return v if name == x else e
        case TT() | FF():
            return e
        case If(c, t, f):
            return If(substitute(x, v, c), substitute(x, v, t), substitute(x, v, f))
        case Lam(binder, annot, body):
            if binder == x:
                return e
            return Lam(binder, annot, substitute(x, v, body))
        case App(fn, arg):
            return App(substitute(x, v, fn), substitute(x, v, arg))
    raise AssertionError(f"unknown expression {e!r}")


def apply_env(e: Expr, env: SourceEnv) -> Expr:
    """Simultaneous substitution of every env binding into e."""
    for x in free_vars(e):
        if x not in env:
            raise EvalError("UnboundVar", x)
    for x, v in env.items():
        if not is_value(v):
            raise EvalError("StuckNonFunction", f"environment value for {x} is not a value")
        e = substitute(x, v, e)
    return e


def evaluate(e: Expr, env: SourceEnv | None = None, fuel: int = DEFAULT_FUEL) -> Expr:
    """Evaluate the env-closure of e to a value.

    Raises EvalError on open or ill-typed input, or if the step budget is
    exhausted (which a typechecked program never does).
    """
    if env:
        e = apply_env(e, env)
    remaining = [fuel]

    def step() -> None:
        remaining[0] -= 1
        if remaining[0] < 0:
            raise EvalError("FuelExhausted", steps=fuel)

    def go(e: Expr) -> Expr:
        step()
        if is_value(e):
            return e
        match e:
            case Var(name):
                raise EvalError("UnboundVar", name)
            case If(c, t, f):
                cv = go(c)
                if isinstance(cv, TT):
                    return go(t)
                if isinstance(cv, FF):
                    return go(f)
                raise EvalError("StuckNonBoolCondition", f"condition evaluated to {cv}")
            case App(fn, arg):
                fv = go(fn)
                if not isinstance(fv, Lam):
                    raise EvalError("StuckNonFunction", f"applied {fv}")
                av = go(arg)
                # Freshen the substituted body so repeated use of the same
                # lambda value cannot make binders collide downstream.
                return go(freshen(substitute(fv.binder, av, fv.body)))
        raise AssertionError(f"unknown expression {e!r}")

    return go(e)
