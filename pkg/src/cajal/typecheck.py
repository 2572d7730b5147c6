"""Linear typechecking: decide ctx |- e : t and build a Derivation tree.

Each variable in the context must be consumed exactly once. The checker
runs bottom-up: every subterm reports the set of context variables it
consumed; applications and conditionals require disjoint usage between
their split premises; the two branches of a conditional must consume
identical sets; the root must consume the whole context.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    App, BOOL, Bool, Context, Expr, FF, If, Lam, Lolli, TT, Type, Var, free_vars, freshen,
)


class TypeCheckError(Exception):
    """Rejection with a kind and the path of the offending subterm.

    kind is one of UnboundVar, Nonlinear, Mismatch, NotAFunction, NotABool.
    Nonlinear errors carry the offending variable and whether it was
    duplicated or discarded.
    """

    def __init__(self, kind: str, path: tuple[str, ...], *, var: str | None = None,
                 reason: str | None = None, expected: Type | None = None,
                 found: Type | None = None):
        self.kind = kind
        self.path = path
        self.var = var
        self.reason = reason
        self.expected = expected
        self.found = found
        super().__init__(self._describe())

    def _describe(self) -> str:
        at = "/".join(self.path) if self.path else "root"
        if self.kind == "UnboundVar":
            return f"unbound variable {self.var} (at {at})"
        if self.kind == "Nonlinear":
            return f"variable {self.var} {self.reason} (at {at})"
        if self.kind == "Mismatch":
            return f"expected {self.expected}, found {self.found} (at {at})"
        if self.kind == "NotAFunction":
            return f"applied expression has non-function type {self.found} (at {at})"
        if self.kind == "NotABool":
            return f"condition has type {self.found}, expected 2 (at {at})"
        return self.kind


@dataclass
class Derivation:
    """One node of a typing derivation.

    context holds exactly the bindings this subterm consumes, in ambient
    order; premise contexts of App/If nodes are disjoint and union to it,
    and both If branches carry the same context.
    """

    rule: str  # Var | True | False | Lam | App | If
    context: Context
    expr: Expr
    type: Type
    premises: list["Derivation"] = field(default_factory=list)


def split_contexts(usage1: set[str], usage2: set[str]) -> set[str]:
    """Overlap between two usage sets; empty means the split is legal."""
    return usage1 & usage2


def _infer(ctx: Context, e: Expr, path: tuple[str, ...]) -> Derivation:
    match e:
        case Var(name):
            t = ctx.lookup(name)
            if t is None:
                raise TypeCheckError("UnboundVar", path, var=name)
            return Derivation("Var", Context([(name, t)]), e, t)
        case TT():
            return Derivation("True", Context(), e, BOOL)
        case FF():
            return Derivation("False", Context(), e, BOOL)
        case Lam(binder, annot, body):
            inner = ctx.restrict(ctx.domain() - {binder}).extend(binder, annot)
            d_body = _infer(inner, body, path + ("body",))
            used = d_body.context.domain()
            if binder not in used:
                raise TypeCheckError("Nonlinear", path, var=binder, reason="discarded")
            outer_used = used - {binder}
            return Derivation("Lam", ctx.restrict(outer_used), e,
                              Lolli(annot, d_body.type), [d_body])
        case App(fn, arg):
            d_fn = _infer(ctx, fn, path + ("fn",))
            d_arg = _infer(ctx, arg, path + ("arg",))
            if not isinstance(d_fn.type, Lolli):
                raise TypeCheckError("NotAFunction", path + ("fn",), found=d_fn.type)
            if d_arg.type != d_fn.type.domain:
                raise TypeCheckError("Mismatch", path + ("arg",),
                                     expected=d_fn.type.domain, found=d_arg.type)
            overlap = split_contexts(d_fn.context.domain(), d_arg.context.domain())
            if overlap:
                raise TypeCheckError("Nonlinear", path, var=sorted(overlap)[0],
                                     reason="duplicated")
            used = d_fn.context.domain() | d_arg.context.domain()
            return Derivation("App", ctx.restrict(used), e, d_fn.type.codomain,
                              [d_fn, d_arg])
        case If(cond, then_branch, else_branch):
            d_c = _infer(ctx, cond, path + ("cond",))
            if d_c.type != BOOL:
                raise TypeCheckError("NotABool", path + ("cond",), found=d_c.type)
            d_t = _infer(ctx, then_branch, path + ("then",))
            d_f = _infer(ctx, else_branch, path + ("else",))
            if d_t.type != d_f.type:
                raise TypeCheckError("Mismatch", path + ("else",),
                                     expected=d_t.type, found=d_f.type)
            ut, uf = d_t.context.domain(), d_f.context.domain()
            overlap = split_contexts(d_c.context.domain(), ut | uf)
            if overlap:
                raise TypeCheckError("Nonlinear", path, var=sorted(overlap)[0],
                                     reason="duplicated")
            if ut != uf:
                # A variable consumed by one branch only is discarded on
                # the path through the other.
                raise TypeCheckError("Nonlinear", path,
                                     var=sorted(ut ^ uf)[0], reason="discarded")
            used = d_c.context.domain() | ut
            return Derivation("If", ctx.restrict(used), e, d_t.type,
                              [d_c, d_t, d_f])
    raise AssertionError(f"unknown expression {e!r}")


def typecheck(ctx: Context, e: Expr) -> Derivation:
    """Check ctx |- e : t; the root derivation consumes ctx exactly.

    Binders colliding with context names are renamed first, so callers
    may pass any freshened term.
    """
    avoid = ctx.domain() | free_vars(e)
    e = _freshen_avoiding(e, avoid)
    d = _infer(ctx, e, ())
    leftover = ctx.domain() - d.context.domain()
    if leftover:
        raise TypeCheckError("Nonlinear", (), var=sorted(leftover)[0],
                             reason="discarded")
    return d


def _freshen_avoiding(e: Expr, avoid: set[str]) -> Expr:
    # Reuse freshen by seeding the used-name set with extra names: wrap
    # the term under dummy lambdas is clumsy, so inline a small variant.
    from .syntax import _fresh_name  # shared suffix logic

    used = set(avoid)

    def go(e: Expr, ren: dict[str, str]) -> Expr:
        match e:
            case Var(name):
                return Var(ren.get(name, name))
            case TT() | FF():
                return e
            case If(c, t, f):
                return If(go(c, ren), go(t, ren), go(f, ren))
            case Lam(binder, annot, body):
                new = _fresh_name(binder, used) if binder in used else binder
                used.add(new)
                inner = dict(ren)
                inner[binder] = new
                return Lam(new, annot, go(body, inner))
            case App(fn, arg):
                return App(go(fn, ren), go(arg, ren))
        raise AssertionError(f"unknown expression {e!r}")

    return go(e, {})


def validate_derivation(d: Derivation) -> bool:
    """Re-check a Derivation directly against the declarative rules.

    Used by tests as an independent soundness oracle for typecheck.
    """
    ctx, e, t = d.context, d.expr, d.type
    match d.rule:
        case "Var":
            return (isinstance(e, Var) and len(ctx) == 1
                    and ctx.bindings[0] == (e.name, t) and not d.premises)
        case "True":
            return isinstance(e, TT) and len(ctx) == 0 and t == BOOL and not d.premises
        case "False":
            return isinstance(e, FF) and len(ctx) == 0 and t == BOOL and not d.premises
        case "Lam":
            if not (isinstance(e, Lam) and isinstance(t, Lolli) and len(d.premises) == 1):
                return False
            (p,) = d.premises
            if t.domain != e.annot or p.type != t.codomain or p.expr != e.body:
                return False
            if p.context.lookup(e.binder) != e.annot:
                return False
            rest = p.context.restrict(p.context.domain() - {e.binder})
            return rest.domain() == ctx.domain() and all(
                ctx.lookup(x) == ty for x, ty in rest) and validate_derivation(p)
        case "App":
            if not (isinstance(e, App) and len(d.premises) == 2):
                return False
            p_fn, p_arg = d.premises
            if p_fn.expr != e.fn or p_arg.expr != e.arg:
                return False
            if not isinstance(p_fn.type, Lolli):
                return False
            if p_fn.type.domain != p_arg.type or p_fn.type.codomain != t:
                return False
            u1, u2 = p_fn.context.domain(), p_arg.context.domain()
            if u1 & u2 or (u1 | u2) != ctx.domain():
                return False
            return validate_derivation(p_fn) and validate_derivation(p_arg)
        case "If":
            if not (isinstance(e, If) and len(d.premises) == 3):
                return False
            p_c, p_t, p_f = d.premises
            if p_c.expr != e.cond or p_t.expr != e.then_branch or p_f.expr != e.else_branch:
                return False
            if p_c.type != BOOL or p_t.type != t or p_f.type != t:
                return False
            if p_t.context.bindings != p_f.context.bindings:
                return False
            u1, u2 = p_c.context.domain(), p_t.context.domain()
            if u1 & u2 or (u1 | u2) != ctx.domain():
                return False
            return all(validate_derivation(p) for p in d.premises)
    return False
