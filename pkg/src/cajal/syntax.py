"""Abstract syntax: types, expressions, values, contexts."""

from __future__ import annotations

from dataclasses import dataclass


# --- Types ---------------------------------------------------------------

class Type:
    """Base class: Bool or Lolli."""
    __slots__ = ()


@dataclass(frozen=True)
class Bool(Type):
    """The two-point type of booleans, written 2."""
    __slots__ = ()

    def __str__(self) -> str:
        return "2"


@dataclass(frozen=True)
class Lolli(Type):
    """Linear function type, written t1 -o t2 (right associative)."""
    __slots__ = ("domain", "codomain")
    domain: Type
    codomain: Type

    def __str__(self) -> str:
        if isinstance(self.domain, Lolli):
            return f"({self.domain}) -o {self.codomain}"
        return f"{self.domain} -o {self.codomain}"


BOOL = Bool()


# --- Expressions ---------------------------------------------------------

class Expr:
    """Base class for expressions."""
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    __slots__ = ("name",)
    name: str


@dataclass(frozen=True)
class TT(Expr):
    """The boolean literal tt."""
    __slots__ = ()


@dataclass(frozen=True)
class FF(Expr):
    """The boolean literal ff."""
    __slots__ = ()


@dataclass(frozen=True)
class If(Expr):
    __slots__ = ("cond", "then_branch", "else_branch")
    cond: Expr
    then_branch: Expr
    else_branch: Expr


@dataclass(frozen=True)
class Lam(Expr):
    """Lambda with annotated binder: \\x:T. body."""
    __slots__ = ("binder", "annot", "body")
    binder: str
    annot: Type
    body: Expr


@dataclass(frozen=True)
class App(Expr):
    __slots__ = ("fn", "arg")
    fn: Expr
    arg: Expr


def is_value(e: Expr) -> bool:
    """Values are the canonical forms: tt, ff, and lambdas."""
    return isinstance(e, (TT, FF, Lam))


# --- Contexts ------------------------------------------------------------

class Context:
    """Ordered list of (name, Type) bindings with set-like domain.

    Duplicate names are rejected at construction; lookup is by name.
    """

    __slots__ = ("bindings",)

    def __init__(self, bindings: list[tuple[str, Type]] | None = None):
        bindings = list(bindings or [])
        names = [x for x, _ in bindings]
        if len(names) != len(set(names)):
            raise ValueError(f"duplicate names in context: {names}")
        self.bindings = bindings

    def domain(self) -> set[str]:
        return {x for x, _ in self.bindings}

    def lookup(self, name: str) -> Type | None:
        for x, t in self.bindings:
            if x == name:
                return t
        return None

    def restrict(self, names: set[str]) -> "Context":
        """Sub-context with only the given names, in original order."""
        return Context([(x, t) for x, t in self.bindings if x in names])

    def extend(self, name: str, t: Type) -> "Context":
        return Context(self.bindings + [(name, t)])

    def __iter__(self):
        return iter(self.bindings)

    def __len__(self) -> int:
        return len(self.bindings)

    def __eq__(self, other) -> bool:
        return isinstance(other, Context) and self.bindings == other.bindings

    def __repr__(self) -> str:
        inner = ", ".join(f"{x}:{t}" for x, t in self.bindings)
        return f"Context([{inner}])"


# --- Structural helpers --------------------------------------------------

def free_vars(e: Expr) -> set[str]:
    """Unbound variable names of e."""
    match e:
        case Var(name):
            return {name}
        case TT() | FF():
            return set()
        case If(c, t, f):
            return free_vars(c) | free_vars(t) | free_vars(f)
        case Lam(binder, _, body):
            return free_vars(body) - {binder}
        case App(fn, arg):
            return free_vars(fn) | free_vars(arg)
    raise AssertionError(f"unknown expression {e!r}")


def _split_suffix(name: str) -> tuple[str, int]:
    i = len(name)
    while i > 0 and name[i - 1].isdigit():
        i -= 1
    if i == len(name) or i == 0:
        return name, 0
    return name[:i], int(name[i:])


def _fresh_name(base: str, used: set[str]) -> str:
    stem, n = _split_suffix(base)
    while True:
        n += 1
        candidate = f"{stem}{n}"
        if candidate not in used:
            return candidate


def freshen(e: Expr) -> Expr:
    """Rename binders so every binder in the term is globally distinct.

    Free variables are never renamed. Idempotent on already-fresh terms:
    a binder keeps its name unless it collides with a free variable or a
    binder already seen, in which case it gets the smallest numeric suffix
    not yet in use.
    """
    used = set(free_vars(e))

    def go(e: Expr, ren: dict[str, str]) -> Expr:
        match e:
            case Var(name):
                return Var(ren.get(name, name))
            case TT() | FF():
                return e
            case If(c, t, f):
                return If(go(c, ren), go(t, ren), go(f, ren))
            case Lam(binder, annot, body):
                if binder in used:
                    new = _fresh_name(binder, used)
                else:
                    new = binder
                used.add(new)
                inner = dict(ren)
                inner[binder] = new
                return Lam(new, annot, go(body, inner))
            case App(fn, arg):
                return App(go(fn, ren), go(arg, ren))
        raise AssertionError(f"unknown expression {e!r}")

    return go(e, {})


def alpha_eq(a: Expr, b: Expr) -> bool:
    """Structural equality up to consistent renaming of binders."""

    def go(a: Expr, b: Expr, env_a: dict[str, int], env_b: dict[str, int], depth: int) -> bool:
        match (a, b):
            case (Var(x), Var(y)):
                ia, ib = env_a.get(x), env_b.get(y)
                if ia is None and ib is None:
                    return x == y
                return ia == ib
            case (TT(), TT()) | (FF(), FF()):
                return True
            case (If(c1, t1, f1), If(c2, t2, f2)):
                return (go(c1, c2, env_a, env_b, depth)
                        and go(t1, t2, env_a, env_b, depth)
                        and go(f1, f2, env_a, env_b, depth))
            case (Lam(x, s, bd1), Lam(y, t, bd2)):
                if s != t:
                    return False
                ea = dict(env_a)
                eb = dict(env_b)
                ea[x] = depth
                eb[y] = depth
                return go(bd1, bd2, ea, eb, depth + 1)
            case (App(f1, a1), App(f2, a2)):
                return go(f1, f2, env_a, env_b, depth) and go(a1, a2, env_a, env_b, depth)
        return False

    return go(a, b, {}, {}, 0)


# --- Pretty-printing -----------------------------------------------------

def pretty_type(t: Type) -> str:
    return str(t)


def pretty(e: Expr) -> str:
    """Concrete syntax such that parse(pretty(e)) == freshen(e).

    Precedence: application binds tightest and associates left; if and
    lambda bodies extend maximally to the right.
    """
    match e:
        case Var(name):
            return name
        case TT():
            return "tt"
        case FF():
            return "ff"
        case If(c, t, f):
            return f"if {pretty(c)} then {pretty(t)} else {pretty(f)}"
        case Lam(binder, annot, body):
            return f"\\{binder}:{annot}. {pretty(body)}"
        case App(fn, arg):
            fn_s = pretty(fn)
            arg_s = pretty(arg)
            # A lambda or if on the left would swallow the argument.
            if isinstance(fn, (Lam, If)):
                fn_s = f"({fn_s})"
            if isinstance(arg, (App, Lam, If)):
                arg_s = f"({arg_s})"
            return f"{fn_s} {arg_s}"
    raise AssertionError(f"unknown expression {e!r}")
