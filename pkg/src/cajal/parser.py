"""Concrete syntax -> Expr, with 1-based line/column error positions.

Grammar:

  expr  ::= '\\' name ':' type '.' expr
          | 'if' expr 'then' expr 'else' expr
          | app
  app   ::= atom+                          (left associative)
  atom  ::= 'tt' | 'ff' | name | '(' expr ')'
  type  ::= tatom ('-o' type)?             (right associative)
  tatom ::= '2' | '(' type ')'

Comments run from '--' to end of line. Identifiers are ascii letters,
digits, underscores and primes, starting with a letter or underscore.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import BOOL, App, Bool, Expr, FF, If, Lam, Lolli, TT, Type, Var, freshen

KEYWORDS = {"if", "then", "else", "tt", "ff"}


class ParseError(Exception):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'keyword', 'punct', 'end'
    text: str
    line: int
    column: int


_PUNCT = ("-o", "\\", ".", ":", "(", ")", "2")


def tokenize(src: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if src.startswith("--", i):
            while i < n and src[i] != "\n":
                i += 1
            continue
        matched = False
        for p in _PUNCT:
            if src.startswith(p, i):
                # '2' starting an identifier would have been caught below,
                # but identifiers cannot start with a digit anyway.
                tokens.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                matched = True
                break
        if matched:
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            word = src[i:j]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(line, col, f"unexpected character {c!r}")
    tokens.append(Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, message: str) -> "ParseError":
        t = self.peek()
        return ParseError(t.line, t.column, message)

    def expect_punct(self, text: str) -> Token:
        t = self.peek()
        if t.kind == "punct" and t.text == text:
            return self.next()
        raise self.fail(f"expected {text!r}, found {t.text!r}" if t.kind != "end"
                        else f"expected {text!r}, found end of input")

    def expect_keyword(self, word: str) -> Token:
        t = self.peek()
        if t.kind == "keyword" and t.text == word:
            return self.next()
        raise self.fail(f"expected {word!r}, found {t.text!r}" if t.kind != "end"
                        else f"expected {word!r}, found end of input")

    # -- types --

    def type_(self) -> Type:
        left = self.type_atom()
        t = self.peek()
        if t.kind == "punct" and t.text == "-o":
            self.next()
            return Lolli(left, self.type_())
        return left

    def type_atom(self) -> Type:
        t = self.peek()
        if t.kind == "punct" and t.text == "2":
            self.next()
            return BOOL
        if t.kind == "punct" and t.text == "(":
            self.next()
            inner = self.type_()
            self.expect_punct(")")
            return inner
        raise self.fail(f"expected a type, found {t.text!r}" if t.kind != "end"
                        else "expected a type, found end of input")

    # -- expressions --

    def expr(self) -> Expr:
        t = self.peek()
        if t.kind == "punct" and t.text == "\\":
            self.next()
            name_tok = self.peek()
            if name_tok.kind != "ident":
                raise self.fail("expected a binder name after '\\'")
            self.next()
            self.expect_punct(":")
            annot = self.type_()
            self.expect_punct(".")
            body = self.expr()
            return Lam(name_tok.text, annot, body)
        if t.kind == "keyword" and t.text == "if":
            self.next()
            cond = self.expr()
            self.expect_keyword("then")
            then_branch = self.expr()
            self.expect_keyword("else")
            else_branch = self.expr()
            return If(cond, then_branch, else_branch)
        return self.app()

    def app(self) -> Expr:
        e = self.atom()
        while True:
            nxt = self._try_atom()
            if nxt is None:
                return e
            e = App(e, nxt)

    def _starts_atom(self, t: Token) -> bool:
        if t.kind == "ident":
            return True
        if t.kind == "keyword" and t.text in ("tt", "ff"):
            return True
        if t.kind == "punct" and t.text == "(":
            return True
        return False

    def _try_atom(self) -> Expr | None:
        if self._starts_atom(self.peek()):
            return self.atom()
        return None

    def atom(self) -> Expr:
        t = self.peek()
        if t.kind == "keyword" and t.text == "tt":
            self.next()
            return TT()
        if t.kind == "keyword" and t.text == "ff":
            self.next()
            return FF()
        if t.kind == "ident":
            self.next()
            return Var(t.text)
        if t.kind == "punct" and t.text == "(":
            self.next()
            inner = self.expr()
            self.expect_punct(")")
            return inner
        raise self.fail(f"expected an expression, found {t.text!r}" if t.kind != "end"
                        else "expected an expression, found end of input")


def parse_expr(src: str) -> Expr:
    """Parse a complete expression; the result is freshened."""
    p = _Parser(tokenize(src))
    e = p.expr()
    t = p.peek()
    if t.kind != "end":
        raise p.fail(f"unexpected trailing input {t.text!r}")
    return freshen(e)


def parse_type(src: str) -> Type:
    """Parse a complete type."""
    p = _Parser(tokenize(src))
    t = p.type_()
    tok = p.peek()
    if tok.kind != "end":
        raise p.fail(f"unexpected trailing input {tok.text!r}")
    return t
