"""Recursive-descent parser for the concrete formula syntax.

Grammar (loosest binding first)::

    formula := conj ('|' conj)*
    conj    := unary ('&' unary)*
    unary   := '~' unary | '<' ACT '>' unary | '[' ACT ']' unary
             | 'A' unary | 'E' unary | ('mu'|'nu') VAR '.' formula | atom
    atom    := 'true' | 'false' | ident | '(' formula ')'

``mu``/``nu`` extend as far to the right as possible.  Lowercase identifiers
are atoms, uppercase identifiers are fixpoint variables and must be bound.
``~`` on a closed compound formula is pushed inward to negation normal form.
"""

from __future__ import annotations

import re

from monomu.formula import (
    BOT, TOP, Formula, FormulaError, Op, atom, box, conj, dia, disj, mu, negate, nu, ubox, udia, var,
)

__all__ = ["ParseError", "Lexer", "Parser", "parse", "parse_file"]


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int | None = None, text: str = ""):
        self.pos = pos
        self.text = text
        if pos is not None:
            message = f"{message} at position {pos}"
        super().__init__(message)


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[<>\[\]()&|~.?;*^,])
""", re.VERBOSE)


class Lexer:
    """Token stream with one-token lookahead.  Tokens are ``(kind, text, pos)``."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.tokens.append(("eof", "", len(text)))
        self.i = 0

    def peek(self, offset: int = 0):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self):
        tok = self.tokens[self.i]
        if tok[0] != "eof":
            self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.peek()[1] == text and self.peek()[0] != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        tok = self.next()
        if tok[1] != text or tok[0] == "eof":
            raise self.error(f"expected {text!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def ident(self, what: str = "identifier"):
        tok = self.next()
        if tok[0] != "ident":
            raise self.error(f"expected {what}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def error(self, message: str, tok=None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok[2], self.text)


class Parser:
    """Formula parser.  Subclasses may override :meth:`modal` to change what
    may appear between the angle/square brackets."""

    def __init__(self, text: str):
        self.lex = Lexer(text)
        self.scope: list[str] = []

    def parse(self) -> Formula:
        f = self.formula()
        tok = self.lex.peek()
        if tok[0] != "eof":
            raise self.lex.error(f"unexpected {tok[1]!r}", tok)
        return f

    def formula(self) -> Formula:
        f = self.conjunction()
        while self.lex.accept("|"):
            f = disj(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.lex.accept("&"):
            f = conj(f, self.unary())
        return f

    def unary(self) -> Formula:
        lex = self.lex
        kind, text, pos = lex.peek()
        if text == "~" and kind == "sym":
            lex.next()
            return self.negation(self.unary(), pos)
        if text in ("<", "[") and kind == "sym":
            lex.next()
            return self.modal(text == "<", pos)
        if kind == "ident" and text in ("A", "E"):
            lex.next()
            body = self.unary()
            try:
                return ubox(body) if text == "A" else udia(body)
            except FormulaError as exc:
                raise ParseError(str(exc), pos, lex.text) from None
        if kind == "ident" and text in ("mu", "nu"):
            lex.next()
            name = lex.ident("fixpoint variable")
            if not name[1][0].isupper():
                raise lex.error(f"fixpoint variable must be uppercase, got {name[1]!r}", name)
            lex.expect(".")
            self.scope.append(name[1])
            try:
                body = self.formula()
            finally:
                self.scope.pop()
            return (mu if text == "mu" else nu)(name[1], body)
        return self.primary()

    def negation(self, f: Formula, pos: int) -> Formula:
        if f.op is Op.VAR:
            raise ParseError(f"cannot negate fixpoint variable {f.label}", pos, self.lex.text)
        if f.free:
            raise ParseError("negation of an open formula", pos, self.lex.text)
        return negate(f)

    def modal(self, diamond: bool, pos: int) -> Formula:
        act = self.lex.ident("action")
        self.lex.expect(">" if diamond else "]")
        body = self.unary()
        return dia(act[1], body) if diamond else box(act[1], body)

    def primary(self) -> Formula:
        lex = self.lex
        tok = lex.next()
        kind, text, pos = tok
        if kind == "sym" and text == "(":
            f = self.formula()
            lex.expect(")")
            return f
        if kind != "ident":
            raise lex.error(f"unexpected {text or 'end of input'!r}", tok)
        if text == "true":
            return TOP
        if text == "false":
            return BOT
        if text in ("mu", "nu", "A", "E"):
            raise lex.error(f"unexpected keyword {text!r}", tok)
        if text[0].isupper():
            if text not in self.scope:
                raise ParseError(f"unbound variable {text}", pos, lex.text)
            return var(text)
        try:
            return atom(text)
        except FormulaError as exc:
            raise ParseError(str(exc), pos, lex.text) from None


def parse(text: str) -> Formula:
    """Parse ``text`` into an interned formula."""
    return Parser(text).parse()


def parse_file(path) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())

