"""Game logic and CPDL front ends, and elimination of the universal modality.

Game terms (loosest binding first)::

    term    := inter ('u' inter)*          angelic choice
    inter   := seq ('n' seq)*              demonic choice (intersection)
    seq     := postfix (';' postfix)*      composition
    postfix := primary ('*' | 'x' | '^' 'd')*
    primary := ACTION | '?' formula-unary | '(' term ')'

``*`` is angelic iteration, ``x`` demonic iteration and ``^d`` dualisation.
The words ``u``, ``n``, ``x`` and ``d`` are reserved inside game terms.
Modalities ``<g> phi`` and ``[g] phi`` are translated while parsing:
``[g] phi`` becomes ``<g^d> phi`` and ``<g> phi`` becomes ``tau_g(phi)`` with

=================  ==============================
``a``              ``<a> psi``
``a^d``            ``[a] psi``
``?phi``           ``phi & psi``
``(?phi)^d``       ``~phi | psi``
``g u h``          ``tau_g(psi) | tau_h(psi)``
``g n h``          ``tau_g(psi) & tau_h(psi)``
``g ; h``          ``tau_g(tau_h(psi))``
``g*``             ``mu X. (psi | tau_g(X))``
``g x``            ``nu Y. (psi & tau_g(Y))``
=================  ==============================

after pushing duals down to atomic games and tests.  CPDL is the fragment
without ``^d`` and ``x``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from monomu.closure import ValidationError, guardedness_transform, make_clean_irredundant, validate
from monomu.formula import (
    BOT, TOP, Formula, FormulaError, Op, box, conj, conj_all, dia, disj, mu, negate,
    nu, rebuild, simplify, subformulas, var,
)
from monomu.game import ResourceLimit
from monomu.parser import ParseError, Parser

__all__ = [
    "Game", "GameError", "parse_game_formula", "translate", "translate_game",
    "dual_normal", "is_alternation_free_game",
    "UniversalInstance", "reduce_universal", "universal_subformulas", "GUESS_CAP",
]

GUESS_CAP = 16
_RESERVED = {"u", "n", "x", "d"}


class GameError(FormulaError):
    pass


@dataclass(frozen=True)
class Game:
    """Game term.  ``kind`` is one of ``atom, test, union, inter, seq, star,
    cross, dual``; ``args`` holds sub-terms, the action name or the test
    formula."""

    kind: str
    args: tuple

    def __str__(self) -> str:
        k, a = self.kind, self.args
        if k == "atom":
            return a[0]
        if k == "test":
            return f"?({a[0]})"
        if k in ("union", "inter", "seq"):
            sym = {"union": " u ", "inter": " n ", "seq": " ; "}[k]
            return f"({a[0]}{sym}{a[1]})"
        post = {"star": "*", "cross": " x", "dual": "^d"}[k]
        return f"({a[0]}){post}"


def _atom(a):
    return Game("atom", (a,))


def dual_normal(g: Game, flip: bool = False) -> Game:
    """Push dualisation down to atomic games and tests."""
    k, a = g.kind, g.args
    if k == "dual":
        return dual_normal(a[0], not flip)
    if k in ("atom", "test"):
        return Game("dual", (g,)) if flip else g
    if k in ("union", "inter"):
        kind = {"union": "inter", "inter": "union"}[k] if flip else k
        return Game(kind, (dual_normal(a[0], flip), dual_normal(a[1], flip)))
    if k == "seq":
        return Game("seq", (dual_normal(a[0], flip), dual_normal(a[1], flip)))
    kind = {"star": "cross", "cross": "star"}[k] if flip else k
    return Game(kind, (dual_normal(a[0], flip),))


def is_alternation_free_game(g: Game) -> bool:
    """No ``*`` inside ``x`` or vice versa, except across a test."""
    g = dual_normal(g)

    def go(h: Game, ctx: str | None) -> bool:
        k = h.kind
        if k in ("star", "cross"):
            if ctx is not None and ctx != k:
                return False
            return go(h.args[0], k)
        if k in ("atom", "test"):
            return True
        if k == "dual":
            return go(h.args[0], ctx)
        return all(go(s, ctx) for s in h.args)

    return go(g, None)


class _Names:
    """Fresh fixpoint variables ``X, X1, X2, ...`` and ``Y, Y1, ...``."""

    def __init__(self, taken):
        self.taken = set(taken)
        self.count = {"X": 0, "Y": 0}

    def fresh(self, stem: str) -> str:
        while True:
            i = self.count[stem]
            self.count[stem] += 1
            name = stem if i == 0 else f"{stem}{i}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _tau(g: Game, psi: Formula, names: _Names) -> Formula:
    k, a = g.kind, g.args
    if k == "atom":
        return dia(a[0], psi)
    if k == "test":
        return conj(a[0], psi)
    if k == "dual":
        inner = a[0]
        if inner.kind == "atom":
            return box(inner.args[0], psi)
        return disj(negate(inner.args[0]), psi)
    if k == "union":
        return disj(_tau(a[0], psi, names), _tau(a[1], psi, names))
    if k == "inter":
        return conj(_tau(a[0], psi, names), _tau(a[1], psi, names))
    if k == "seq":
        return _tau(a[0], _tau(a[1], psi, names), names)
    if k == "star":
        x = names.fresh("X")
        return mu(x, disj(psi, _tau(a[0], var(x), names)))
    x = names.fresh("Y")
    return nu(x, conj(psi, _tau(a[0], var(x), names)))


def translate_game(g: Game, psi: Formula, taken=()) -> Formula:
    """``tau_g(psi)`` with fresh variables avoiding ``taken`` and the
    names already used in ``psi``."""
    names = _Names(set(taken) | {f.label for f in subformulas(psi) if f.op is Op.VAR or f.is_binder})
    return _tau(dual_normal(g), psi, names)


class _GameParser(Parser):
    def __init__(self, text: str, cpdl: bool):
        super().__init__(text)
        self.cpdl = cpdl
        idents = {t[1] for t in self.lex.tokens if t[0] == "ident"}
        self.names = _Names(idents)

    def modal(self, diamond: bool, pos: int) -> Formula:
        g = self.term()
        self.lex.expect(">" if diamond else "]")
        body = self.unary()
        if not diamond:
            g = Game("dual", (g,))
        if not is_alternation_free_game(g):
            raise GameError(f"game term {g} nests * and x (at position {pos})")
        try:
            return _tau(dual_normal(g), body, self.names)
        except FormulaError as exc:
            raise ParseError(str(exc), pos, self.lex.text) from None

    def term(self) -> Game:
        g = self.inter()
        while self._word("u"):
            g = Game("union", (g, self.inter()))
        return g

    def inter(self) -> Game:
        g = self.seq()
        while self._word("n"):
            g = Game("inter", (g, self.seq()))
        return g

    def seq(self) -> Game:
        g = self.postfix()
        while self.lex.accept(";"):
            g = Game("seq", (g, self.postfix()))
        return g

    def postfix(self) -> Game:
        g = self.game_primary()
        while True:
            tok = self.lex.peek()
            if self.lex.accept("*"):
                g = Game("star", (g,))
            elif tok[0] == "ident" and tok[1] == "x":
                self._no_cpdl("demonic iteration", tok)
                self.lex.next()
                g = Game("cross", (g,))
            elif tok[1] == "^" and tok[0] == "sym":
                self._no_cpdl("dualisation", tok)
                self.lex.next()
                d = self.lex.ident("'d'")
                if d[1] != "d":
                    raise self.lex.error("expected 'd' after '^'", d)
                g = Game("dual", (g,))
            else:
                return g

    def game_primary(self) -> Game:
        lex = self.lex
        tok = lex.peek()
        if lex.accept("("):
            g = self.term()
            lex.expect(")")
            return g
        if lex.accept("?"):
            f = self.unary()
            if f.free:
                raise ParseError("tests must be closed formulas", tok[2], lex.text)
            return Game("test", (f,))
        name = lex.ident("game")
        if name[1] in _RESERVED:
            raise lex.error(f"{name[1]!r} is reserved in game terms", name)
        return _atom(name[1])

    def _word(self, w: str) -> bool:
        tok = self.lex.peek()
        if tok[0] == "ident" and tok[1] == w:
            self.lex.next()
            return True
        return False

    def _no_cpdl(self, what: str, tok):
        if self.cpdl:
            raise GameError(f"{what} is not available in CPDL (at position {tok[2]})")


def parse_game_formula(text: str, dialect: str = "gamelogic") -> Formula:
    """Parse a game-logic or CPDL formula and translate it, without any
    normalisation."""
    if dialect not in ("gamelogic", "cpdl"):
        raise ValueError(f"unknown dialect {dialect!r}")
    return _GameParser(text, dialect == "cpdl").parse()


def translate(text: str, dialect: str = "gamelogic") -> Formula:
    """Translate to a clean, guarded, alternation-free mu-calculus formula."""
    f = parse_game_formula(text, dialect)
    d = validate(f)
    if not d.is_alternation_free:
        raise ValidationError(d)
    return make_clean_irredundant(guardedness_transform(make_clean_irredundant(f)))


# ------------------------------------------------------- universal modality

@dataclass(frozen=True)
class UniversalInstance:
    """One guess for the universal subformulas.

    ``guess`` maps each universal subformula to its assumed truth value.
    The input is satisfiable under this guess iff ``core`` and each formula
    of ``side`` are satisfiable (separately) under the global assumption
    ``global_``.  Satisfiability of the parts suffices because the class of
    ``global_``-models is closed under disjoint unions, and universal
    modalities evaluate the same in each part as in the union.
    """

    guess: tuple
    core: Formula
    global_: Formula
    side: tuple


def universal_subformulas(f: Formula) -> list:
    return [g for g in subformulas(f) if g.op in (Op.UBOX, Op.UDIA)]


def _apply_guess(f: Formula, guess: dict) -> Formula:
    memo: dict = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g)
        if r is None:
            if g in guess:
                r = TOP if guess[g] else BOT
            elif not g.args:
                r = g
            else:
                r = rebuild(g, tuple(go(a) for a in g.args))
            memo[g] = r
        return r

    return simplify(go(f))


def reduce_universal(psi: Formula, cap: int = GUESS_CAP) -> list:
    """Instances of universal-free satisfiability problems, one per guess."""
    univ = universal_subformulas(psi)
    if len(univ) > cap:
        raise ResourceLimit(f"{len(univ)} universal subformulas exceed the cap of {cap}")
    if not univ:
        return [UniversalInstance((), psi, TOP, ())]
    out = []
    for values in itertools.product((True, False), repeat=len(univ)):
        guess = dict(zip(univ, values))
        core = _apply_guess(psi, guess)
        glob, side = [], []
        for u, val in guess.items():
            body = _apply_guess(u.body, guess)
            if u.op is Op.UBOX:
                (glob if val else side).append(body if val else negate(body))
            else:
                (side if val else glob).append(body if val else negate(body))
        glob_f = simplify(conj_all(sorted(set(glob), key=str)))
        out.append(UniversalInstance(tuple(values), core, glob_f, tuple(side)))
    return out
