"""Random formulas and models for property tests and benchmarks.

Formulas are closed, clean, guarded and alternation-free by construction:
variables are only used under a modality below their binder, and a new
binder hides all in-scope variables of the other fixpoint kind.
"""

from __future__ import annotations

import random

from monomu.formula import (
    BOT, TOP, Formula, atom, box, conj, dia, disj, dual, mu, nu, ubox, udia, var,
)
from monomu.oracles import RelationalModel
from monomu.semantics import NeighbourhoodModel

__all__ = ["random_formula", "random_model", "random_relational_model", "enumerate_formulas",
           "random_game_text"]


def random_formula(rng: random.Random, depth: int = 4, atoms=("p", "q"),
                   actions=("a",), fixpoints: bool = True,
                   universal: bool = False, guarded: bool = True) -> Formula:
    """Random closed formula of modal depth roughly ``depth``.  With
    ``guarded=False`` variables may also occur outside modalities."""
    counter = [0]

    def fresh(kind: str) -> str:
        counter[0] += 1
        return f"{'X' if kind == 'mu' else 'Y'}{counter[0]}"

    def leaf(env: dict) -> Formula:
        usable = [x for x, (_, g) in env.items() if g or not guarded]
        if usable and rng.random() < 0.5:
            return var(rng.choice(usable))
        r = rng.random()
        if r < 0.08:
            return TOP
        if r < 0.12:
            return BOT
        p = rng.choice(atoms)
        return atom(p) if rng.random() < 0.6 else dual(p)

    def go(d: int, env: dict) -> Formula:
        if d <= 0:
            return leaf(env)
        r = rng.random()
        if r < 0.15:
            return leaf(env)
        if r < 0.35:
            return conj(go(d - 1, env), go(d - 1, env))
        if r < 0.55:
            return disj(go(d - 1, env), go(d - 1, env))
        if r < 0.8 or not fixpoints:
            under = {x: (k, True) for x, (k, _) in env.items()}
            a = rng.choice(actions)
            if universal and rng.random() < 0.1:
                return (ubox if rng.random() < 0.5 else udia)(go(d - 1, {}))
            return (dia if rng.random() < 0.5 else box)(a, go(d - 1, under))
        kind = "mu" if rng.random() < 0.5 else "nu"
        x = fresh(kind)
        inner = {y: v for y, v in env.items() if v[0] == kind}
        inner[x] = (kind, False)
        body = go(d, inner)
        if x not in body.free:
            return body
        return (mu if kind == "mu" else nu)(x, body)

    return go(depth, {})


def random_model(rng: random.Random, states: int, atoms=("p", "q"), actions=("a",),
                 max_nbhds: int = 2) -> NeighbourhoodModel:
    """Random model; each ``N(a, w)`` has up to ``max_nbhds`` random subsets."""
    full = 1 << states
    at = {p: rng.randrange(full) for p in atoms}
    nbhd = {a: [sorted({rng.randrange(full) for _ in range(rng.randint(0, max_nbhds))})
                for _ in range(states)] for a in actions}
    return NeighbourhoodModel([f"w{i}" for i in range(states)], at, nbhd)


def random_relational_model(rng: random.Random, states: int, atoms=("p", "q"),
                            actions=("a",), density: float = 0.35) -> RelationalModel:
    """Random Kripke model over ``actions`` and the reserved ``e``."""
    full = 1 << states

    def row():
        return sum(1 << j for j in range(states) if rng.random() < density)

    rel = {a: [row() for _ in range(states)] for a in list(actions) + ["e"]}
    return RelationalModel([f"c{i}" for i in range(states)],
                           {p: rng.randrange(full) for p in atoms}, rel)


def enumerate_formulas(max_size: int, atoms=("p",), actions=("a",)) -> list:
    """All closed, clean, guarded, alternation-free formulas with at most
    ``max_size`` AST nodes, conjunctions and disjunctions taken up to
    argument order.  Binders at nesting depth ``d`` are named ``Xd``/``Yd``."""
    memo: dict = {}

    def gen(size: int, env: tuple) -> list:
        key = (size, env)
        if key in memo:
            return memo[key]
        out = []
        if size == 1:
            out += [TOP, BOT] + [atom(p) for p in atoms] + [dual(p) for p in atoms]
            out += [var(x) for x, _, guarded in env if guarded]
        else:
            guarded = tuple((x, k, True) for x, k, _ in env)
            for a in actions:
                for b in gen(size - 1, guarded):
                    out += [dia(a, b), box(a, b)]
            for kind in ("mu", "nu"):
                x = f"{'X' if kind == 'mu' else 'Y'}{len(env)}"
                inner = tuple(e for e in env if e[1] == kind) + ((x, kind, False),)
                make = mu if kind == "mu" else nu
                out += [make(x, b) for b in gen(size - 1, inner) if x in b.free]
            for ls in range(1, size - 1):
                rs = size - 1 - ls
                if ls > rs:
                    break
                for l in gen(ls, env):
                    for r in gen(rs, env):
                        if ls == rs and str(r) < str(l):
                            continue
                        out += [conj(l, r), disj(l, r)]
        memo[key] = out
        return out

    seen: dict = {}
    for s in range(1, max_size + 1):
        for f in gen(s, ()):
            if not f.free:
                seen.setdefault(f, None)
    return list(seen)


def random_game_text(rng: random.Random, depth: int = 3, actions=("a", "b"),
                     atoms=("p", "q"), cpdl: bool = False) -> str:
    """Random game-logic (or CPDL) formula in surface syntax.  May nest
    ``*`` and ``x``; callers filter with the translator."""

    def game(d: int) -> str:
        if d <= 0 or rng.random() < 0.25:
            if rng.random() < 0.15:
                return "?" + form(0)
            return rng.choice(actions)
        r = rng.random()
        if r < 0.2:
            return f"({game(d - 1)} u {game(d - 1)})"
        if r < 0.35 and not cpdl:
            return f"({game(d - 1)} n {game(d - 1)})"
        if r < 0.6:
            return f"({game(d - 1)} ; {game(d - 1)})"
        if r < 0.8:
            return f"({game(d - 1)})*"
        if cpdl:
            return f"({game(d - 1)})*"
        return f"({game(d - 1)}) x" if r < 0.9 else f"({game(d - 1)})^d"

    def form(d: int) -> str:
        if d <= 0 or rng.random() < 0.3:
            p = rng.choice(atoms)
            return p if rng.random() < 0.7 else "~" + p
        r = rng.random()
        if r < 0.2:
            return f"({form(d - 1)} & {form(d - 1)})"
        if r < 0.4:
            return f"({form(d - 1)} | {form(d - 1)})"
        g = game(d - 1)
        return f"<{g}> {form(d - 1)}" if r < 0.7 else f"[{g}] {form(d - 1)}"

    return form(depth)
