"""Hash-consed formulas of the monotone mu-calculus with the universal modality.

Formulas are kept in negation normal form: negation only occurs on atoms
(``DUAL``).  Every node is interned, so two structurally equal formulas are
the same Python object and ``is``/``==`` are O(1) identity checks.

Naming conventions are enforced at construction time so that printed
formulas always parse back to the identical object:

* atoms start with a lowercase letter (``p``, ``q1``),
* fixpoint variables start with an uppercase letter (``X``, ``Y_2``),
* actions are arbitrary identifiers.
"""

from __future__ import annotations

import enum
import re

__all__ = [
    "Op", "Formula", "FormulaError",
    "TOP", "BOT", "atom", "dual", "conj", "disj", "dia", "box", "var",
    "mu", "nu", "fix", "ubox", "udia", "conj_all", "disj_all",
    "negate", "subst", "subformulas", "atoms_of", "actions_of", "simplify",
    "binder_names",
]


class FormulaError(ValueError):
    """Raised for ill-formed formulas (bad names, open universal bodies, ...)."""


class Op(enum.IntEnum):
    BOT = 0
    TOP = 1
    ATOM = 2
    DUAL = 3
    AND = 4
    OR = 5
    DIA = 6
    BOX = 7
    VAR = 8
    MU = 9
    NU = 10
    UBOX = 11
    UDIA = 12


_ATOM_RE = re.compile(r"[a-z][A-Za-z0-9_']*\Z")
_VAR_RE = re.compile(r"[A-Z][A-Za-z0-9_']*\Z")
_ACTION_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
KEYWORDS = frozenset({"mu", "nu", "true", "false", "A", "E"})

_TABLE: dict = {}


class Formula:
    """An interned formula node.  Never instantiate directly."""

    __slots__ = ("op", "label", "args", "free", "size", "__weakref__")

    op: Op
    label: str | None
    args: tuple
    free: frozenset
    size: int

    def __new__(cls, *a, **kw):  # pragma: no cover - guard
        raise TypeError("use the constructor functions in monomu.formula")

    @property
    def left(self) -> Formula:
        return self.args[0]

    @property
    def right(self) -> Formula:
        return self.args[1]

    @property
    def body(self) -> Formula:
        return self.args[-1]

    @property
    def action(self) -> str:
        assert self.op in (Op.DIA, Op.BOX)
        return self.label

    @property
    def name(self) -> str:
        return self.label

    @property
    def is_closed(self) -> bool:
        return not self.free

    @property
    def is_binder(self) -> bool:
        return self.op in (Op.MU, Op.NU)

    @property
    def is_modal(self) -> bool:
        return self.op in (Op.DIA, Op.BOX)

    def __repr__(self) -> str:
        return f"Formula({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)


def _make(op: Op, label, args) -> Formula:
    key = (op, label, args)
    node = _TABLE.get(key)
    if node is not None:
        return node
    node = object.__new__(Formula)
    node.op = op
    node.label = label
    node.args = args
    if op is Op.VAR:
        node.free = frozenset((label,))
    elif op in (Op.MU, Op.NU):
        node.free = args[0].free - {label}
    elif len(args) == 1:
        node.free = args[0].free
    elif len(args) == 2:
        node.free = args[0].free | args[1].free
    else:
        node.free = frozenset()
    node.size = 1 + sum(a.size for a in args)
    _TABLE[key] = node
    return node


def _check(regex, kind, name):
    if not isinstance(name, str) or not regex.match(name) or name in KEYWORDS:
        raise FormulaError(f"invalid {kind} name {name!r}")


TOP = _make(Op.TOP, None, ())
BOT = _make(Op.BOT, None, ())


def atom(name: str) -> Formula:
    _check(_ATOM_RE, "atom", name)
    return _make(Op.ATOM, name, ())


def dual(name: str) -> Formula:
    """The negated atom, written ``~name``."""
    _check(_ATOM_RE, "atom", name)
    return _make(Op.DUAL, name, ())


def conj(lhs: Formula, rhs: Formula) -> Formula:
    return _make(Op.AND, None, (lhs, rhs))


def disj(lhs: Formula, rhs: Formula) -> Formula:
    return _make(Op.OR, None, (lhs, rhs))


def conj_all(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = conj(out, p)
    return out


def disj_all(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return BOT
    out = parts[0]
    for p in parts[1:]:
        out = disj(out, p)
    return out


def dia(action: str, body: Formula) -> Formula:
    _check(_ACTION_RE, "action", action)
    return _make(Op.DIA, action, (body,))


def box(action: str, body: Formula) -> Formula:
    _check(_ACTION_RE, "action", action)
    return _make(Op.BOX, action, (body,))


def var(name: str) -> Formula:
    _check(_VAR_RE, "variable", name)
    return _make(Op.VAR, name, ())


def mu(name: str, body: Formula) -> Formula:
    _check(_VAR_RE, "variable", name)
    return _make(Op.MU, name, (body,))


def nu(name: str, body: Formula) -> Formula:
    _check(_VAR_RE, "variable", name)
    return _make(Op.NU, name, (body,))


def fix(op: Op, name: str, body: Formula) -> Formula:
    return mu(name, body) if op is Op.MU else nu(name, body)


def ubox(body: Formula) -> Formula:
    if body.free:
        raise FormulaError(
            f"body of [A] must be closed, free: {sorted(body.free)}")
    return _make(Op.UBOX, None, (body,))


def udia(body: Formula) -> Formula:
    if body.free:
        raise FormulaError(
            f"body of [E] must be closed, free: {sorted(body.free)}")
    return _make(Op.UDIA, None, (body,))


def rebuild(f: Formula, args: tuple) -> Formula:
    """``f`` with its children replaced; returns ``f`` itself if unchanged."""
    if all(a is b for a, b in zip(args, f.args)):
        return f
    if f.op in (Op.UBOX, Op.UDIA):
        return (ubox if f.op is Op.UBOX else udia)(args[0])
    return _make(f.op, f.label, tuple(args))


# ---------------------------------------------------------------- traversal

def subformulas(*roots: Formula) -> list[Formula]:
    """Distinct subformula nodes of ``roots`` in deterministic pre-order."""
    seen = set()
    out = []
    stack = list(reversed(roots))
    while stack:
        f = stack.pop()
        if f in seen:
            continue
        seen.add(f)
        out.append(f)
        stack.extend(reversed(f.args))
    return out


def atoms_of(*roots: Formula) -> list[str]:
    return sorted({f.label for f in subformulas(*roots) if f.op in (Op.ATOM, Op.DUAL)})


def actions_of(*roots: Formula) -> list[str]:
    return sorted({f.label for f in subformulas(*roots) if f.is_modal})


def binder_names(*roots: Formula) -> set[str]:
    return {f.label for f in subformulas(*roots) if f.is_binder}


# ------------------------------------------------------------ transformations

_NEG_OP = {Op.AND: Op.OR, Op.OR: Op.AND, Op.DIA: Op.BOX, Op.BOX: Op.DIA,
           Op.MU: Op.NU, Op.NU: Op.MU, Op.UBOX: Op.UDIA, Op.UDIA: Op.UBOX}


def negate(f: Formula) -> Formula:
    """Negation normal form of the negation of ``f``.

    Variables are mapped to themselves, which is the usual convention that
    makes ``negate`` correct on closed formulas.
    """
    memo: dict = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g)
        if r is not None:
            return r
        op = g.op
        if op is Op.TOP:
            r = BOT
        elif op is Op.BOT:
            r = TOP
        elif op is Op.ATOM:
            r = _make(Op.DUAL, g.label, ())
        elif op is Op.DUAL:
            r = _make(Op.ATOM, g.label, ())
        elif op is Op.VAR:
            r = g
        else:
            args = tuple(go(a) for a in g.args)
            r = _make(_NEG_OP[op], g.label, args)
        memo[g] = r
        return r

    return go(f)


def subst(f: Formula, name: str, g: Formula) -> Formula:
    """Replace the free occurrences of variable ``name`` in ``f`` by ``g``."""
    if name not in f.free:
        return f
    memo: dict = {}
    gfree = g.free

    def go(h: Formula) -> Formula:
        if name not in h.free:
            return h
        r = memo.get(h)
        if r is not None:
            return r
        if h.op is Op.VAR:
            r = g
        else:
            if h.is_binder and h.label in gfree:
                raise FormulaError(
                    f"substitution would capture {h.label} under its binder")
            r = rebuild(h, tuple(go(a) for a in h.args))
        memo[h] = r
        return r

    return go(f)


def simplify(f: Formula) -> Formula:
    """Remove ``true``/``false`` units and vacuous binders bottom-up."""
    memo: dict = {}

    def go(h: Formula) -> Formula:
        r = memo.get(h)
        if r is not None:
            return r
        if not h.args:
            r = h
        else:
            args = tuple(go(a) for a in h.args)
            op = h.op
            if op is Op.AND:
                a, b = args
                if a is BOT or b is BOT:
                    r = BOT
                elif a is TOP:
                    r = b
                elif b is TOP or a is b:
                    r = a
                else:
                    r = rebuild(h, args)
            elif op is Op.OR:
                a, b = args
                if a is TOP or b is TOP:
                    r = TOP
                elif a is BOT:
                    r = b
                elif b is BOT or a is b:
                    r = a
                else:
                    r = rebuild(h, args)
            elif op in (Op.MU, Op.NU) and h.label not in args[0].free:
                r = args[0]
            elif op in (Op.UBOX, Op.UDIA) and args[0] in (TOP, BOT):
                r = args[0]
            else:
                r = rebuild(h, args)
        memo[h] = r
        return r

    return go(f)


# ------------------------------------------------------------------ printing

_PREC_OR, _PREC_AND, _PREC_PREFIX = 1, 2, 3


def to_text(f: Formula) -> str:
    """Render ``f`` in the concrete syntax accepted by ``monomu.parser``."""
    memo: dict = {}

    def go(g: Formula, ctx: str) -> str:
        key = (g, ctx)
        s = memo.get(key)
        if s is not None:
            return s
        op = g.op
        if op is Op.TOP:
            s = "true"
        elif op is Op.BOT:
            s = "false"
        elif op is Op.ATOM or op is Op.VAR:
            s = g.label
        elif op is Op.DUAL:
            s = "~" + g.label
        elif op in (Op.AND, Op.OR):
            sym = " & " if op is Op.AND else " | "
            s = go(g.left, f"{op.name}-left") + sym + go(g.right, f"{op.name}-right")
            if ctx in ("prefix", "binder") or (ctx.startswith("AND") and op is Op.OR) \
                    or ctx == f"{op.name}-right":
                s = f"({s})"
        elif op in (Op.MU, Op.NU):
            s = f"{'mu' if op is Op.MU else 'nu'} {g.label}. {go(g.body, 'binder')}"
            if ctx not in ("top", "binder"):
                s = f"({s})"
        else:
            if op is Op.DIA:
                head = f"<{g.label}> "
            elif op is Op.BOX:
                head = f"[{g.label}] "
            elif op is Op.UBOX:
                head = "A "
            else:
                head = "E "
            s = head + go(g.body, "prefix")
        memo[key] = s
        return s

    return go(f, "top")
