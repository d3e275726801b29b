"""Closure tables and the syntactic side conditions on input formulas.

The satisfiability procedure works on a pair ``(rho1, rho0)`` of closed,
clean, irredundant, guarded and alternation-free formulas (``rho0`` is the
global assumption).  This module checks those conditions, repairs what can
be repaired (cleanliness, irredundancy, guardedness) and computes the
closure together with the per-entry metadata the game needs.

Closure entries are identified up to renaming of bound variables: two
closed formulas that differ only in binder names become one entry.  Within
the formulas themselves names are kept, so that the binding map
``theta`` of a clean formula is well defined.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from monomu.formula import (
    BOT, TOP, Formula, FormulaError, Op, binder_names, fix, rebuild,
    simplify, subformulas, subst, var,
)

__all__ = [
    "FormulaDiagnostics", "ValidationError", "validate", "binding_map",
    "make_clean_irredundant", "guardedness_transform", "prepare",
    "ClosureTable", "closure", "alpha_key", "raw_closure", "clf",
]


class ValidationError(FormulaError):
    def __init__(self, diagnostics: "FormulaDiagnostics"):
        self.diagnostics = diagnostics
        super().__init__(diagnostics.summary())


@dataclass
class FormulaDiagnostics:
    is_closed: bool = True
    is_clean: bool = True
    is_irredundant: bool = True
    is_guarded: bool = True
    is_alternation_free: bool = True
    open_formulas: list = field(default_factory=list)
    unclean: list = field(default_factory=list)
    redundant: list = field(default_factory=list)
    unguarded: list = field(default_factory=list)
    alternating: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.is_closed and self.is_clean and self.is_irredundant
                and self.is_guarded and self.is_alternation_free)

    def summary(self) -> str:
        parts = []
        for flag, label, items in (
                (self.is_closed, "not closed", self.open_formulas),
                (self.is_clean, "not clean", self.unclean),
                (self.is_irredundant, "not irredundant", self.redundant),
                (self.is_guarded, "not guarded", self.unguarded),
                (self.is_alternation_free, "not alternation-free", self.alternating)):
            if not flag:
                shown = ", ".join(str(f) for f in items[:3])
                parts.append(f"{label}: {shown}")
        return "; ".join(parts) or "ok"


# ------------------------------------------------------------------ analysis

_UG: dict = {}


def unguarded_vars(f: Formula) -> frozenset:
    """Free variables of ``f`` with an occurrence not under a modal operator."""
    r = _UG.get(f)
    if r is not None:
        return r
    op = f.op
    if op is Op.VAR:
        r = f.free
    elif op in (Op.DIA, Op.BOX, Op.UBOX, Op.UDIA) or not f.free:
        r = frozenset()
    elif op in (Op.MU, Op.NU):
        r = unguarded_vars(f.body) - {f.label}
    else:
        r = unguarded_vars(f.left) | unguarded_vars(f.right)
    _UG[f] = r
    return r


def _alternating(roots) -> list:
    """Subformula occurrences with both a free mu- and a free nu-variable."""
    bad: dict = {}
    memo: dict = {}

    def go(f: Formula, env: dict) -> frozenset:
        key = (f, tuple(sorted((v, env.get(v)) for v in f.free)))
        r = memo.get(key)
        if r is not None:
            return r
        kinds = frozenset(env[v] for v in f.free if v in env)
        if len(kinds) > 1:
            bad.setdefault(f, None)
        if f.is_binder:
            go(f.body, {**env, f.label: f.op})
        else:
            for a in f.args:
                go(a, env if a.free else {})
        memo[key] = kinds
        return kinds

    for r in roots:
        go(r, {})
    return list(bad)


def validate(*roots: Formula) -> FormulaDiagnostics:
    """Check closedness, cleanliness, irredundancy, guardedness and
    alternation-freeness of ``roots`` (jointly, as one binding context)."""
    d = FormulaDiagnostics()
    for r in roots:
        if r.free:
            d.is_closed = False
            d.open_formulas.append(r)
    subs = subformulas(*roots)
    by_name: dict = {}
    for f in subs:
        if f.is_binder:
            by_name.setdefault(f.label, []).append(f)
            if f.label not in f.body.free:
                d.is_irredundant = False
                d.redundant.append(f)
            if f.label in unguarded_vars(f.body):
                d.is_guarded = False
                d.unguarded.append(f)
    for name in sorted(by_name):
        if len(by_name[name]) > 1:
            d.is_clean = False
            d.unclean.extend(by_name[name])
    d.alternating = _alternating(roots)
    d.is_alternation_free = not d.alternating
    return d


def binding_map(*roots: Formula) -> dict:
    """``theta``: variable name -> the unique binder of that name."""
    theta: dict = {}
    for f in subformulas(*roots):
        if f.is_binder:
            other = theta.setdefault(f.label, f)
            if other is not f:
                raise ValidationError(validate(*roots))
    return theta


# ---------------------------------------------------------- transformations

def _fresh_factory(taken: set):
    def fresh(base: str) -> str:
        stem = base.rstrip("0123456789").rstrip("_") or "X"
        i = 1
        while f"{stem}_{i}" in taken:
            i += 1
        name = f"{stem}_{i}"
        taken.add(name)
        return name
    return fresh


def make_clean_irredundant(*roots: Formula):
    """Rename binders apart and drop vacuous binders.

    All roots are treated as one binding context, so the results can serve
    as ``rho1``/``rho0`` together.  Returns a single formula when called with
    one argument, a tuple otherwise.  Shared subterms in the same variable
    context keep one name, so clean input comes back unchanged.
    """
    taken = binder_names(*roots) | {v for r in roots for v in r.free}
    fresh = _fresh_factory(taken)
    used: set = set()
    memo: dict = {}

    def go(f: Formula, env: dict) -> Formula:
        key = (f, tuple(sorted((v, env[v]) for v in f.free if v in env)))
        r = memo.get(key)
        if r is not None:
            return r
        op = f.op
        if op is Op.VAR:
            r = var(env.get(f.label, f.label))
        elif f.is_binder:
            x = f.label
            if x not in f.body.free:
                r = go(f.body, env)
            else:
                name = x if x not in used else fresh(x)
                used.add(name)
                r = fix(op, name, go(f.body, {**env, x: name}))
        elif op in (Op.UBOX, Op.UDIA):
            r = rebuild(f, (go(f.body, {}),))
        elif f.args:
            r = rebuild(f, tuple(go(a, env) for a in f.args))
        else:
            r = f
        memo[key] = r
        return r

    out = tuple(go(r, {}) for r in roots)
    return out[0] if len(out) == 1 else out


def _replace_unguarded(f: Formula, x: str, const: Formula) -> Formula:
    if x not in unguarded_vars(f):
        return f
    if f.op is Op.VAR:
        return const
    return rebuild(f, tuple(_replace_unguarded(a, x, const) for a in f.args))


def _expose(f: Formula, x: str) -> Formula:
    """Unfold nested binders under which ``x`` occurs unguarded so that all
    unguarded occurrences of ``x`` sit directly under and/or."""
    if x not in unguarded_vars(f) or f.op is Op.VAR:
        return f
    if f.is_binder:
        return _expose(subst(f.body, f.label, f), x)
    return rebuild(f, tuple(_expose(a, x) for a in f.args))


def guardedness_transform(f: Formula) -> Formula:
    """Equivalent formula in which every bound variable is guarded.

    Works bottom-up: once the body of ``eta X. phi`` is guarded in its own
    inner variables, inner binders that hide an unguarded ``X`` are unfolded
    once, after which all unguarded occurrences of ``X`` are propositional
    and can be replaced by ``false`` (for mu) or ``true`` (for nu).
    Already guarded formulas are returned unchanged.
    """
    memo: dict = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g)
        if r is not None:
            return r
        if not g.args:
            r = g
        elif g.is_binder:
            x = g.label
            body = go(g.body)
            if x in unguarded_vars(body):
                body = _expose(body, x)
                body = simplify(_replace_unguarded(body, x, BOT if g.op is Op.MU else TOP))
            r = fix(g.op, x, body) if x in body.free else body
        else:
            r = rebuild(g, tuple(go(a) for a in g.args))
        memo[g] = r
        return r

    if validate(f).is_guarded:
        return f
    return go(f)


def prepare(rho1: Formula, rho0: Formula = TOP):
    """Bring ``(rho1, rho0)`` into the shape the game requires.

    Cleanliness, irredundancy and guardedness are repaired; a violation of
    closedness or alternation-freeness is a hard :class:`ValidationError`.
    """
    for r in (rho1, rho0):
        if r.free:
            d = FormulaDiagnostics(is_closed=False, open_formulas=[r])
            raise ValidationError(d)
    rho1, rho0 = make_clean_irredundant(rho1, rho0)
    d = validate(rho1, rho0)
    if not d.is_alternation_free:
        raise ValidationError(d)
    if not d.is_guarded:
        rho1, rho0 = guardedness_transform(rho1), guardedness_transform(rho0)
        rho1, rho0 = make_clean_irredundant(rho1, rho0)
        d = validate(rho1, rho0)
    if not d.ok:  # pragma: no cover - the repairs above are total
        raise ValidationError(d)
    return rho1, rho0


# ------------------------------------------------------------ alpha identity

_KEYS: dict = {}
_ALPHA: dict = {}


def _intern_key(t) -> int:
    k = _KEYS.get(t)
    if k is None:
        k = _KEYS[t] = len(_KEYS)
    return k


def alpha_key(f: Formula, rel: dict | None = None) -> int:
    """Integer key equal for exactly the alpha-equivalent formulas.

    ``rel`` maps free variable names to de Bruijn distances; omitted for
    closed formulas.
    """
    rel = rel or {}
    memo_key = (f, tuple(sorted((v, rel[v]) for v in f.free if v in rel)))
    k = _ALPHA.get(memo_key)
    if k is not None:
        return k
    op = f.op
    if op is Op.VAR:
        t = (op, "#", rel[f.label]) if f.label in rel else (op, f.label)
    elif f.is_binder:
        inner = {v: i + 1 for v, i in rel.items()}
        inner[f.label] = 0
        t = (op, alpha_key(f.body, inner))
    else:
        t = (op, f.label) + tuple(alpha_key(a, rel) for a in f.args)
    k = _intern_key(t)
    _ALPHA[memo_key] = k
    return k


def unfold(f: Formula) -> Formula:
    """``phi[eta X. phi / X]`` for a fixpoint formula ``eta X. phi``."""
    return subst(f.body, f.label, f)


def _successors(f: Formula) -> tuple:
    if f.is_binder:
        return (unfold(f),)
    return f.args


def raw_closure(*roots: Formula) -> list:
    """Closure of closed formulas without any side conditions, up to
    alpha-equivalence.  Used for size measurements."""
    seen: dict = {}
    out = []
    queue = deque(roots)
    while queue:
        f = queue.popleft()
        k = alpha_key(f)
        if k in seen:
            continue
        seen[k] = f
        out.append(f)
        queue.extend(_successors(f))
    return out


def clf(phi: Formula, theta: dict) -> Formula:
    """Close ``phi`` by substituting binders for its free variables,
    innermost binder first."""
    while phi.free:
        x = min(phi.free, key=lambda v: (theta[v].size, v))
        phi = subst(phi, x, theta[x])
    return phi


# ------------------------------------------------------------ closure table

class ClosureTable:
    """Canonical closure ``cl = cl(rho1) U cl(rho0)`` with metadata.

    Entries are numbered ``0..n-1`` in breadth-first order from ``rho1`` and
    then ``rho0``.  Sets of entries are handled as integer bitmasks by the
    game; the ``*_mask`` attributes support that.
    """

    def __init__(self, rho1: Formula, rho0: Formula = TOP):
        d = validate(rho1, rho0)
        if not d.ok:
            raise ValidationError(d)
        self.rho1 = rho1
        self.rho0 = rho0
        self.theta = binding_map(rho1, rho0)
        self.var_kind = {x: b.op for x, b in self.theta.items()}
        self.entries: list[Formula] = []
        self._by_key: dict = {}
        self._canon: dict = {}
        self._saturate()
        self.n = len(self.entries)
        self.idx = self._indices()
        self.k = max(self.idx.values(), default=0)
        self.dfr = self._deferrals()
        self.dfr_mask = sum(1 << i for i in self.dfr)
        self._tables()

    # -- construction
    def _saturate(self):
        queue = deque([self.rho1, self.rho0])
        self.ops: list[Op] = []
        self.succ: list[tuple] = []
        pending = []
        while queue:
            f = queue.popleft()
            if self.lookup(f) is not None:
                continue
            i = len(self.entries)
            self.entries.append(f)
            self._by_key[alpha_key(f)] = i
            self._canon[f] = i
            self.ops.append(f.op)
            nxt = _successors(f)
            pending.append(nxt)
            queue.extend(nxt)
        self.succ = [tuple(self.lookup(g) for g in nxt) for nxt in pending]
        self.rho1_id = self.lookup(self.rho1)
        self.rho0_id = self.lookup(self.rho0)

    def _indices(self) -> dict:
        mus = [b for b in self.theta.values() if b.op is Op.MU]
        below: dict = {}
        for b in mus:
            found = set()
            stack = [b.body]
            seen = set()
            while stack:
                g = stack.pop()
                if g in seen or g.op is Op.NU:
                    continue
                seen.add(g)
                if g.op is Op.MU:
                    found.add(g.label)
                stack.extend(g.args)
            below[b.label] = found
        return {b.label: 1 + sum(1 for y in below if b.label in below[y] and y != b.label)
                for b in mus}

    def _deferrals(self) -> frozenset:
        out = set()
        for chi in subformulas(self.rho1, self.rho0):
            if any(self.var_kind.get(v) is Op.MU for v in chi.free):
                i = self.lookup(clf(chi, self.theta))
                if i is None:  # pragma: no cover - clf lands in the closure
                    raise AssertionError(f"clf({chi}) not in closure")
                out.add(i)
        return frozenset(out)

    def _tables(self):
        n = self.n
        self.complex_mask = 0
        self.bot_mask = 0
        self.add = [None] * n  # id -> (mask for bit 0, mask for bit 1 or None)
        pos: dict = {}
        neg: dict = {}
        self.dia_of: dict = {}
        self.box_of: dict = {}
        for i, op in enumerate(self.ops):
            s = self.succ[i]
            if op is Op.AND:
                self.add[i] = ((1 << s[0]) | (1 << s[1]), None)
            elif op is Op.OR:
                self.add[i] = (1 << s[0], 1 << s[1])
            elif op in (Op.MU, Op.NU):
                self.add[i] = (1 << s[0], None)
            if self.add[i] is not None:
                self.complex_mask |= 1 << i
            if op is Op.BOT:
                self.bot_mask |= 1 << i
            elif op is Op.ATOM:
                pos[self.entries[i].label] = i
            elif op is Op.DUAL:
                neg[self.entries[i].label] = i
            elif op is Op.DIA:
                self.dia_of.setdefault(self.entries[i].label, []).append(i)
            elif op is Op.BOX:
                self.box_of.setdefault(self.entries[i].label, []).append(i)
        self.clash_pairs = [(1 << pos[p], 1 << neg[p]) for p in sorted(pos) if p in neg]
        self.dia_mask = {a: sum(1 << i for i in ids) for a, ids in self.dia_of.items()}
        self.box_mask = {a: sum(1 << i for i in ids) for a, ids in self.box_of.items()}
        self.actions = sorted(set(self.dia_of) | set(self.box_of))

    # -- lookup helpers
    def lookup(self, f: Formula) -> int | None:
        """Entry id of ``f`` up to alpha-equivalence, or ``None``."""
        i = self._canon.get(f)
        if i is None and not f.free:
            i = self._by_key.get(alpha_key(f))
            if i is not None:
                self._canon[f] = i
        return i

    def id(self, f: Formula) -> int:
        i = self.lookup(f)
        if i is None:
            raise KeyError(f"{f} is not in the closure")
        return i

    def __contains__(self, f: Formula) -> bool:
        return self.lookup(f) is not None

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Formula:
        return self.entries[i]

    def canon(self, f: Formula) -> Formula:
        return self.entries[self.id(f)]

    def mask(self, formulas) -> int:
        m = 0
        for f in formulas:
            m |= 1 << (f if isinstance(f, int) else self.id(f))
        return m

    def ids(self, mask: int) -> list[int]:
        out = []
        while mask:
            low = mask & -mask
            out.append(low.bit_length() - 1)
            mask ^= low
        return out

    def formulas(self, mask: int) -> frozenset:
        return frozenset(self.entries[i] for i in self.ids(mask))

    def is_deferral(self, f: Formula) -> bool:
        return self.id(f) in self.dfr

    def deferrals(self) -> frozenset:
        return frozenset(self.entries[i] for i in self.dfr)

    def clf(self, phi: Formula) -> Formula:
        """Closed form of a subformula of ``rho1``/``rho0`` (canonical entry)."""
        missing = [v for v in phi.free if v not in self.theta]
        if missing:
            raise FormulaError(f"unbound variable(s) {sorted(missing)} in {phi}")
        return self.canon(clf(phi, self.theta))

    def clashing(self, mask: int) -> bool:
        if mask & self.bot_mask:
            return True
        for p, q in self.clash_pairs:
            if mask & p and mask & q:
                return True
        return False

    def is_state(self, mask: int) -> bool:
        """Formal state: no ``false``, no clash, no top-level and/or/fixpoint."""
        return not (mask & self.complex_mask) and not self.clashing(mask)


def closure(rho1: Formula, rho0: Formula = TOP) -> ClosureTable:
    return ClosureTable(rho1, rho0)
