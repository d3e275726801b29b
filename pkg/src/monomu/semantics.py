"""Finite neighbourhood models and the extension of formulas over them.

Subsets of the state set are bitmasks (bit ``i`` is state ``i``).  A model
stores its neighbourhoods extensionally; upward closure is built into the
semantics of the modalities:

* ``<a> phi`` holds at ``w`` if some ``S in N(a, w)`` is contained in
  the extension of ``phi``;
* ``[a] phi`` holds at ``w`` if every ``S in N(a, w)`` meets it.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

from monomu.formula import Formula, FormulaError, Op

__all__ = [
    "NeighbourhoodModel", "ModelError", "extension", "holds", "is_global_model",
    "TimeoutVector", "extension_timeout", "check_monotone_bisimulation",
    "submodel_modality", "SUBMODEL_LIMIT",
]

SUBMODEL_LIMIT = 12


class ModelError(ValueError):
    pass


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


class NeighbourhoodModel:
    """A finite neighbourhood model ``(W, N, I)``.

    ``nbhd[a][i]`` is the tuple of neighbourhood masks of state ``i`` for
    action ``a``; actions that are not mentioned have no neighbourhoods
    anywhere.  ``atoms[p]`` is the mask of states where ``p`` holds; the
    dual atom ``~p`` holds exactly elsewhere.
    """

    __slots__ = ("states", "index", "atoms", "nbhd", "full")

    def __init__(self, states, atoms=None, nbhd=None):
        self.states = tuple(str(s) for s in states)
        if len(set(self.states)) != len(self.states):
            raise ModelError("duplicate state names")
        self.index = {s: i for i, s in enumerate(self.states)}
        self.full = (1 << len(self.states)) - 1
        self.atoms = {}
        for p, m in (atoms or {}).items():
            if m & ~self.full:
                raise ModelError(f"atom {p} mentions unknown states")
            self.atoms[p] = m
        self.nbhd = {}
        for a, rows in (nbhd or {}).items():
            rows = tuple(tuple(sorted(set(r))) for r in rows)
            if len(rows) != len(self.states):
                raise ModelError(f"action {a}: need one neighbourhood list per state")
            for r in rows:
                for s in r:
                    if s & ~self.full:
                        raise ModelError(f"action {a}: neighbourhood outside W")
            self.nbhd[a] = rows

    # -- construction helpers
    @classmethod
    def from_sets(cls, states, atoms=None, nbhd=None) -> "NeighbourhoodModel":
        """Build from state names: ``atoms = {p: [w, ...]}`` and
        ``nbhd = {a: {w: [[u, v], ...]}}``."""
        states = [str(s) for s in states]
        idx = {s: i for i, s in enumerate(states)}

        def mask(names) -> int:
            m = 0
            for s in names:
                if str(s) not in idx:
                    raise ModelError(f"unknown state {s!r}")
                m |= 1 << idx[str(s)]
            return m

        amap = {p: mask(ws) for p, ws in (atoms or {}).items()}
        nmap = {}
        for a, per_state in (nbhd or {}).items():
            for w in per_state:
                if str(w) not in idx:
                    raise ModelError(f"unknown state {w!r}")
            nmap[a] = [[mask(S) for S in per_state.get(s, ())] for s in states]
        return cls(states, amap, nmap)

    @property
    def size(self) -> int:
        return len(self.states)

    def N(self, action: str, state: int) -> tuple:
        rows = self.nbhd.get(action)
        return rows[state] if rows is not None else ()

    def atom_mask(self, p: str) -> int:
        return self.atoms.get(p, 0)

    def names(self, mask: int) -> set:
        return {self.states[i] for i in _bits(mask)}

    def mask_of(self, names) -> int:
        return sum(1 << self.index[str(s)] for s in set(map(str, names)))

    # -- json
    def to_json_obj(self) -> dict:
        return {
            "states": list(self.states),
            "atoms": {p: sorted(self.names(m), key=self.index.get)
                      for p, m in sorted(self.atoms.items())},
            "nbhd": {a: {self.states[i]: [sorted(self.names(S), key=self.index.get) for S in row]
                         for i, row in enumerate(rows) if row}
                     for a, rows in sorted(self.nbhd.items())},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_obj(), **kw)

    @classmethod
    def from_json_obj(cls, obj) -> "NeighbourhoodModel":
        try:
            return cls.from_sets(obj["states"], obj.get("atoms", {}), obj.get("nbhd", {}))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ModelError(f"malformed model: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "NeighbourhoodModel":
        return cls.from_json_obj(json.loads(text))

    def __repr__(self) -> str:
        return f"NeighbourhoodModel({self.to_json()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, NeighbourhoodModel):
            return NotImplemented
        strip = lambda m: {a: r for a, r in m.nbhd.items() if any(r)}
        atoms = lambda m: {p: v for p, v in m.atoms.items() if v}
        return (self.states == other.states and atoms(self) == atoms(other)
                and strip(self) == strip(other))

    __hash__ = None


# ---------------------------------------------------------------- extension

class _Evaluator:
    """Extension computation with memoisation of closed subformulas."""

    def __init__(self, model: NeighbourhoodModel):
        self.m = model
        self.closed: dict = {}

    def dia(self, action: str, ext: int) -> int:
        out = 0
        for i, row in enumerate(self.m.nbhd.get(action, ())):
            for S in row:
                if S & ~ext == 0:
                    out |= 1 << i
                    break
        return out

    def box(self, action: str, ext: int) -> int:
        rows = self.m.nbhd.get(action)
        if rows is None:
            return self.m.full
        out = 0
        for i, row in enumerate(rows):
            if all(S & ext for S in row):
                out |= 1 << i
        return out

    def ev(self, f: Formula, env: dict) -> int:
        if not f.free:
            r = self.closed.get(f)
            if r is None:
                r = self.closed[f] = self._ev(f, {})
            return r
        return self._ev(f, env)

    def _ev(self, f: Formula, env: dict) -> int:
        m = self.m
        op = f.op
        if op is Op.TOP:
            return m.full
        if op is Op.BOT:
            return 0
        if op is Op.ATOM:
            return m.atom_mask(f.label)
        if op is Op.DUAL:
            return m.full & ~m.atom_mask(f.label)
        if op is Op.VAR:
            try:
                return env[f.label]
            except KeyError:
                raise FormulaError(f"valuation does not cover {f.label}") from None
        if op is Op.AND:
            left = self.ev(f.left, env)
            return left & self.ev(f.right, env) if left else 0
        if op is Op.OR:
            left = self.ev(f.left, env)
            return left | self.ev(f.right, env) if left != m.full else left
        if op is Op.DIA:
            return self.dia(f.label, self.ev(f.body, env))
        if op is Op.BOX:
            return self.box(f.label, self.ev(f.body, env))
        if op is Op.UBOX:
            return m.full if self.ev(f.body, {}) == m.full else 0
        if op is Op.UDIA:
            return m.full if self.ev(f.body, {}) else 0
        # fixpoints: Kleene iteration, stopping at the first repeat
        cur = 0 if op is Op.MU else m.full
        inner = dict(env)
        while True:
            inner[f.label] = cur
            nxt = self.ev(f.body, inner)
            if nxt == cur:
                return cur
            cur = nxt


def extension(model: NeighbourhoodModel, f: Formula, valuation: dict | None = None) -> int:
    """Extension of ``f`` in ``model`` as a state bitmask.

    ``valuation`` maps free variables to masks (or iterables of state names).
    """
    env = {}
    for x, v in (valuation or {}).items():
        env[x] = v if isinstance(v, int) else model.mask_of(v)
    missing = f.free - set(env)
    if missing:
        raise FormulaError(f"valuation does not cover {sorted(missing)}")
    return _Evaluator(model).ev(f, env)


def holds(model: NeighbourhoodModel, f: Formula, state) -> bool:
    i = state if isinstance(state, int) else model.index[str(state)]
    return bool(extension(model, f) >> i & 1)


def is_global_model(model: NeighbourhoodModel, phi: Formula) -> bool:
    """True iff ``phi`` holds at every state of ``model``."""
    return extension(model, phi) == model.full


# ----------------------------------------------------------------- timeouts

@dataclass(frozen=True)
class TimeoutVector:
    """Timeout ``(m_1, ..., m_k)`` with entries bounded by ``bound = |W|``."""

    values: tuple
    bound: int

    def __post_init__(self):
        if any(not 0 <= v <= self.bound for v in self.values):
            raise ValueError(f"timeout entries must lie in [0, {self.bound}]")

    @classmethod
    def full(cls, k: int, bound: int) -> "TimeoutVector":
        return cls((bound,) * k, bound)

    def __getitem__(self, i: int) -> int:
        """1-based access, matching variable indices."""
        return self.values[i - 1]

    def at(self, i: int) -> "TimeoutVector":
        """Decrease entry ``i`` (1-based) and reset all later entries."""
        if self.values[i - 1] == 0:
            raise ValueError(f"entry {i} is already 0")
        vals = self.values[:i - 1] + (self.values[i - 1] - 1,) + (self.bound,) * (len(self.values) - i)
        return TimeoutVector(vals, self.bound)


def extension_timeout(model: NeighbourhoodModel, f: Formula, timeout: TimeoutVector, ct) -> int:
    """Extension under a timeout for a closure formula ``f`` of ``ct``.

    Non-deferrals get their ordinary extension; for deferrals the
    definition follows the structure of the formula, and a least fixpoint
    ``mu X. psi`` is unfolded with the timeout decreased at ``idx(X)`` (and
    is empty once that entry is 0).
    """
    ev = _Evaluator(model)
    memo: dict = {}

    def go(i: int, t: TimeoutVector) -> int:
        if i not in ct.dfr:
            return ev.ev(ct.entries[i], {})
        key = (i, t.values)
        r = memo.get(key)
        if r is not None:
            return r
        op = ct.ops[i]
        s = ct.succ[i]
        if op is Op.AND:
            r = go(s[0], t) & go(s[1], t)
        elif op is Op.OR:
            r = go(s[0], t) | go(s[1], t)
        elif op is Op.DIA:
            r = ev.dia(ct.entries[i].label, go(s[0], t))
        elif op is Op.BOX:
            r = ev.box(ct.entries[i].label, go(s[0], t))
        elif op is Op.MU:
            j = ct.idx[ct.entries[i].label]
            r = 0 if t[j] == 0 else go(s[0], t.at(j))
        else:  # pragma: no cover - other operators are never deferrals
            r = ev.ev(ct.entries[i], {})
        memo[key] = r
        return r

    if len(timeout.values) != ct.k:
        raise ValueError(f"timeout needs {ct.k} entries, got {len(timeout.values)}")
    return go(ct.id(f), timeout)


# ------------------------------------------------------- bisimulation et al.

def _pairs(m1: NeighbourhoodModel, m2: NeighbourhoodModel, relation) -> set:
    out = set()
    for x, y in relation:
        i = x if isinstance(x, int) else m1.index[str(x)]
        j = y if isinstance(y, int) else m2.index[str(y)]
        out.add((i, j))
    return out


def check_monotone_bisimulation(m1: NeighbourhoodModel, m2: NeighbourhoodModel,
                                relation, atoms=None) -> bool:
    """Check that ``relation`` (pairs of states, by name or index) is a
    monotone bisimulation between ``m1`` and ``m2``.

    For every related ``(x, y)`` and action ``a``: each ``A in N1(a, x)``
    has a ``B in N2(a, y)`` whose every element is related to something in
    ``A``; symmetrically each ``B`` has such an ``A``; and ``x``, ``y``
    agree on all atoms (by default those interpreted in either model).
    """
    S = _pairs(m1, m2, relation)
    back: dict = {}
    fwd: dict = {}
    for i, j in S:
        fwd[i] = fwd.get(i, 0) | (1 << j)
        back[j] = back.get(j, 0) | (1 << i)
    props = set(m1.atoms) | set(m2.atoms) if atoms is None else set(atoms)
    actions = set(m1.nbhd) | set(m2.nbhd)

    def image(mask, table):
        out = 0
        for k in _bits(mask):
            out |= table.get(k, 0)
        return out

    for x, y in S:
        for p in props:
            if bool(m1.atom_mask(p) >> x & 1) != bool(m2.atom_mask(p) >> y & 1):
                return False
        for a in actions:
            n1, n2 = m1.N(a, x), m2.N(a, y)
            for A in n1:
                reach = image(A, fwd)
                if not any(B & ~reach == 0 for B in n2):
                    return False
            for B in n2:
                reach = image(B, back)
                if not any(A & ~reach == 0 for A in n1):
                    return False
    return True


def _induced(model: NeighbourhoodModel, sub: int):
    """Largest candidate submodel on the states in ``sub``: keep exactly the
    neighbourhoods lying inside ``sub``.  Returns ``(submodel, old_index)``."""
    keep = list(_bits(sub))
    new = {old: k for k, old in enumerate(keep)}

    def remap(mask):
        return sum(1 << new[i] for i in _bits(mask))

    atoms = {p: remap(m & sub) for p, m in model.atoms.items()}
    nbhd = {a: [[remap(S) for S in rows[i] if S & ~sub == 0] for i in keep]
            for a, rows in model.nbhd.items()}
    return NeighbourhoodModel([model.states[i] for i in keep], atoms, nbhd), keep


def submodel_modality(model: NeighbourhoodModel, phi: Formula, state) -> bool:
    """Whether ``state`` lies in a submodel all of whose states satisfy
    ``phi``.  Brute force over state subsets, so limited to small models.

    For a fixed state subset, keeping exactly the neighbourhoods contained
    in it is a submodel whenever any submodel on that subset exists, so one
    candidate per subset suffices.
    """
    if model.size > SUBMODEL_LIMIT:
        raise ModelError(f"submodel search limited to {SUBMODEL_LIMIT} states")
    w = state if isinstance(state, int) else model.index[str(state)]
    others = [i for i in range(model.size) if i != w]
    for r in range(len(others) + 1):
        for combo in itertools.combinations(others, r):
            sub = (1 << w) | sum(1 << i for i in combo)
            cand, keep = _induced(model, sub)
            incl = [(k, old) for k, old in enumerate(keep)]
            if not check_monotone_bisimulation(cand, model, incl):
                continue
            if is_global_model(cand, phi):
                return True
    return False
