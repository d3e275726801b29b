"""Independent test oracles.

* :func:`brute_force_sat` enumerates every small neighbourhood model (up to
  renaming of states) and evaluates formulas on all of them at once with
  numpy.  Its evaluator shares no code with :mod:`monomu.semantics`.
* The relational translation ``t`` turns neighbourhoods into extra states
  connected to their members by a reserved relation ``e``:
  ``t([a] psi) = [a] <e> t(psi)`` and ``t(<a> psi) = <a> [e] t(psi)``.
  :func:`model_to_relational`, :func:`relational_to_model` and
  :func:`relational_eval` let tests compare both sides.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from monomu.formula import (
    Formula, FormulaError, Op, actions_of, atoms_of, box, conj, conj_all, dia, nu,
    rebuild, subformulas, var,
)
from monomu.semantics import NeighbourhoodModel

__all__ = [
    "OracleBoundError", "BruteResult", "brute_force_sat", "model_space",
    "RelationalModel", "relational_translate", "boxtimes", "model_to_relational",
    "relational_to_model", "relational_eval", "E_SYMBOL",
    "MAX_STATES", "MAX_MODELS",
]

E_SYMBOL = "e"
MAX_STATES = 4
MAX_MODELS = 6_000_000


class OracleBoundError(ValueError):
    pass


# ------------------------------------------------------------ brute force

class _Space:
    """All models over ``n`` states for fixed atoms/actions, canonical up
    to state permutation.  ``nb[a]`` has shape ``(M, n)`` with indices into
    ``choices``; ``at[p]`` has shape ``(M,)`` with state masks."""

    def __init__(self, n: int, atoms: tuple, actions: tuple, max_nbhds: int):
        self.n = n
        self.full = (1 << n) - 1
        self.atoms, self.actions = atoms, actions
        subsets = range(1 << n)
        self.choices = [c for k in range(max_nbhds + 1)
                        for c in itertools.combinations(subsets, k)]
        C = len(self.choices)
        slots = len(actions) * n
        total = C ** slots * (1 << n) ** len(atoms)
        if total > MAX_MODELS:
            raise OracleBoundError(f"{total} models exceed the oracle cap {MAX_MODELS}")
        # modal lookup tables: choice x extension mask -> bool
        ext = np.arange(1 << n)
        self.DIA = np.zeros((C, 1 << n), dtype=bool)
        self.BOX = np.ones((C, 1 << n), dtype=bool)
        for ci, c in enumerate(self.choices):
            for S in c:
                self.DIA[ci] |= (S & ~ext) == 0
                self.BOX[ci] &= (S & ext) != 0
        # enumerate in mixed radix: slot digits then atom masks
        radices = [C] * slots + [1 << n] * len(atoms)
        grids = np.indices(radices, dtype=np.int32).reshape(len(radices), -1) if radices \
            else np.zeros((0, 1), dtype=np.int32)
        keep = self._canonical(grids, radices)
        grids = grids[:, keep]
        self.M = grids.shape[1]
        self.nb = {a: grids[i * n:(i + 1) * n].T.copy() for i, a in enumerate(actions)}
        self.at = {p: grids[slots + j].astype(np.int64) for j, p in enumerate(atoms)}

    def _canonical(self, grids, radices):
        n = self.n
        if n == 1 or grids.shape[1] == 0:
            return np.ones(grids.shape[1], dtype=bool)
        index = {c: i for i, c in enumerate(self.choices)}
        slots = len(self.actions) * n

        def code(g):
            out = np.zeros(g.shape[1], dtype=np.int64)
            for r, row in zip(radices, g):
                out = out * r + row
            return out

        own = code(grids)
        keep = np.ones(grids.shape[1], dtype=bool)
        for perm in itertools.permutations(range(n)):
            if perm == tuple(range(n)):
                continue
            pm = np.array([sum(1 << perm[i] for i in range(n) if S >> i & 1)
                           for S in range(1 << n)])
            pc = np.array([index[tuple(sorted(int(pm[S]) for S in c))] for c in self.choices])
            g2 = np.empty_like(grids)
            for ai in range(len(self.actions)):
                for w in range(n):
                    g2[ai * n + perm[w]] = pc[grids[ai * n + w]]
            for j in range(len(self.atoms)):
                g2[slots + j] = pm[grids[slots + j]]
            keep &= own <= code(g2)
        return keep

    # -- vectorised evaluation
    def _modal(self, table, action, ext):
        out = np.zeros(self.M, dtype=np.int64)
        if action not in self.nb:
            return out if table is self.DIA else out + self.full
        nb = self.nb[action]
        for w in range(self.n):
            out |= table[nb[:, w], ext].astype(np.int64) << w
        return out

    def evaluate(self, f: Formula) -> np.ndarray:
        memo: dict = {}
        full = self.full

        def ev(g: Formula, env: dict):
            key = g if not g.free else None
            if key is not None and key in memo:
                return memo[key]
            op = g.op
            if op is Op.TOP:
                r = np.full(self.M, full, dtype=np.int64)
            elif op is Op.BOT:
                r = np.zeros(self.M, dtype=np.int64)
            elif op is Op.ATOM:
                r = self.at.get(g.label, np.zeros(self.M, dtype=np.int64))
            elif op is Op.DUAL:
                r = full & ~self.at.get(g.label, np.zeros(self.M, dtype=np.int64))
            elif op is Op.VAR:
                r = env[g.label]
            elif op is Op.AND:
                r = ev(g.left, env) & ev(g.right, env)
            elif op is Op.OR:
                r = ev(g.left, env) | ev(g.right, env)
            elif op is Op.DIA:
                r = self._modal(self.DIA, g.label, ev(g.body, env))
            elif op is Op.BOX:
                r = self._modal(self.BOX, g.label, ev(g.body, env))
            elif op is Op.UBOX:
                r = np.where(ev(g.body, {}) == full, full, 0)
            elif op is Op.UDIA:
                r = np.where(ev(g.body, {}) != 0, full, 0)
            else:
                cur = np.zeros(self.M, dtype=np.int64) if op is Op.MU \
                    else np.full(self.M, full, dtype=np.int64)
                for _ in range(self.n + 1):
                    nxt = ev(g.body, {**env, g.label: cur})
                    if np.array_equal(nxt, cur):
                        break
                    cur = nxt
                r = cur
            if key is not None:
                memo[key] = r
            return r

        return ev(f, {})

    def model(self, k: int) -> NeighbourhoodModel:
        atoms = {p: int(self.at[p][k]) for p in self.atoms}
        nbhd = {a: [list(self.choices[int(c)]) for c in self.nb[a][k]] for a in self.actions}
        return NeighbourhoodModel([f"w{i}" for i in range(self.n)], atoms, nbhd)


@lru_cache(maxsize=32)
def model_space(n: int, atoms: tuple, actions: tuple, max_nbhds: int) -> _Space:
    return _Space(n, atoms, actions, max_nbhds)


@dataclass
class BruteResult:
    sat: bool
    model: NeighbourhoodModel | None = None
    models_checked: int = 0

    def __bool__(self) -> bool:
        return self.sat


def brute_force_sat(psi: Formula, phi: Formula, max_states: int = 2,
                    max_nbhds: int = 2) -> BruteResult:
    """Search all models with at most ``max_states`` states and at most
    ``max_nbhds`` neighbourhoods per state and action for one where ``phi``
    holds everywhere and ``psi`` somewhere."""
    if psi.free or phi.free:
        raise FormulaError("oracle formulas must be closed")
    if max_states > MAX_STATES:
        raise OracleBoundError(f"at most {MAX_STATES} states supported")
    atoms = tuple(atoms_of(psi, phi))
    actions = tuple(actions_of(psi, phi))
    checked = 0
    for n in range(1, max_states + 1):
        sp = model_space(n, atoms, actions, max_nbhds)
        ok = (sp.evaluate(phi) == sp.full) & (sp.evaluate(psi) != 0)
        checked += sp.M
        hits = np.flatnonzero(ok)
        if hits.size:
            return BruteResult(True, sp.model(int(hits[0])), checked)
    return BruteResult(False, None, checked)


# ------------------------------------------------------- relational side

class RelationalModel:
    """Kripke model: ``rel[a][i]`` is the successor mask of state ``i``."""

    def __init__(self, states, atoms=None, rel=None):
        self.states = tuple(str(s) for s in states)
        self.index = {s: i for i, s in enumerate(self.states)}
        self.full = (1 << len(self.states)) - 1
        self.atoms = dict(atoms or {})
        self.rel = {a: tuple(rows) for a, rows in (rel or {}).items()}
        for a, rows in self.rel.items():
            if len(rows) != len(self.states):
                raise ValueError(f"relation {a}: need one successor mask per state")

    @property
    def size(self) -> int:
        return len(self.states)

    def successors(self, a: str, i: int) -> int:
        rows = self.rel.get(a)
        return rows[i] if rows is not None else 0


def relational_translate(f: Formula) -> Formula:
    """``t``: modalities become two-step relational modalities via ``e``."""
    memo: dict = {}

    def go(g: Formula) -> Formula:
        r = memo.get(g)
        if r is not None:
            return r
        op = g.op
        if op in (Op.UBOX, Op.UDIA):
            raise FormulaError("the relational translation excludes universal modalities")
        if g.is_modal and g.label == E_SYMBOL:
            raise FormulaError(f"action {E_SYMBOL!r} is reserved by the translation")
        if op is Op.BOX:
            r = box(g.label, dia(E_SYMBOL, go(g.body)))
        elif op is Op.DIA:
            r = dia(g.label, box(E_SYMBOL, go(g.body)))
        elif g.args:
            r = rebuild(g, tuple(go(a) for a in g.args))
        else:
            r = g
        memo[g] = r
        return r

    return go(f)


def boxtimes(phi: Formula, actions, name: str = "Z") -> Formula:
    """``nu Z. phi & [a] Z & ...`` over ``actions`` plus ``e``: ``phi`` in all
    reachable states."""
    if name in {g.label for g in subformulas(phi) if g.is_binder}:
        raise FormulaError(f"variable {name} is already used in {phi}")
    acts = sorted(set(actions) | {E_SYMBOL})
    return nu(name, conj(phi, conj_all(box(a, var(name)) for a in acts)))


def model_to_relational(model: NeighbourhoodModel) -> RelationalModel:
    """States of ``model`` plus one state per occurring neighbourhood."""
    nbs = sorted({S for rows in model.nbhd.values() for row in rows for S in row})
    n = model.size
    pos = {S: n + k for k, S in enumerate(nbs)}
    names = list(model.states) + [
        "{" + ",".join(model.states[i] for i in range(n) if S >> i & 1) + "}" for S in nbs]
    rel = {}
    for a, rows in model.nbhd.items():
        rel[a] = [sum(1 << pos[S] for S in row) for row in rows] + [0] * len(nbs)
    rel[E_SYMBOL] = [0] * n + list(nbs)
    return RelationalModel(names, dict(model.atoms), rel)


def relational_to_model(rm: RelationalModel) -> NeighbourhoodModel:
    """``N(a, w) = {e-successors of m : m an a-successor of w}``."""
    nbhd = {}
    for a, rows in rm.rel.items():
        if a == E_SYMBOL:
            continue
        nbhd[a] = [sorted({rm.successors(E_SYMBOL, m) for m in range(rm.size)
                           if rows[w] >> m & 1}) for w in range(rm.size)]
    return NeighbourhoodModel(rm.states, dict(rm.atoms), nbhd)


def relational_eval(rm: RelationalModel, f: Formula, valuation: dict | None = None) -> int:
    """Standard Kripke semantics with Kleene iteration for fixpoints."""
    env0 = dict(valuation or {})
    missing = f.free - set(env0)
    if missing:
        raise FormulaError(f"valuation does not cover {sorted(missing)}")
    full = rm.full

    def pre_dia(a, ext):
        return sum(1 << i for i in range(rm.size) if rm.successors(a, i) & ext)

    def pre_box(a, ext):
        return sum(1 << i for i in range(rm.size) if rm.successors(a, i) & ~ext == 0)

    def ev(g: Formula, env: dict) -> int:
        op = g.op
        if op is Op.TOP:
            return full
        if op is Op.BOT:
            return 0
        if op is Op.ATOM:
            return rm.atoms.get(g.label, 0)
        if op is Op.DUAL:
            return full & ~rm.atoms.get(g.label, 0)
        if op is Op.VAR:
            return env[g.label]
        if op is Op.AND:
            return ev(g.left, env) & ev(g.right, env)
        if op is Op.OR:
            return ev(g.left, env) | ev(g.right, env)
        if op is Op.DIA:
            return pre_dia(g.label, ev(g.body, env))
        if op is Op.BOX:
            return pre_box(g.label, ev(g.body, env))
        if op is Op.UBOX:
            return full if ev(g.body, {}) == full else 0
        if op is Op.UDIA:
            return full if ev(g.body, {}) else 0
        cur = 0 if op is Op.MU else full
        while True:
            nxt = ev(g.body, {**env, g.label: cur})
            if nxt == cur:
                return cur
            cur = nxt

    return ev(f, env0)
