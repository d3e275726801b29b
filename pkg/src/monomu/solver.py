"""Top-level satisfiability checking.

:func:`decide_sat` decides ``rho0``-satisfiability of ``rho1`` for formulas
without universal modalities; :func:`decide` additionally handles ``A``/``E``
by guessing their truth values (see :func:`monomu.frontends.reduce_universal`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from monomu.certificate import Certificate, extract_certificate, verify_certificate
from monomu.closure import ClosureTable, prepare
from monomu.formula import TOP, Formula, FormulaError, conj, subformulas, ubox, Op
from monomu.frontends import GUESS_CAP, reduce_universal
from monomu.game import DEFAULT_NODE_CAP, build_arena, solve_arena
from monomu.semantics import NeighbourhoodModel
from monomu.tableau import all_traces_finite, model_from_tableau, tableau_from_certificate

__all__ = ["SatResult", "decide_sat", "decide", "disjoint_union", "has_universal"]


def has_universal(*fs: Formula) -> bool:
    return any(g.op in (Op.UBOX, Op.UDIA) for g in subformulas(*fs))


@dataclass
class SatResult:
    sat: bool
    rho1: Formula
    rho0: Formula
    n: int = 0
    eloise_nodes: int = 0
    abelard_nodes: int = 0
    certificate: Certificate | None = None
    table: ClosureTable | None = None
    parts: list = field(default_factory=list)   # sub-results for universal guesses
    guess: tuple | None = None

    def __bool__(self) -> bool:
        return self.sat

    def model(self) -> NeighbourhoodModel:
        """A model of the input, extracted from the certificate(s)."""
        if not self.sat:
            raise ValueError("no model: the input is unsatisfiable")
        if self.parts:
            return disjoint_union([p.model() for p in self.parts])
        t = tableau_from_certificate(self.certificate)
        report = all_traces_finite(t)
        if not report:  # pragma: no cover - guaranteed by verification
            raise AssertionError("tableau from a verified certificate has an infinite trace")
        return model_from_tableau(t)


def decide_sat(rho1: Formula, rho0: Formula = TOP, node_cap: int = DEFAULT_NODE_CAP,
               check: bool = True) -> SatResult:
    """Decide whether ``rho1`` holds somewhere in a model where ``rho0``
    holds everywhere.  With ``check`` the extracted certificate is verified
    before it is returned."""
    if has_universal(rho1, rho0):
        raise FormulaError("universal modalities need decide(), not decide_sat()")
    rho1, rho0 = prepare(rho1, rho0)
    ct = ClosureTable(rho1, rho0)
    arena = build_arena(ct, node_cap)
    sol = solve_arena(arena)
    res = SatResult(bool(sol.winning[arena.v0]), rho1, rho0, ct.n,
                    arena.eloise_count(), arena.abelard_count(), table=ct)
    if res.sat:
        res.certificate = extract_certificate(arena, sol)
        if check:
            ver = verify_certificate(res.certificate)
            if not ver:  # pragma: no cover - solver/checker disagreement is a bug
                raise AssertionError(f"extracted certificate rejected: {ver}")
    return res


def decide(psi: Formula, global_: Formula = TOP, node_cap: int = DEFAULT_NODE_CAP,
           cap: int = GUESS_CAP) -> SatResult:
    """Satisfiability of ``psi`` under ``global_``, universal modalities
    allowed in both."""
    if not has_universal(psi, global_):
        return decide_sat(psi, global_, node_cap)
    if global_ is not TOP:
        psi, global_ = conj(psi, ubox(global_)), TOP
    for inst in reduce_universal(psi, cap):
        parts = []
        for target in (inst.core,) + inst.side:
            r = decide_sat(target, inst.global_, node_cap)
            if not r:
                break
            parts.append(r)
        else:
            first = parts[0]
            return SatResult(True, first.rho1, first.rho0, first.n,
                             sum(p.eloise_nodes for p in parts),
                             sum(p.abelard_nodes for p in parts),
                             first.certificate, first.table, parts, inst.guess)
    return SatResult(False, psi, global_)


def disjoint_union(models) -> NeighbourhoodModel:
    """Disjoint union; states of the ``k``-th model are prefixed ``m{k}.``
    unless there is only one model."""
    models = list(models)
    if len(models) == 1:
        return models[0]
    states, atoms, offset = [], {}, 0
    actions = sorted({a for m in models for a in m.nbhd})
    nbhd = {a: [] for a in actions}
    for k, m in enumerate(models):
        states += [f"m{k}.{s}" for s in m.states]
        for p, mask in m.atoms.items():
            atoms[p] = atoms.get(p, 0) | (mask << offset)
        for a in actions:
            rows = m.nbhd.get(a, ((),) * m.size)
            nbhd[a] += [[S << offset for S in row] for row in rows]
        offset += m.size
    return NeighbourhoodModel(states, atoms, nbhd)
