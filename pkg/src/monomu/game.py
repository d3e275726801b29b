"""The satisfiability game and its Büchi solver.

Eloise nodes are pairs ``(Psi, Foc)`` of one or two closure formulas and a
set of focused deferrals ``Foc`` with ``Foc <= Psi``.  Eloise moves by
decomposing ``Psi`` together with the global assumption ``rho0`` along a
word of propositional letters into a formal state ``Gamma``; the focus is
tracked along the same word.  Abelard answers with a pair
``(<a> phi0, [a] phi1)`` of modal literals of ``Gamma`` and the play
continues at ``({phi0, phi1}, Foc')``: either the tracked focus or, when the
focus was empty, the new deferrals among ``phi0, phi1``.

Eloise wins a play if it ends at a stuck Abelard node or if the focus is
empty infinitely often.  Focus emptiness is observed at both node kinds
(``Foc = {}`` at an Eloise node implies it at the following Abelard node).

All sets of closure formulas are integer bitmasks over a
:class:`~monomu.closure.ClosureTable`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from monomu.closure import ClosureTable
from monomu.tracking import delta_mask, gamma_mask, modal_delta_mask

__all__ = [
    "ELOISE", "ABELARD", "ResourceLimit", "WordBoundExceeded", "Arena",
    "eloise_moves", "abelard_moves", "build_arena", "solve_buchi",
    "BuchiSolution", "DEFAULT_NODE_CAP", "solve_arena",
]

ELOISE, ABELARD = 0, 1
DEFAULT_NODE_CAP = 10 ** 6


class ResourceLimit(RuntimeError):
    """The arena grew beyond the configured node cap."""


class WordBoundExceeded(RuntimeError):
    """Propositional saturation needed more than ``3n`` letters."""


def popcount(m: int) -> int:
    return bin(m).count("1")


# ------------------------------------------------------------------- moves

def eloise_moves(ct: ClosureTable, psi: int, foc: int) -> list:
    """All moves ``(gamma, foc', word)`` from the Eloise node ``(psi, foc)``.

    Breadth-first over configurations ``(Gamma, Foc)``, trying letters in
    ascending (formula id, bit) order, so every target keeps its
    shortlex-least witness word.  Configurations containing ``false`` or a
    clashing literal pair are dropped since no letter can remove them.
    Words are tuples of ``(formula id, bit)``.
    """
    bound = 3 * ct.n
    start = (psi | (1 << ct.rho0_id), foc)
    if ct.clashing(start[0]):
        return []
    seen = {start: ()}
    frontier = [start]
    targets: dict = {}
    truncated = False
    depth = 0
    while frontier:
        nxt = []
        for conf in frontier:
            gam, fm = conf
            complex_ = gam & ct.complex_mask
            if not complex_:
                targets.setdefault(conf, seen[conf])
                continue
            if depth == bound:
                truncated = True
                continue
            word = seen[conf]
            for chi in ct.ids(complex_):
                bits = (0, 1) if ct.add[chi][1] is not None else (0,)
                for b in bits:
                    g2 = gamma_mask(ct, gam, chi, b)
                    if ct.clashing(g2):
                        continue
                    c2 = (g2, delta_mask(ct, fm, chi, b))
                    if c2 not in seen:
                        seen[c2] = word + ((chi, b),)
                        nxt.append(c2)
        frontier = nxt
        depth += 1
    if truncated and not targets:
        raise WordBoundExceeded(
            f"no formal state within {bound} propositional letters")
    return [(g, f, w) for (g, f), w in targets.items()]


def abelard_moves(ct: ClosureTable, gam: int, foc: int) -> list:
    """Successors ``(psi, foc')`` of the Abelard node ``(gam, foc)``, one
    per same-action pair of a diamond and a box in ``gam``."""
    out = []
    seen = set()
    for a in ct.actions:
        dias = ct.ids(gam & ct.dia_mask.get(a, 0))
        boxes = ct.ids(gam & ct.box_mask.get(a, 0))
        for d in dias:
            for b in boxes:
                p0, p1 = ct.succ[d][0], ct.succ[b][0]
                psi = (1 << p0) | (1 << p1)
                if foc:
                    f2 = modal_delta_mask(ct, foc, d, b)
                else:
                    f2 = psi & ct.dfr_mask
                key = (psi, f2)
                if key not in seen:
                    seen.add(key)
                    out.append((psi, f2, (d, b)))
    return out


# ------------------------------------------------------------------- arena

@dataclass
class Arena:
    """Explicit game graph reachable from ``v0 = ({rho1}, {})``.

    ``nodes[i] = (player, label mask, focus mask)``; ``succ[i]`` lists
    successor indices; ``words[i][k]`` is the witness word of the ``k``-th
    Eloise move (``None`` for Abelard nodes) and ``pairs`` likewise records
    the modal letter of each Abelard move.
    """

    ct: ClosureTable
    nodes: list = field(default_factory=list)
    succ: list = field(default_factory=list)
    words: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    index: dict = field(default_factory=dict)

    @property
    def v0(self) -> int:
        return 0

    def accepting(self, i: int) -> bool:
        return self.nodes[i][2] == 0

    def eloise_count(self) -> int:
        return sum(1 for p, _, _ in self.nodes if p == ELOISE)

    def abelard_count(self) -> int:
        return sum(1 for p, _, _ in self.nodes if p == ABELARD)

    def describe(self, i: int) -> str:
        p, lab, foc = self.nodes[i]
        fs = ", ".join(sorted(str(f) for f in self.ct.formulas(lab)))
        fc = ", ".join(sorted(str(f) for f in self.ct.formulas(foc)))
        who = "E" if p == ELOISE else "A"
        return f"{who}({{{fs}}} | {{{fc}}})"


def build_arena(ct: ClosureTable, node_cap: int = DEFAULT_NODE_CAP) -> Arena:
    """Build every node reachable from the initial node."""
    ar = Arena(ct)

    def node(key) -> int:
        i = ar.index.get(key)
        if i is None:
            if len(ar.nodes) >= node_cap:
                raise ResourceLimit(f"arena exceeds {node_cap} nodes")
            i = ar.index[key] = len(ar.nodes)
            ar.nodes.append(key)
            ar.succ.append(None)
            ar.words.append(None)
            ar.pairs.append(None)
            queue.append(i)
        return i

    queue = deque()
    node((ELOISE, 1 << ct.rho1_id, 0))
    while queue:
        i = queue.popleft()
        player, lab, foc = ar.nodes[i]
        if player == ELOISE:
            moves = eloise_moves(ct, lab, foc)
            ar.succ[i] = [node((ABELARD, g, f)) for g, f, _ in moves]
            ar.words[i] = [w for _, _, w in moves]
        else:
            moves = abelard_moves(ct, lab, foc)
            ar.succ[i] = [node((ELOISE, p, f)) for p, f, _ in moves]
            ar.pairs[i] = [pair for _, _, pair in moves]
    bound = 4 * ct.n * ct.n
    if ar.eloise_count() > bound:  # pragma: no cover - structural bound
        raise AssertionError(f"{ar.eloise_count()} Eloise nodes exceed 4n^2 = {bound}")
    return ar


# ------------------------------------------------------------------ solver

@dataclass
class BuchiSolution:
    winning: list          # bool per node: Eloise wins from there
    strategy: dict         # Eloise node -> chosen successor position
    rank: list             # attractor rank in the final iteration (or None)


def solve_buchi(owner, succ, accepting, word_key=None) -> BuchiSolution:
    """Solve a Büchi game given as adjacency lists.

    ``owner[i]`` is ``ELOISE`` or ``ABELARD``; ``accepting[i]`` marks the
    Büchi set.  A player who cannot move loses.  Computes
    ``nu Z. mu Y. (F & CPre(Z)) | CPre(Y)`` with queue-based attractors and
    derives a positional Eloise strategy: accepting nodes move into the
    winning region, all others strictly decrease their attractor rank.
    ``word_key(i, k)`` orders the candidate moves for tie-breaking (default:
    move position).
    """
    n = len(owner)
    preds = [[] for _ in range(n)]
    for i, ss in enumerate(succ):
        for j in ss:
            preds[j].append(i)
    in_z = [True] * n
    while True:
        rank = [None] * n
        queue = deque()
        order = 0
        for i in range(n):
            if not in_z[i]:
                continue
            if owner[i] == ABELARD and not succ[i]:
                seed = True
            elif accepting[i]:
                if owner[i] == ELOISE:
                    seed = any(in_z[j] for j in succ[i])
                else:
                    seed = all(in_z[j] for j in succ[i])
            else:
                seed = False
            if seed:
                rank[i] = order
                order += 1
                queue.append(i)
        counter_y = [0] * n
        for i in range(n):
            if owner[i] == ABELARD:
                counter_y[i] = len(succ[i])
        while queue:
            j = queue.popleft()
            for i in preds[j]:
                if rank[i] is not None or not in_z[i]:
                    continue
                if owner[i] == ELOISE:
                    rank[i] = order
                    order += 1
                    queue.append(i)
                else:
                    counter_y[i] -= 1
                    if counter_y[i] == 0:
                        rank[i] = order
                        order += 1
                        queue.append(i)
        new_z = [rank[i] is not None for i in range(n)]
        if new_z == in_z:
            break
        in_z = new_z
    strategy = {}
    key = word_key or (lambda i, k: k)
    for i in range(n):
        if owner[i] != ELOISE or not in_z[i]:
            continue
        if accepting[i]:
            cands = [k for k, j in enumerate(succ[i]) if in_z[j]]
        else:
            cands = [k for k, j in enumerate(succ[i])
                     if rank[j] is not None and rank[j] < rank[i]]
        strategy[i] = min(cands, key=lambda k: key(i, k))
    return BuchiSolution(in_z, strategy, rank)


def _word_order(word) -> tuple:
    return (len(word), word)


def solve_arena(ar: Arena) -> BuchiSolution:
    owner = [p for p, _, _ in ar.nodes]
    accepting = [ar.accepting(i) for i in range(len(ar.nodes))]
    return solve_buchi(owner, ar.succ, accepting,
                       word_key=lambda i, k: _word_order(ar.words[i][k]))
