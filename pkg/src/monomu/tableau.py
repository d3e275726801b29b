"""Tableaux built from winning strategies, and models built from tableaux.

The tableau unfolds every strategy move along its witness word: one node
per proper prefix of the word (non-state labels, one propositional child
each) and one node per Abelard node of the certificate (state labels, one
modal child per diamond/box pair).  Traces of deferrals are followed on the
product of tableau nodes and deferrals; a tableau is valid when that
product graph is acyclic, and ``tab(v)`` is then the longest trace from
``v``.

The model lives on the state-labelled nodes.  For a state ``x`` and action
``a`` with diamonds ``<a> chi_1 .. <a> chi_o`` and boxes ``[a] psi_1 ..
[a] psi_m``:

* no box: ``N(a, x) = {{}}``;
* boxes but no diamond: ``N(a, x) = {}``;
* otherwise ``N(a, x) = {S_1, ..., S_o}`` with ``S_i = {y_i1, ..., y_im}``,
  where ``y_ij`` is the state reached from the modal child for the pair
  ``(<a> chi_i, [a] psi_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from monomu.certificate import Certificate, verify_certificate
from monomu.closure import ClosureTable
from monomu.formula import Op
from monomu.game import abelard_moves
from monomu.semantics import NeighbourhoodModel
from monomu.tracking import delta_mask, gamma_mask, modal_delta_mask

__all__ = [
    "Tableau", "TableauError", "tableau_from_certificate", "all_traces_finite",
    "TraceReport", "model_from_tableau", "extract_model",
]


class TableauError(ValueError):
    pass


@dataclass
class Tableau:
    """Labelled graph over a closure table.

    ``labels[v]`` and ``focus[v]`` are masks; ``edges[v]`` is a list of
    ``(child, letter)`` where a letter is ``("prop", chi, bit)`` or
    ``("modal", dia, box)`` with closure ids.
    """

    ct: ClosureTable
    labels: list = field(default_factory=list)
    focus: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    root: int = 0

    def add(self, label: int, focus: int) -> int:
        self.labels.append(label)
        self.focus.append(focus)
        self.edges.append([])
        return len(self.labels) - 1

    def __len__(self) -> int:
        return len(self.labels)

    def is_state(self, v: int) -> bool:
        return self.ct.is_state(self.labels[v])

    def states(self) -> list:
        return [v for v in range(len(self)) if self.is_state(v)]

    def check_structure(self) -> None:
        """Check the local rule conditions at every node."""
        ct = self.ct
        for v in range(len(self)):
            lab = self.labels[v]
            if ct.clashing(lab):
                raise TableauError(f"node {v}: label contains false or a clash")
            if self.is_state(v):
                want = {(d, b) for _, _, (d, b) in abelard_moves(ct, lab, 0)}
                have = {(l[1], l[2]) for _, l in self.edges[v] if l[0] == "modal"}
                if want - have:
                    raise TableauError(f"node {v}: missing modal children")
                for c, (_, d, b) in self.edges[v]:
                    need = (1 << ct.succ[d][0]) | (1 << ct.succ[b][0]) | (1 << ct.rho0_id)
                    if self.labels[c] != need:
                        raise TableauError(f"node {v}: modal child {c} has the wrong label")
            else:
                if len(self.edges[v]) != 1:
                    raise TableauError(f"node {v}: non-state node needs exactly one child")
                c, (kind, chi, bit) = self.edges[v][0]
                if kind != "prop" or not lab >> chi & 1:
                    raise TableauError(f"node {v}: child is not a rule application")
                if self.labels[c] != gamma_mask(ct, lab, chi, bit):
                    raise TableauError(f"node {v}: child label does not match the rule")

    def contains_rho1(self) -> bool:
        bit = 1 << self.ct.rho1_id
        return any(lab & bit for lab in self.labels)

    def dump(self) -> str:
        """Plain-text listing for debugging."""
        ct = self.ct
        lines = []
        for v in range(len(self)):
            fs = ", ".join(str(f) for f in sorted(ct.formulas(self.labels[v]), key=str))
            fc = ", ".join(str(f) for f in sorted(ct.formulas(self.focus[v]), key=str))
            kind = "state" if self.is_state(v) else "prop"
            lines.append(f"{v} [{kind}] {{{fs}}} focus {{{fc}}}")
            for c, letter in self.edges[v]:
                if letter[0] == "prop":
                    lines.append(f"  -> {c} via ({ct.entries[letter[1]]}, {letter[2]})")
                else:
                    lines.append(f"  -> {c} via ({ct.entries[letter[1]]}, {ct.entries[letter[2]]})")
        return "\n".join(lines)


def tableau_from_certificate(cert: Certificate, verified=None) -> Tableau:
    """Unfold a verified certificate into a tableau.

    ``verified`` may pass an existing successful :class:`Verification` to
    skip re-checking.
    """
    ver = verified or verify_certificate(cert)
    if not ver:
        raise TableauError(f"certificate rejected: {ver}")
    ct = ver.table
    t = Tableau(ct)
    masks = {}
    for nid, node in cert.nodes.items():
        masks[nid] = (ct.mask(node.formulas), ct.mask(node.focus))
    key_to_id = {(cert.nodes[nid].player,) + masks[nid]: nid for nid in cert.nodes}
    root_of: dict = {}      # Eloise node id -> tableau node
    state_of: dict = {}     # Abelard node id -> tableau node

    def state_node(aid: str) -> int:
        v = state_of.get(aid)
        if v is None:
            lab, foc = masks[aid]
            v = state_of[aid] = t.add(lab, foc)
            pending.append(aid)
        return v

    def eloise_root(eid: str) -> int:
        v = root_of.get(eid)
        if v is not None:
            return v
        psi, foc = masks[eid]
        move = cert.moves[eid]
        word = [(ct.id(f), b) for f, b in move.word]
        lab = psi | (1 << ct.rho0_id)
        if not word:
            v = root_of[eid] = state_node(move.target)
            return v
        v = root_of[eid] = t.add(lab, foc)
        cur = v
        for k, (c, b) in enumerate(word):
            lab = gamma_mask(ct, lab, c, b)
            foc = delta_mask(ct, foc, c, b)
            nxt = state_node(move.target) if k == len(word) - 1 else t.add(lab, foc)
            t.edges[cur].append((nxt, ("prop", c, b)))
            cur = nxt
        return v

    pending: list = []
    t.root = eloise_root(cert.initial)
    while pending:
        aid = pending.pop()
        v = state_of[aid]
        lab, foc = masks[aid]
        for psi, f2, (d, b) in abelard_moves(ct, lab, foc):
            eid = key_to_id[("eloise", psi, f2)]
            t.edges[v].append((eloise_root(eid), ("modal", d, b)))
    return t


@dataclass
class TraceReport:
    finite: bool
    tab: dict            # node -> longest trace length from that node
    cycle: list | None = None

    def __bool__(self) -> bool:
        return self.finite


def all_traces_finite(t: Tableau) -> TraceReport:
    """Check that the trace product graph is acyclic and compute ``tab``.

    Product nodes are ``(v, phi)`` for deferrals ``phi`` in the label of
    ``v``; ``(v, phi) -> (u, psi)`` when ``v -> u`` by letter ``l`` and
    ``psi in delta(phi, l)``.  ``tab(v)`` is the number of formulas on the
    longest trace starting at ``v`` (0 without deferrals).
    """
    ct = t.ct

    def succ(node):
        v, phi = node
        out = []
        for u, letter in t.edges[v]:
            if letter[0] == "prop":
                m = delta_mask(ct, 1 << phi, letter[1], letter[2])
            else:
                m = modal_delta_mask(ct, 1 << phi, letter[1], letter[2])
            for psi in ct.ids(m):
                out.append((u, psi))
        return out

    length: dict = {}
    color: dict = {}
    for v in range(len(t)):
        for phi in ct.ids(t.labels[v] & ct.dfr_mask):
            root = (v, phi)
            if root in color:
                continue
            color[root] = 1
            stack = [(root, iter(succ(root)))]
            while stack:
                node, it = stack[-1]
                for s in it:
                    c = color.get(s, 0)
                    if c == 1:
                        cyc = [n for n, _ in stack]
                        return TraceReport(False, {}, cyc[cyc.index(s):])
                    if c == 0:
                        color[s] = 1
                        stack.append((s, iter(succ(s))))
                        break
                else:
                    color[node] = 2
                    length[node] = 1 + max((length[s] for s in succ(node)), default=0)
                    stack.pop()
    tab = {v: 0 for v in range(len(t))}
    for (v, _), n in length.items():
        if n > tab[v]:
            tab[v] = n
    return TraceReport(True, tab)


def _reach_state(t: Tableau, v: int) -> int:
    while not t.is_state(v):
        v = t.edges[v][0][0]
    return v


def model_from_tableau(t: Tableau) -> NeighbourhoodModel:
    """Neighbourhood model over the state-labelled nodes of ``t``."""
    ct = t.ct
    states = t.states()
    pos = {v: k for k, v in enumerate(states)}
    atoms: dict = {}
    for v in states:
        for i in ct.ids(t.labels[v]):
            if ct.ops[i] is Op.ATOM:
                p = ct.entries[i].label
                atoms[p] = atoms.get(p, 0) | (1 << pos[v])
    for p in {ct.entries[i].label for i, op in enumerate(ct.ops) if op is Op.DUAL}:
        atoms.setdefault(p, 0)
    nbhd = {a: [[] for _ in states] for a in ct.actions}
    for v in states:
        lab = t.labels[v]
        child = {(l[1], l[2]): c for c, l in t.edges[v] if l[0] == "modal"}
        for a in ct.actions:
            dias = ct.ids(lab & ct.dia_mask.get(a, 0))
            boxes = ct.ids(lab & ct.box_mask.get(a, 0))
            if not boxes:
                nbhd[a][pos[v]] = [0]
                continue
            row = []
            for d in dias:
                S = 0
                for b in boxes:
                    c = child.get((d, b))
                    if c is None:
                        raise TableauError(f"node {v}: no child for a modal pair")
                    S |= 1 << pos[_reach_state(t, c)]
                row.append(S)
            nbhd[a][pos[v]] = row
    names = [f"s{k}" for k in range(len(states))]
    return NeighbourhoodModel(names, atoms, nbhd)


def extract_model(cert: Certificate, verified=None) -> NeighbourhoodModel:
    """Model of ``rho1`` under the global assumption ``rho0`` from a
    certificate."""
    t = tableau_from_certificate(cert, verified)
    return model_from_tableau(t)
