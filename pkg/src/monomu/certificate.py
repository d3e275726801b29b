"""Eloise strategy certificates: extraction, JSON form and verification.

A certificate is independent of any closure table: its nodes carry formula
sets and focus sets as formulas, and moves carry witness words whose
letters are ``(formula, bit)`` pairs.  The verifier rebuilds the closure
itself and re-derives every move, so it can be run on untrusted input.

Failure codes of :func:`verify_certificate`:

``"i"``
    the initial node ``({rho1}, {})`` is missing or has no move;
``"ii"``
    a move is illegal (bad node, overlong word, foreign letter, or the
    recomputed target differs from the claimed one or is not a formal
    state);
``"iii"``
    an Abelard response from a target leads to an unmapped Eloise node;
``"iv"``
    the strategy graph has a cycle avoiding every empty-focus node;
``"malformed"``
    the certificate does not have the expected structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from monomu.closure import ClosureTable, prepare
from monomu.formula import TOP, Formula, FormulaError
from monomu.game import ABELARD, ELOISE, abelard_moves
from monomu.parser import ParseError, parse
from monomu.tracking import delta_mask, gamma_mask

__all__ = [
    "CertNode", "CertMove", "Certificate", "CertificateError",
    "Verification", "extract_certificate", "verify_certificate",
]

_PLAYER = {ELOISE: "eloise", ABELARD: "abelard"}
_PLAYER_CODE = {v: k for k, v in _PLAYER.items()}


class CertificateError(ValueError):
    """Raised when a certificate cannot be read at all."""


@dataclass(frozen=True)
class CertNode:
    player: str
    formulas: frozenset
    focus: frozenset


@dataclass(frozen=True)
class CertMove:
    word: tuple        # of (Formula, bit)
    target: str


@dataclass
class Certificate:
    rho1: Formula
    rho0: Formula
    initial: str
    nodes: dict = field(default_factory=dict)
    moves: dict = field(default_factory=dict)

    @property
    def eloise_entries(self) -> int:
        return len(self.moves)

    @property
    def max_word(self) -> int:
        return max((len(m.word) for m in self.moves.values()), default=0)

    # -- json
    def to_json_obj(self) -> dict:
        def texts(fs):
            return sorted(str(f) for f in fs)

        return {
            "rho1": str(self.rho1),
            "rho0": str(self.rho0),
            "initial": self.initial,
            "nodes": {i: {"player": n.player, "formulas": texts(n.formulas),
                          "focus": texts(n.focus)}
                      for i, n in self.nodes.items()},
            "moves": {i: {"word": [["prop", str(f), b] for f, b in m.word],
                          "target": m.target}
                      for i, m in self.moves.items()},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_json_obj(), **kw)

    @classmethod
    def from_json_obj(cls, obj) -> "Certificate":
        try:
            nodes = {}
            for i, n in obj["nodes"].items():
                if n["player"] not in _PLAYER_CODE:
                    raise CertificateError(f"node {i}: unknown player {n['player']!r}")
                nodes[str(i)] = CertNode(n["player"],
                                         frozenset(parse(t) for t in n["formulas"]),
                                         frozenset(parse(t) for t in n["focus"]))
            moves = {}
            for i, m in obj["moves"].items():
                word = []
                for letter in m["word"]:
                    kind, text, bit = letter
                    if kind != "prop" or not isinstance(bit, int) or isinstance(bit, bool):
                        raise CertificateError(f"move {i}: bad letter {letter!r}")
                    word.append((parse(text), bit))
                moves[str(i)] = CertMove(tuple(word), str(m["target"]))
            return cls(parse(obj["rho1"]), parse(obj.get("rho0", "true")),
                       str(obj["initial"]), nodes, moves)
        except CertificateError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise CertificateError(f"malformed certificate: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "Certificate":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CertificateError(f"invalid JSON: {exc}") from None
        return cls.from_json_obj(obj)


# -------------------------------------------------------------- extraction

def extract_certificate(arena, solution) -> Certificate:
    """Restrict a winning strategy to the nodes it reaches from ``v0``."""
    ct = arena.ct
    if not solution.winning[arena.v0]:
        raise ValueError("Eloise does not win the initial node")
    ids: dict = {}
    nodes: dict = {}
    moves: dict = {}
    counters = {ELOISE: 0, ABELARD: 0}

    def name(i: int) -> str:
        s = ids.get(i)
        if s is None:
            player, lab, foc = arena.nodes[i]
            s = ids[i] = f"{'e' if player == ELOISE else 'a'}{counters[player]}"
            counters[player] += 1
            nodes[s] = CertNode(_PLAYER[player], ct.formulas(lab), ct.formulas(foc))
            stack.append(i)
        return s

    stack: list = []
    initial = name(arena.v0)
    while stack:
        i = stack.pop()
        player = arena.nodes[i][0]
        if player == ELOISE:
            k = solution.strategy[i]
            target = arena.succ[i][k]
            word = tuple((ct.entries[c], b) for c, b in arena.words[i][k])
            moves[ids[i]] = CertMove(word, name(target))
        else:
            for j in arena.succ[i]:
                name(j)
    return Certificate(ct.rho1, ct.rho0, initial, nodes, moves)


# ------------------------------------------------------------ verification

@dataclass
class Verification:
    ok: bool
    code: str | None = None
    detail: str = ""
    table: ClosureTable | None = None

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "accepted" if self.ok else f"rejected ({self.code}): {self.detail}"


def _reject(code: str, detail: str) -> Verification:
    return Verification(False, code, detail)


def verify_certificate(cert: Certificate, rho1: Formula | None = None,
                       rho0: Formula | None = None) -> Verification:
    """Check ``cert`` against ``(rho1, rho0)`` (default: the formulas it
    names) in time polynomial in the closure and certificate size."""
    try:
        if rho1 is None:
            rho1, rho0 = cert.rho1, cert.rho0
        rho1, rho0 = prepare(rho1, TOP if rho0 is None else rho0)
        ct = ClosureTable(rho1, rho0)
    except (FormulaError, ParseError) as exc:
        return _reject("malformed", f"formulas rejected: {exc}")

    # resolve node labels to masks
    keys: dict = {}
    by_key: dict = {}
    for nid, node in cert.nodes.items():
        lab = foc = 0
        for f in node.formulas:
            i = ct.lookup(f)
            if i is None:
                return _reject("ii", f"node {nid}: {f} is not in the closure")
            lab |= 1 << i
        for f in node.focus:
            i = ct.lookup(f)
            if i is None:
                return _reject("ii", f"node {nid}: focus {f} is not in the closure")
            foc |= 1 << i
        key = (_PLAYER_CODE[node.player], lab, foc)
        if key in by_key:
            return _reject("malformed", f"nodes {by_key[key]} and {nid} coincide")
        keys[nid] = key
        by_key[key] = nid

    # (i)
    v0 = (ELOISE, 1 << ct.rho1_id, 0)
    if cert.initial not in cert.nodes or keys[cert.initial] != v0:
        return _reject("i", "initial node is not ({rho1}, {})")
    if cert.initial not in cert.moves:
        return _reject("i", "initial node has no move")

    # (ii)
    bound = 3 * ct.n
    for nid, move in cert.moves.items():
        if nid not in keys:
            return _reject("malformed", f"move from unknown node {nid}")
        player, psi, foc = keys[nid]
        if player != ELOISE:
            return _reject("malformed", f"move from Abelard node {nid}")
        if not 1 <= bin(psi).count("1") <= 2:
            return _reject("ii", f"node {nid}: needs one or two formulas")
        if foc & ~psi or foc & ~ct.dfr_mask:
            return _reject("ii", f"node {nid}: focus must be deferrals of the node")
        if len(move.word) > bound:
            return _reject("ii", f"node {nid}: word longer than 3n = {bound}")
        gam = psi | (1 << ct.rho0_id)
        for pos, (f, b) in enumerate(move.word):
            c = ct.lookup(f)
            if c is None or ct.add[c] is None or b not in (0, 1):
                return _reject("ii", f"node {nid}: letter {pos} ({f}, {b}) is not propositional")
            foc = delta_mask(ct, foc, c, b)
            gam = gamma_mask(ct, gam, c, b)
        if move.target not in keys:
            return _reject("malformed", f"node {nid}: unknown target {move.target}")
        if not ct.is_state(gam):
            return _reject("ii", f"node {nid}: word does not end in a formal state")
        if keys[move.target] != (ABELARD, gam, foc):
            return _reject("ii", f"node {nid}: target {move.target} differs from the "
                                 "recomputed move")

    # (iii) and the strategy graph
    graph: dict = {}
    reach = [cert.initial]
    seen = {cert.initial}
    while reach:
        nid = reach.pop()
        player, lab, foc = keys[nid]
        if player == ELOISE:
            if nid not in cert.moves:
                return _reject("iii", f"Eloise node {nid} is reached but has no move")
            out = [cert.moves[nid].target]
        else:
            out = []
            for psi, f2, _ in abelard_moves(ct, lab, foc):
                succ = by_key.get((ELOISE, psi, f2))
                if succ is None or succ not in cert.moves:
                    shown = ", ".join(sorted(str(g) for g in ct.formulas(psi)))
                    return _reject("iii", f"Abelard node {nid}: response {{{shown}}} "
                                          "is not mapped")
                out.append(succ)
        graph[nid] = out
        for s in out:
            if s not in seen:
                seen.add(s)
                reach.append(s)

    # (iv): no cycle through non-accepting nodes only
    live = {nid for nid in graph if keys[nid][2] != 0}
    color = dict.fromkeys(live, 0)
    for root in live:
        if color[root]:
            continue
        stack = [(root, iter(graph[root]))]
        color[root] = 1
        while stack:
            nid, it = stack[-1]
            for s in it:
                if s not in live:
                    continue
                if color[s] == 1:
                    return _reject("iv", f"cycle through {s} never empties the focus")
                if color[s] == 0:
                    color[s] = 1
                    stack.append((s, iter(graph[s])))
                    break
            else:
                color[nid] = 2
                stack.pop()
    return Verification(True, table=ct)
