import random

import pytest
from hypothesis import given, settings, strategies as st

from monomu import TOP, parse
from monomu.closure import ClosureTable, prepare
from monomu.game import (
    ABELARD, ELOISE, ResourceLimit, abelard_moves, build_arena, eloise_moves,
    solve_arena, solve_buchi,
)
from monomu.generate import random_formula
from monomu.tracking import delta_mask, gamma_mask


def table(text, glob="true"):
    return ClosureTable(*prepare(parse(text), parse(glob)))


def move_targets(ct, text):
    return {ct.formulas(g) for g, _, _ in eloise_moves(ct, ct.mask([parse(text)]), 0)}


def test_eloise_atom_single_move():
    ct = table("p")
    moves = eloise_moves(ct, ct.mask([parse("p")]), 0)
    assert [(ct.formulas(g), f, w) for g, f, w in moves] == [({parse("p"), TOP}, 0, ())]


def test_eloise_disjunction_two_moves():
    ct = table("p | q")
    assert move_targets(ct, "p | q") == {frozenset({parse("p"), TOP}), frozenset({parse("q"), TOP})}


def test_eloise_clash_excluded():
    ct = table("p & (~p | q)")
    assert move_targets(ct, "p & (~p | q)") == {frozenset({parse("p"), parse("q"), TOP})}


def test_eloise_words_are_legal():
    ct = table("mu X. (p & q | <a> X) & nu Y. ([a] Y & (r | ~r))")
    for g, f, w in eloise_moves(ct, 1 << ct.rho1_id, 0):
        lab = (1 << ct.rho1_id) | (1 << ct.rho0_id)
        for chi, b in w:
            lab = gamma_mask(ct, lab, chi, b)
        assert lab == g and ct.is_state(g) and len(w) <= 3 * ct.n


def test_abelard_stuck_without_pair():
    ct = table("<a> p & [b] q")
    g = ct.mask([parse("<a> p"), parse("[b] q"), TOP])
    assert abelard_moves(ct, g, 0) == []


def test_abelard_refocus():
    ct = table("<a> (mu X. (p | <a> X)) & [a] q")
    d, b = parse("<a> mu X. (p | <a> X)"), parse("[a] q")
    g = ct.mask([d, b, TOP])
    [(psi, foc, pair)] = abelard_moves(ct, g, 0)
    assert ct.formulas(psi) == {parse("mu X. (p | <a> X)"), parse("q")}
    assert ct.formulas(foc) == {parse("mu X. (p | <a> X)")}
    assert pair == (ct.id(d), ct.id(b))


def test_abelard_tracks_nonempty_focus():
    ct = table("<a> (mu X. (p | <a> X)) & [a] mu Y. (q | <a> Y)")
    d = parse("<a> mu X. (p | <a> X)")
    b = parse("[a] mu Y. (q | <a> Y)")
    g = ct.mask([d, b, TOP])
    [(_, foc, _)] = abelard_moves(ct, g, ct.mask([b]))
    assert ct.formulas(foc) == {parse("mu Y. (q | <a> Y)")}


def test_arena_for_atom():
    ar = build_arena(table("p"))
    assert ar.eloise_count() == 1 and ar.abelard_count() == 1
    assert solve_arena(ar).winning[ar.v0]


def test_arena_for_clash():
    ar = build_arena(table("p & ~p"))
    assert ar.succ[ar.v0] == []
    assert not solve_arena(ar).winning[ar.v0]


def test_node_cap():
    with pytest.raises(ResourceLimit):
        build_arena(table("mu X. <a> X"), node_cap=1)


def test_refocus_every_round_is_accepting():
    # Every Abelard move refocuses, so Eloise nodes never have empty focus.
    ct = table("nu Y. (<a> (mu X. (p | <a> X)) & [a] Y)")
    ar = build_arena(ct)
    assert all(foc for p, _, foc in ar.nodes[1:] if p == ELOISE)
    assert solve_arena(ar).winning[ar.v0]


def test_focus_may_exceed_two_at_abelard_nodes():
    ct = table("<c> (mu X. (<a> X & <b> X)) & [c] mu Y. (<d> Y & <e> Y)")
    ar = build_arena(ct)
    assert max(bin(f).count("1") for p, _, f in ar.nodes if p == ABELARD) > 2
    assert max(bin(f).count("1") for p, _, f in ar.nodes if p == ELOISE) <= 2


def test_buchi_all_abelard_stuck():
    sol = solve_buchi([ELOISE, ABELARD], [[1], []], [False, False])
    assert sol.winning == [True, True] and sol.strategy == {0: 0}


def test_buchi_forced_cycle_without_acceptance():
    sol = solve_buchi([ELOISE, ABELARD], [[1], [0]], [False, False])
    assert sol.winning == [False, False]


def test_buchi_eloise_avoids_bad_cycle():
    owner = [ELOISE, ABELARD, ABELARD, ELOISE]
    succ = [[1, 2], [0], [3], [2]]
    accepting = [False, False, False, True]
    sol = solve_buchi(owner, succ, accepting)
    assert sol.winning[0] and sol.strategy[0] == 1


def test_buchi_stuck_eloise_loses():
    sol = solve_buchi([ELOISE], [[]], [True])
    assert sol.winning == [False]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_arena_invariants(seed):
    ct = ClosureTable(*prepare(random_formula(random.Random(seed), depth=4, actions=("a", "b"))))
    ar = build_arena(ct)
    assert ar.eloise_count() <= 4 * ct.n ** 2
    for i, (p, lab, foc) in enumerate(ar.nodes):
        assert all(ar.nodes[j][0] != p for j in ar.succ[i])
        assert foc & ~lab == 0 if p == ELOISE else True
        if p == ELOISE:
            assert 1 <= bin(lab).count("1") <= 2
            for j, w in zip(ar.succ[i], ar.words[i]):
                g, f = lab | (1 << ct.rho0_id), foc
                for chi, b in w:
                    g, f = gamma_mask(ct, g, chi, b), delta_mask(ct, f, chi, b)
                assert ar.nodes[j][1:] == (g, f)
                assert f & ~g == 0
        else:
            assert ct.is_state(lab)
