import random

import pytest
from hypothesis import given, settings, strategies as st

from monomu import TOP, parse
from monomu.formula import FormulaError
from monomu.generate import random_formula
from monomu.oracles import brute_force_sat
from monomu.semantics import NeighbourhoodModel, extension, is_global_model
from monomu.solver import decide, decide_sat, disjoint_union


@pytest.mark.parametrize("text, glob, sat", [
    ("<a> true & [a] false", "true", False),
    ("mu X. <a> X", "true", True),
    ("p & ~p", "true", False),
    ("p", "q", True),
    ("p", "~p", False),
    ("mu X. (p | <a> X)", "~p & [a] true", False),
    ("nu Y. (<a> (mu X. (p | <a> X)) & [a] Y)", "true", True),
    ("<c> (mu X. (<a> X & <b> X)) & [c] mu Y. (<d> Y & <e> Y)", "true", True),
])
def test_decide_sat_examples(text, glob, sat):
    r = decide_sat(parse(text), parse(glob))
    assert r.sat is sat
    if sat:
        m = r.model()
        assert is_global_model(m, parse(glob)) and extension(m, parse(text))


def test_universal_needs_decide():
    with pytest.raises(FormulaError):
        decide_sat(parse("A p"))


@pytest.mark.parametrize("text, glob, sat, states", [
    ("p & A ~p", "true", False, None),
    ("p & E ~p", "true", True, 2),
    ("A p & E q", "r", True, None),
    ("E p & E ~p & A (p | <a> p)", "true", True, None),
    ("<a> p & A [a] false", "true", False, None),
])
def test_decide_with_universals(text, glob, sat, states):
    r = decide(parse(text), parse(glob))
    assert r.sat is sat
    if sat:
        m = r.model()
        assert is_global_model(m, parse(glob)) and extension(m, parse(text))
        if states is not None:
            assert m.size == states


def test_unsat_model_raises():
    with pytest.raises(ValueError):
        decide_sat(parse("p & ~p")).model()


def test_disjoint_union():
    m1 = NeighbourhoodModel(["w"], {"p": 1}, {"a": [[0]]})
    m2 = NeighbourhoodModel(["w", "v"], {"q": 2}, {"b": [[2], []]})
    u = disjoint_union([m1, m2])
    assert u.states == ("m0.w", "m1.w", "m1.v")
    assert u.atoms == {"p": 1, "q": 4}
    assert u.nbhd["a"] == ((0,), (), ()) and u.nbhd["b"] == ((), (4,), ())
    assert disjoint_union([m1]) is m1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_universal_reduction_against_brute_force(seed):
    rng = random.Random(seed)
    f = random_formula(rng, depth=3, atoms=("p",), actions=("a",), universal=True)
    d = decide(f).sat
    b = brute_force_sat(f, TOP, 3, 2).sat
    assert d or not b
    if not d:
        assert not b
