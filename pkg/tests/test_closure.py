import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from monomu import TOP, parse
from monomu.closure import (
    ClosureTable, ValidationError, alpha_key, guardedness_transform,
    make_clean_irredundant, prepare, validate,
)
from monomu.formula import Op, subformulas, subst
from monomu.generate import random_formula
from monomu.oracles import model_space


def naive_closure(*roots):
    """Saturation by the three rules, identifying formulas up to renaming."""
    seen, todo = {}, list(roots)
    while todo:
        f = todo.pop()
        k = alpha_key(f)
        if k in seen:
            continue
        seen[k] = f
        if f.op in (Op.AND, Op.OR):
            todo += list(f.args)
        elif f.op in (Op.DIA, Op.BOX, Op.UBOX, Op.UDIA):
            todo.append(f.body)
        elif f.op in (Op.MU, Op.NU):
            todo.append(subst(f.body, f.label, f))
    return seen


def test_closure_of_mu_loop():
    f = parse("mu X. <a> X")
    ct = ClosureTable(f, TOP)
    assert ct.n == 3
    assert set(ct.entries) == {f, parse("<a> mu X. <a> X"), TOP}


def test_closure_of_atom():
    ct = ClosureTable(parse("p"), TOP)
    assert ct.n == 2 and set(ct.entries) == {parse("p"), TOP}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_closure_matches_naive_saturation(seed):
    rho1, rho0 = prepare(random_formula(random.Random(seed), depth=4, actions=("a", "b")))
    ct = ClosureTable(rho1, rho0)
    assert ct.n == len(naive_closure(rho1, rho0))
    assert all(not e.free for e in ct.entries)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_closure_is_idempotent(seed):
    rho1, rho0 = prepare(random_formula(random.Random(seed), depth=3))
    ct = ClosureTable(rho1, rho0)
    for e in ct.entries:
        assert all(g in ct for g in naive_closure(e).values())


def test_clf_example():
    psi = parse("mu X. (p | <a> X)")
    ct = ClosureTable(psi)
    body = psi.body.right
    assert ct.clf(body) is parse("<a> mu X. (p | <a> X)")
    assert ct.clf(psi) is psi


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_clf_lands_in_closure(seed):
    rho1, rho0 = prepare(random_formula(random.Random(seed), depth=4, actions=("a", "b")))
    ct = ClosureTable(rho1, rho0)
    for g in subformulas(rho1, rho0):
        assert ct.clf(g) in ct


@pytest.mark.parametrize("text, flag", [
    ("mu X. <a> X", None),
    ("mu X. (X | p)", "is_guarded"),
    ("nu X. mu Y. <a> (X & Y)", "is_alternation_free"),
    ("mu X. p", "is_irredundant"),
    ("(mu X. <a> X) & mu X. <b> X", "is_clean"),
])
def test_validate(text, flag):
    d = validate(parse(text))
    flags = ("is_clean", "is_irredundant", "is_guarded", "is_alternation_free")
    for name in flags:
        assert getattr(d, name) == (name != flag), name


def test_alternation_is_rejected_not_repaired():
    with pytest.raises(ValidationError):
        prepare(parse("nu X. mu Y. <a> (X & Y)"))


def test_make_clean_drops_vacuous_binder():
    assert make_clean_irredundant(parse("mu X. p")) is parse("p")


def test_make_clean_renames_second_binder():
    f = parse("(mu X. <a> X) & mu X. <b> X")
    g = make_clean_irredundant(f)
    assert validate(g).ok
    names = {h.label for h in subformulas(g) if h.op is Op.MU}
    assert len(names) == 2 and "X" in names


def test_make_clean_idempotent():
    f = parse("mu X. (p | <a> X) & nu Y. [b] Y")
    assert make_clean_irredundant(f) is f


def test_guardedness_keeps_guarded_input():
    f = parse("mu X. (p | <a> X)")
    assert guardedness_transform(f) is f


def test_guardedness_example():
    assert guardedness_transform(parse("mu X. (X | <a> X)")) is parse("mu X. <a> X")


def same_everywhere(f, g, states=3):
    atoms = tuple(sorted(set(_atoms(f)) | set(_atoms(g))))
    actions = tuple(sorted({h.label for h in subformulas(f, g) if h.is_modal}))
    sp = model_space(states, atoms, actions, 2 if states < 3 or len(atoms) + len(actions) <= 2 else 1)
    return np.array_equal(sp.evaluate(f), sp.evaluate(g))


def _atoms(f):
    return [h.label for h in subformulas(f) if h.op in (Op.ATOM, Op.DUAL)]


@pytest.mark.parametrize("text", [
    "mu X. (X | <a> X)",
    "nu X. (X & [a] X)",
    "mu X. (p | X & <a> X)",
    "mu X. (nu Y. (p & Y | <a> X))",
    "nu X. (q & mu Y. (p | Y | [a] X))",
    "mu X. (p | mu Y. (X | <a> Y))",
])
def test_guardedness_preserves_semantics(text):
    f = parse(text)
    g = make_clean_irredundant(guardedness_transform(f))
    assert validate(g).is_guarded
    assert same_everywhere(f, g)
