import random

import pytest

from monomu.closure import validate
from monomu.generate import (
    enumerate_formulas, random_formula, random_model, random_relational_model,
)


@pytest.mark.parametrize("seed", range(30))
def test_random_formulas_are_well_formed(seed):
    f = random_formula(random.Random(seed), depth=5, actions=("a", "b"))
    assert not f.free and validate(f).ok


def test_unguarded_option():
    rng = random.Random(1)
    fs = [random_formula(rng, depth=4, guarded=False) for _ in range(200)]
    assert any(not validate(f).is_guarded for f in fs)
    assert all(validate(f).is_alternation_free for f in fs)


def test_enumeration_small():
    fs = enumerate_formulas(2)
    texts = {str(f) for f in fs}
    assert {"true", "p", "~p", "<a> p", "[a] false"} <= texts
    assert all(validate(f).ok for f in enumerate_formulas(4))


def test_enumeration_is_duplicate_free():
    fs = enumerate_formulas(5)
    assert len(fs) == len(set(fs))


def test_random_models_shape():
    m = random_model(random.Random(2), 3, actions=("a", "b"), max_nbhds=2)
    assert m.size == 3 and all(len(m.N(a, i)) <= 2 for a in "ab" for i in range(3))
    c = random_relational_model(random.Random(2), 4)
    assert set(c.rel) == {"a", "e"} and c.size == 4
