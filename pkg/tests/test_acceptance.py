"""Acceptance suite.  Each test covers one numbered criterion and records a
one-line summary that is printed in the terminal report."""

import dataclasses
import random
import time
from pathlib import Path

import pytest

from monomu import TOP, parse
from monomu.certificate import CertMove, verify_certificate
from monomu.closure import (
    ClosureTable, guardedness_transform, make_clean_irredundant, prepare, raw_closure, validate,
)
from monomu.formula import Op, conj, negate, box, dia
from monomu.frontends import GameError, parse_game_formula, translate
from monomu.closure import ValidationError
from monomu.generate import (
    enumerate_formulas, random_formula, random_game_text, random_model, random_relational_model,
)
from monomu.oracles import (
    brute_force_sat, model_to_relational, relational_eval, relational_to_model,
    relational_translate,
)
from monomu.semantics import (
    TimeoutVector, check_monotone_bisimulation, extension, extension_timeout,
    is_global_model, submodel_modality,
)
from monomu.solver import decide_sat

from helpers import bisimilar_pair, forged_certificate

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
ACTIONS = ("a", "b")
GUARD_BLOWUP_C = 1


def sat_corpus(count=240, seed=2024, max_n=40):
    """Generated (rho1, rho0) pairs with closure size at most ``max_n``."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        rho1 = random_formula(rng, depth=rng.randint(2, 8), actions=ACTIONS)
        rho0 = TOP if rng.random() < 0.5 else random_formula(rng, depth=2, actions=ACTIONS)
        n = ClosureTable(*prepare(rho1, rho0)).n
        if n <= max_n:
            out.append((rho1, rho0, n))
    return out


@pytest.fixture(scope="module")
def solved():
    start = time.perf_counter()
    results = [(rho1, rho0, n, decide_sat(rho1, rho0)) for rho1, rho0, n in sat_corpus()]
    return results, time.perf_counter() - start


@pytest.mark.criterion(1)
def test_structural_bounds(solved, record):
    results, elapsed = solved
    start = time.perf_counter()
    sat = 0
    for _, _, n, r in results:
        assert r.n == n
        if r:
            sat += 1
            cert = r.certificate
            assert cert.eloise_entries <= 4 * n * n
            assert cert.max_word <= 3 * n
            assert r.model().size <= 4 * n * n
    elapsed += time.perf_counter() - start
    ns = [n for _, _, n, _ in results]
    assert len(results) >= 200 and max(ns) <= 40 and max(ns) >= 30
    assert elapsed < 300
    record(f"{len(results)} formulas, n <= {max(ns)}, {sat} SAT, {elapsed:.1f}s")


@pytest.mark.criterion(2)
def test_end_to_end_soundness(solved, record):
    results, _ = solved
    checked = 0
    for rho1, rho0, _, r in results:
        if r:
            m = r.model()
            assert is_global_model(m, rho0), (rho1, rho0)
            assert extension(m, rho1) != 0, (rho1, rho0)
            checked += 1
    assert checked > 0
    record(f"{checked} extracted models checked")


def _global_formula(rng, m, tries=60):
    for _ in range(tries):
        phi = random_formula(rng, depth=rng.randint(1, 3), actions=ACTIONS)
        if extension(m, phi) == m.full:
            return phi
    return TOP


@pytest.mark.criterion(3)
def test_two_sided_random_oracle(record):
    rng = random.Random(3)
    positive = nontrivial_global = 0
    while positive < 1000:
        m = random_model(rng, rng.randint(1, 4), actions=ACTIONS)
        rho0 = _global_formula(rng, m)
        psi = random_formula(rng, depth=rng.randint(2, 5), actions=ACTIONS)
        if extension(m, psi) == 0:
            continue
        assert decide_sat(psi, rho0).sat, (psi, rho0, m)
        positive += 1
        nontrivial_global += rho0 is not TOP
    negative = 0
    while negative < 1000:
        psi = random_formula(rng, depth=rng.randint(1, 5), actions=ACTIONS)
        if ClosureTable(*prepare(psi)).n > 20:
            continue
        assert not decide_sat(conj(psi, negate(psi))).sat, psi
        negative += 1
    complement = 0
    while complement < 500:
        m = random_model(rng, rng.randint(1, 4), actions=ACTIONS)
        psi = random_formula(rng, depth=rng.randint(1, 5), actions=ACTIONS)
        assert extension(m, negate(psi)) == m.full & ~extension(m, psi)
        complement += 1
    record(f"(i) {positive} SAT ({nontrivial_global} non-trivial globals), "
           f"(ii) {negative} UNSAT, complement {complement}")


@pytest.mark.criterion(4)
def test_brute_force_agreement(record):
    start = time.perf_counter()
    formulas = [f for f in enumerate_formulas(8) if ClosureTable(*prepare(f)).n <= 8]
    sat = gap = 0
    for f in formulas:
        d = decide_sat(f).sat
        b = brute_force_sat(f, TOP, 3, 2).sat
        assert d or not b, f
        sat += d
        gap += d and not b
    elapsed = time.perf_counter() - start
    assert elapsed < 600
    record(f"{len(formulas)} formulas (AST size <= 8, |cl| <= 8), {sat} SAT, "
           f"{gap} SAT beyond the brute-force bounds, {elapsed:.0f}s")


@pytest.mark.criterion(5)
def test_modal_rule_soundness(record):
    rng = random.Random(5)
    premises = 0
    for _ in range(500):
        m = random_model(rng, rng.randint(1, 4), actions=ACTIONS)
        a = rng.choice(ACTIONS)
        phi = random_formula(rng, depth=3, actions=ACTIONS)
        psi = random_formula(rng, depth=3, actions=ACTIONS)
        if extension(m, conj(box(a, phi), dia(a, psi))):
            premises += 1
            assert extension(m, conj(phi, psi)), (m, phi, psi)
    assert premises >= 50
    record(f"500 cases, {premises} with satisfied premise, 0 violations")


@pytest.mark.criterion(6)
def test_timeout_covers_extension(record):
    rng = random.Random(6)
    deferral_cases = 0
    for _ in range(200):
        want_deferral = rng.random() < 0.7
        while True:
            ct = ClosureTable(*prepare(random_formula(rng, depth=4, actions=ACTIONS)))
            if ct.dfr or not want_deferral:
                break
        m = random_model(rng, rng.randint(1, 4), actions=ACTIONS)
        f = ct.entries[rng.choice(sorted(ct.dfr) if want_deferral else range(ct.n))]
        deferral_cases += ct.is_deferral(f)
        t = TimeoutVector.full(ct.k, m.size)
        assert extension(m, f) & ~extension_timeout(m, f, t, ct) == 0, (f, m)
    assert deferral_cases >= 100
    record(f"200 cases ({deferral_cases} deferrals), 0 violations")


@pytest.mark.criterion(7)
def test_bisimilar_pair(record):
    f1, f2, rel = bisimilar_pair()
    assert check_monotone_bisimulation(f1, f2, rel)
    assert submodel_modality(f2, parse("p"), "x2")
    assert not submodel_modality(f1, parse("p"), "x1")
    rng = random.Random(7)
    probes = [parse(t) for t in ("p", "<a> p", "[a] p", "<a> ~p", "mu X. (~p | <a> X)")]
    while len(probes) < 20:
        probes.append(random_formula(rng, depth=4, actions=("a",)))
    compared = 0
    for phi in probes:
        for g in ClosureTable(*prepare(phi)).entries:
            e1, e2 = extension(f1, g), extension(f2, g)
            for x, y in rel:
                assert bool(e1 >> f1.index[x] & 1) == bool(e2 >> f2.index[y] & 1), (g, x, y)
            compared += 1
    record(f"bisimulation accepted, submodel modality true at x2 and false at x1, "
           f"{compared} closure formulas agree")


@pytest.mark.criterion(8)
def test_relational_translation(record):
    rng = random.Random(8)
    nonempty = 0
    for _ in range(200):
        c = random_relational_model(rng, rng.randint(1, 5), actions=ACTIONS)
        psi = random_formula(rng, depth=4, actions=ACTIONS)
        e = extension(relational_to_model(c), psi)
        assert e == relational_eval(c, relational_translate(psi)), (psi,)
        nonempty += e != 0
    for _ in range(200):
        m = random_model(rng, rng.randint(1, 4), actions=ACTIONS)
        psi = random_formula(rng, depth=4, actions=ACTIONS)
        rel = relational_eval(model_to_relational(m), relational_translate(psi)) & m.full
        assert extension(m, psi) & ~rel == 0, (psi,)
    assert nonempty >= 50
    record(f"200 equality cases ({nonempty} non-empty), 200 inclusion cases")


@pytest.mark.criterion(9)
def test_translation_examples_and_blowup(record):
    lines = (CORPUS / "gamelogic" / "instances.txt").read_text().splitlines()
    expected = {"<a*>p": "mu X. (p | <a> X)",
                "<a n b>p": "<a> p & <b> p",
                "<a x>p": "nu Y. (p & <a> Y)"}
    for src, out in expected.items():
        assert src in lines
        assert str(translate(src)) == out
    rng = random.Random(9)
    sources = [parse_game_formula(line) for line in lines]
    while len(sources) < 500:
        text = random_game_text(rng, depth=rng.randint(2, 5))
        try:
            translate(text)
        except (GameError, ValidationError):
            continue
        sources.append(parse_game_formula(text))
    while len(sources) < 1000:
        f = random_formula(rng, depth=rng.randint(2, 6), guarded=False, actions=ACTIONS)
        if not validate(f).is_guarded:
            sources.append(f)
    worst = 0.0
    for f in sources:
        f = make_clean_irredundant(f)
        g = make_clean_irredundant(guardedness_transform(f))
        assert validate(g).ok
        n0, n1 = len(raw_closure(f)), len(raw_closure(g))
        assert n1 <= GUARD_BLOWUP_C * n0 * n0
        worst = max(worst, n1 / n0)
    record(f"3 clauses verbatim; {len(sources)} formulas, |cl| after / before <= {worst:.2f}, "
           f"bound C = {GUARD_BLOWUP_C}")


def _replace_move(cert, nid, move):
    moves = dict(cert.moves)
    if move is None:
        del moves[nid]
    else:
        moves[nid] = move
    return dataclasses.replace(cert, moves=moves)


def _mutations():
    out = []
    wrong_bit = ["(p | q) & <a> true", "(p | q) & (r | ~p)", "mu X. (p | <a> X) & (q | r)",
                 "nu Y. ((p | q) & <a> Y)", "<a> (p | q) & [a] (r | ~r)",
                 "(<a> p | <b> q) & [a] r"]
    for text in wrong_bit:
        cert = decide_sat(parse(text)).certificate
        for nid, move in cert.moves.items():
            k = next((i for i, (f, _) in enumerate(move.word)
                      if f.op is Op.OR and f.args[0] is not f.args[1]), None)
            if k is not None:
                f, b = move.word[k]
                word = move.word[:k] + ((f, 1 - b),) + move.word[k + 1:]
                out.append((f"wrong bit in {text}", _replace_move(cert, nid, CertMove(word, move.target)), "ii"))
                break
    missing = ["<a> p & [a] q & <a> r", "nu Y. (<a> Y & [a] p)", "<a> (mu X. (p | <a> X)) & [a] q",
               "<a> <b> p & [a] [b] q", "<a> p & <b> q & [a] r & [b] s", "(mu X. (p | <a> X)) & ~p & [a] true & <a> p"]
    for text in missing:
        cert = decide_sat(parse(text)).certificate
        victims = [i for i in cert.moves if i != cert.initial]
        out.append((f"missing response in {text}", _replace_move(cert, victims[-1], None), "iii"))
    cycles = [("mu X. <a> X", "[a] true"), ("mu X. (<a> X & <b> true)", "[a] true"),
              ("mu X. <a> <a> X", "[a] true"), ("mu X. (p | <a> X)", "~p & [a] true"),
              ("mu X. (<a> X | <b> X)", "[a] true & [b] true"),
              ("nu Y. (q & mu X. <a> X)", "[a] true")]
    for rho1, rho0 in cycles:
        out.append((f"persistent focus in {rho1}", forged_certificate(parse(rho1), parse(rho0)), "iv"))
    cert = decide_sat(parse("p | q")).certificate
    out.append(("initial move removed", _replace_move(cert, cert.initial, None), "i"))
    out.append(("initial points at Abelard node",
                dataclasses.replace(cert, initial=cert.moves[cert.initial].target), "i"))
    move = cert.moves[cert.initial]
    out.append(("word over 3n", _replace_move(
        cert, cert.initial, CertMove(move.word + ((parse("p | q"), 0),) * 40, move.target)), "ii"))
    return out


@pytest.mark.criterion(10)
def test_mutated_certificates(record):
    muts = _mutations()
    assert len(muts) >= 20
    codes = {}
    for name, cert, code in muts:
        ver = verify_certificate(cert)
        assert not ver, name
        assert ver.code == code, (name, ver.code, ver.detail)
        codes[code] = codes.get(code, 0) + 1
    shown = ", ".join(f"{k}: {v}" for k, v in sorted(codes.items()))
    record(f"{len(muts)} mutated certificates rejected with the expected code ({shown})")
