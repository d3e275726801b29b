"""Shared fixtures: a pair of monotone-bisimilar models that differ on the
submodel modality."""

from monomu.semantics import NeighbourhoodModel


def bisimilar_pair():
    f1 = NeighbourhoodModel.from_sets(
        ["x1", "u1", "v11", "v12"],
        {"p": ["x1", "v11", "v12"]},
        {"a": {"x1": [["u1", "v11"], ["v11", "v12"]]}})
    f2 = NeighbourhoodModel.from_sets(
        ["x2", "u2", "v2"],
        {"p": ["x2", "v2"]},
        {"a": {"x2": [["v2"]]}})
    relation = [("x1", "x2"), ("u1", "u2"), ("v11", "v2"), ("v12", "v2")]
    return f1, f2, relation


def forged_certificate(rho1, rho0=None, choice=0):
    """Certificate for an arbitrary (possibly losing) Eloise strategy that
    always takes move number ``choice`` (or the last one if fewer)."""
    from monomu.certificate import extract_certificate
    from monomu.closure import ClosureTable, prepare
    from monomu.formula import TOP
    from monomu.game import ELOISE, BuchiSolution, build_arena

    ct = ClosureTable(*prepare(rho1, TOP if rho0 is None else rho0))
    ar = build_arena(ct)
    strategy = {i: min(choice, len(s) - 1) for i, s in enumerate(ar.succ)
                if ar.nodes[i][0] == ELOISE and s}
    fake = BuchiSolution([True] * len(ar.nodes), strategy, [None] * len(ar.nodes))
    return extract_certificate(ar, fake)
