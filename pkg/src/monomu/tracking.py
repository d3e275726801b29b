"""Letters, the deferral tracking function and propositional transformation.

A propositional letter ``(chi, b)`` names one application of the and/or/
fixpoint rule to ``chi`` (``b`` picks the disjunct); a modal letter
``(<a> phi0, [a] phi1)`` names an application of the modal rule.

Everything here has two layers: a formula-level API working on frozensets
of :class:`~monomu.formula.Formula` (used by tests and the certificate
checker) and bitmask kernels over a :class:`~monomu.closure.ClosureTable`
(used by the game).  Both layers agree by construction since the former is
implemented through the latter.
"""

from __future__ import annotations

from typing import NamedTuple

from monomu.closure import ClosureTable
from monomu.formula import Formula, Op

__all__ = [
    "PropLetter", "ModalLetter", "LetterError", "prop_letter", "modal_letter",
    "deferrals", "delta", "delta_set", "gamma",
    "delta_mask", "gamma_mask", "modal_delta_mask",
]


class LetterError(ValueError):
    """A letter that does not belong to the alphabet of the closure."""


class PropLetter(NamedTuple):
    formula: Formula
    bit: int

    def __str__(self) -> str:
        return f"({self.formula}, {self.bit})"


class ModalLetter(NamedTuple):
    dia: Formula
    box: Formula

    def __str__(self) -> str:
        return f"({self.dia}, {self.box})"


_PROP_OPS = (Op.AND, Op.OR, Op.MU, Op.NU)


def prop_letter(ct: ClosureTable, formula: Formula, bit: int = 0) -> PropLetter:
    """Validated propositional letter.

    The bit only matters for disjunctions; for conjunctions and fixpoints
    it is normalised to 0.
    """
    if bit not in (0, 1):
        raise LetterError(f"branch bit must be 0 or 1, got {bit!r}")
    i = ct.lookup(formula)
    if i is None:
        raise LetterError(f"{formula} is not in the closure")
    if ct.ops[i] not in _PROP_OPS:
        raise LetterError(f"{formula} is not a conjunction, disjunction or fixpoint")
    if ct.ops[i] is not Op.OR:
        bit = 0
    return PropLetter(ct.entries[i], bit)


def modal_letter(ct: ClosureTable, dia: Formula, box: Formula) -> ModalLetter:
    i, j = ct.lookup(dia), ct.lookup(box)
    if i is None or j is None:
        raise LetterError("modal letter components must be in the closure")
    if ct.ops[i] is not Op.DIA or ct.ops[j] is not Op.BOX:
        raise LetterError("modal letter needs a diamond and a box")
    if ct.entries[i].label != ct.entries[j].label:
        raise LetterError("modal letter components must share the action")
    return ModalLetter(ct.entries[i], ct.entries[j])


def _coerce(ct: ClosureTable, letter):
    if isinstance(letter, ModalLetter):
        return modal_letter(ct, *letter)
    if isinstance(letter, tuple) and len(letter) == 2 and isinstance(letter[1], int):
        return prop_letter(ct, *letter)
    if isinstance(letter, tuple) and len(letter) == 2:
        return modal_letter(ct, *letter)
    raise LetterError(f"malformed letter {letter!r}")


# ---------------------------------------------------------------- kernels

def delta_mask(ct: ClosureTable, foc: int, chi: int, bit: int) -> int:
    """Tracking along the propositional letter ``(chi, bit)`` on a focus mask."""
    if not foc >> chi & 1:
        return foc
    add0, add1 = ct.add[chi]
    added = add1 if (bit and add1 is not None) else add0
    return (foc & ~(1 << chi)) | (added & ct.dfr_mask)


def modal_delta_mask(ct: ClosureTable, foc: int, dia: int, box: int) -> int:
    """Tracking along the modal letter ``(dia, box)``; unrelated foci end."""
    out = 0
    if foc >> dia & 1:
        out |= 1 << ct.succ[dia][0]
    if foc >> box & 1:
        out |= 1 << ct.succ[box][0]
    return out & ct.dfr_mask


def gamma_mask(ct: ClosureTable, gam: int, chi: int, bit: int) -> int:
    if not gam >> chi & 1:
        return gam
    add0, add1 = ct.add[chi]
    added = add1 if (bit and add1 is not None) else add0
    return (gam & ~(1 << chi)) | added


# ------------------------------------------------------------ formula level

def deferrals(ct: ClosureTable) -> frozenset:
    """The deferrals of the closure as formulas."""
    return ct.deferrals()


def delta(ct: ClosureTable, foc: Formula, letter) -> frozenset:
    """``delta(foc, l)`` for a single deferral ``foc``."""
    i = ct.lookup(foc)
    if i is None or i not in ct.dfr:
        raise LetterError(f"{foc} is not a deferral")
    return delta_set(ct, {foc}, [letter])


def delta_set(ct: ClosureTable, focus, word) -> frozenset:
    """Pointwise union of ``delta`` over ``focus``, folded along ``word``."""
    m = ct.mask(focus)
    if m & ~ct.dfr_mask:
        raise LetterError("focus contains a non-deferral")
    for letter in word:
        letter = _coerce(ct, letter)
        if isinstance(letter, PropLetter):
            m = delta_mask(ct, m, ct.id(letter.formula), letter.bit)
        else:
            m = modal_delta_mask(ct, m, ct.id(letter.dia), ct.id(letter.box))
    return ct.formulas(m)


def gamma(ct: ClosureTable, formulas, word) -> frozenset:
    """Propositional transformation of a formula set along a word of
    propositional letters."""
    m = ct.mask(formulas)
    for letter in word:
        letter = _coerce(ct, letter)
        if not isinstance(letter, PropLetter):
            raise LetterError("gamma is defined on propositional letters only")
        m = gamma_mask(ct, m, ct.id(letter.formula), letter.bit)
    return ct.formulas(m)
