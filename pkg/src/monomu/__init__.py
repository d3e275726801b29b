"""Satisfiability checking for the alternation-free monotone mu-calculus."""

from monomu.formula import (
    BOT, TOP, Formula, FormulaError, Op, atom, box, conj, dia, disj, dual,
    mu, negate, nu, subst, ubox, udia, var,
)
from monomu.parser import ParseError, parse

__version__ = "0.1.0"

__all__ = [
    "BOT",
    "TOP",
    "Formula",
    "FormulaError",
    "Op",
    "atom",
    "box",
    "conj",
    "dia",
    "disj",
    "dual",
    "mu",
    "negate",
    "nu",
    "subst",
    "ubox",
    "udia",
    "var",
    "ParseError",
    "parse",
]
