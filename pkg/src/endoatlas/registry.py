"""Static table of named checks: id -> (runner, parameter names, summary).

The CLI's ``--list-checks`` prints this table and the ``structure`` and
``cosets`` subcommands dispatch through it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .cosets import verify_coset_lemmas
from .errors import HypothesisError
from .matgrp import GroupSpec
from .numtheory import valuation
from .pstruct import (
    build_elementary_Ep, build_sylow, lemma33_scan, sylow_order_valuation, verify_glebasics,
    verify_torus_commutator, verify_weyl_abelianization,
)
from .report import Report


@dataclass(frozen=True)
class CheckEntry:
    check_id: str
    runner: Callable
    params: tuple
    summary: str


def _section7(n, q, p):
    from .balmer import verify_section7
    if n % 2:
        raise HypothesisError("section-7 checks need even n = 2e")
    return verify_section7(n // 2, q, p)


def _sylow(n, q, p, d=None):
    G = GroupSpec(n, q, q - 1 if d is None else d)
    S = build_sylow(G, p)
    v = sylow_order_valuation(G, p)
    rep = Report("sylow", {"group": G.label, "p": p})
    rep.check("order", S.order == p ** v, order=S.order, expected=p ** v)
    rep.value("generators", S.gens)
    return rep


def _ep(n, q, p, d=None):
    G = GroupSpec(n, q, q - 1 if d is None else d)
    E = build_elementary_Ep(G, p)
    rep = Report("ep", {"group": G.label, "p": p})
    rep.check("elementary_abelian", all(x @ y == y @ x for x in E.gens for y in E.gens)
              and all((x ** p).is_identity() for x in E.gens), rank=valuation(E.order, p))
    rep.value("order", E.order)
    return rep


def _lemma33(n, q, p, d=None):
    return lemma33_scan(GroupSpec(n, q, q - 1 if d is None else d), p)


def _coset(lemma):
    return lambda n, q: verify_coset_lemmas(lemma, n, q)


CHECKS = {
    "glebasics": CheckEntry("glebasics", lambda n, q, p=None: verify_glebasics(n, q, p),
                            ("e", "q", "p?"),
                            "special elements w, u, g, v of GL(e,q) and their normalizer data"),
    "torus-commutator": CheckEntry("torus-commutator", lambda n, q, p=None:
                                   verify_torus_commutator(n, q), ("n", "q"),
                                   "diagonal SL elements as commutators with the torus"),
    "section7": CheckEntry("section7", _section7, ("n=2e", "q", "p"),
                           "element-level normalizer and chain identities in SL(2e,q)"),
    "weyl-ab": CheckEntry("weyl-ab", lambda n, q, p=None: verify_weyl_abelianization(n, q),
                          ("r", "q"), "abelianization of the monomial Weyl image"),
    "sylow": CheckEntry("sylow", _sylow, ("n", "q", "p"), "structured Sylow subgroup order"),
    "ep": CheckEntry("ep", _ep, ("n", "q", "p"), "standard maximal elementary abelian subgroup"),
    "lemma33": CheckEntry("lemma33", _lemma33, ("n", "q", "p"),
                          "every C_p x C_p is conjugate into E_p (exhaustive)"),
    "coset-9.1": CheckEntry("coset-9.1", _coset("9.1"), ("n", "q"),
                            "L\\[P,P]/L has two double cosets, reps 1 and phi(e_{n-1})"),
    "coset-9.3": CheckEntry("coset-9.3", _coset("9.3"), ("n", "q"),
                            "P/[P,P] represented by the elements a_zeta"),
    "coset-9.4": CheckEntry("coset-9.4", _coset("9.4"), ("n", "q"),
                            "P\\G/P has two double cosets (Bruhat)"),
    "coset-9.5": CheckEntry("coset-9.5", _coset("9.5"), ("n", "q"),
                            "[P,P]\\G/[P,P] covered by diag(I_{n-2}, W) representatives"),
}

STRUCTURE_CHECKS = ("glebasics", "torus-commutator", "section7", "weyl-ab", "sylow", "ep",
                    "lemma33")
COSET_LEMMAS = ("9.1", "9.3", "9.4", "9.5")


def list_checks():
    return [{"check_id": c.check_id, "params": list(c.params), "summary": c.summary}
            for c in CHECKS.values()]


def run_structure(check, n, q, p=None):
    entry = CHECKS[check]
    return entry.runner(n, q, p)


def run_coset_lemma(lemma, n, q):
    return CHECKS[f"coset-{lemma}"].runner(n, q)
