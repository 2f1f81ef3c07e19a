"""Closed-form T(G/Z), torsion-free rank, X(G/Z), and cross-validation.

Only the clause selection and arithmetic live in ``evaluate_T``; everything
computed by enumeration (normalizers, abelianizations, weak homomorphisms)
is used solely in ``cross_validate`` as an independent second route.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, log

import numpy as np

from .config import cap_or_default, get_config
from .errors import EndoAtlasError, HypothesisError, NoClosedFormError
from .matgrp import (
    AbelianGroupInv, GroupSpec, abelianization, bmatmul, closure, element_orders,
    enumerate_group, group_order, stabilizer_scan, whole_group,
)
from .matgrp.mat import identity_array
from .numtheory import is_prime, p_part, p_prime_part, valuation
from .pstruct import (
    build_sylow, elementary_rank2_subgroups, p_parameters, subgroup_orbits, sylow_order_valuation,
    sylow_subgroup,
)
from .report import Report

PERFECTION_EXCEPTIONS = frozenset({(2, 2), (2, 3)})


@dataclass
class TTResult:
    group: str
    p: int
    case_tag: str
    free_rank: int
    torsion: AbelianGroupInv
    params: dict
    warnings: list = field(default_factory=list)
    cross_check: dict = field(default_factory=lambda: {"status": "not_run"})

    @property
    def order(self):
        return self.torsion.order

    def to_json(self):
        return {"group": self.group, "p": self.p, "case_tag": self.case_tag,
                "free_rank": self.free_rank, "torsion": list(self.torsion.torsion),
                "params": self.params, "warnings": list(self.warnings),
                "cross_check": self.cross_check}


@dataclass
class RankReport:
    p_rank: int
    n_G: int
    tf_rank: int
    method: str
    p_rank_exact: bool = True

    def to_json(self):
        return {"p_rank": self.p_rank, "n_G": self.n_G, "tf_rank": self.tf_rank,
                "method": self.method, "p_rank_exact": self.p_rank_exact}


def tf_from_ranks(p_rank, n_G):
    if p_rank <= 1:
        return 0
    return n_G if p_rank == 2 else n_G + 1


# -- Sylow shape ----------------------------------------------------------

@dataclass(frozen=True)
class SylowShape:
    kind: str  # trivial | cyclic | abelian | nonabelian
    valuation: int  # v_p |S/(S ∩ Z)|
    p_rank: int


def _resolve_p(G: GroupSpec, p):
    p = p if p is not None else G.p
    if p is None:
        raise ValueError("a prime p is required")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if G.q % p == 0:
        raise HypothesisError(f"p = {p} divides q = {G.q}")
    return p


def sylow_shape(G: GroupSpec, p=None, cap=None) -> SylowShape:
    """Shape of a Sylow p-subgroup of G/Z."""
    p = _resolve_p(G, p)
    v = sylow_order_valuation(G, p) - valuation(G.z, p)
    if v == 0:
        return SylowShape("trivial", 0, 0)
    P = p_parameters(G.n, G.q, p)
    if G.z % p:
        if P.e == 1:
            rank = G.n if G.d % p == 0 else G.n - 1
        else:
            rank = P.r
        if not P.sylow_abelian:
            return SylowShape("nonabelian", v, rank)
        return SylowShape("cyclic" if rank <= 1 else "abelian", v, rank)
    return _quotient_sylow_shape(G, p, v, cap)


def _quotient_sylow_shape(G, p, v, cap):
    """S Z / Z by explicit computation (p divides |Z|)."""
    from .matgrp import bpow
    S = build_sylow(G.without_center(), p, cap)
    zvals = np.array(G.center_values, dtype=np.int64)
    zp = p_part(G.z, p)

    def in_Z(mats):
        d = mats[..., 0, 0]
        scalar = np.all(mats == d[..., None, None] * identity_array(G.n), axis=(-2, -1))
        return scalar & np.isin(d, zvals)

    abelian = all(bool(in_Z(x.commutator(y).a[None])[0])
                  for i, x in enumerate(S.gens) for y in S.gens[i + 1:])
    omega = int(np.sum(in_Z(bpow(G.field, S.elements(cap).mats, p)))) // zp
    rank = round(log(omega, p)) if omega > 1 else 0
    if not abelian:
        return SylowShape("nonabelian", v, max(rank, 2))
    return SylowShape("cyclic" if rank <= 1 else "abelian", v, rank)


def sylow_T_lookup(shape: SylowShape, p):
    """T(S) for cyclic S: Z/2 when |S| >= 3, trivial when |S| = 2."""
    if shape.kind != "cyclic":
        raise ValueError("lookup only covers cyclic Sylow subgroups")
    return AbelianGroupInv.from_cyclic([2] if p ** shape.valuation >= 3 else [])


# -- X(G/Z) -----------------------------------------------------------------

def X_group(G: GroupSpec, p=None, method="auto", cap=None) -> AbelianGroupInv:
    """p'-part of the abelianization of G/Z."""
    p = _resolve_p(G, p)
    if method == "auto":
        method = "closed" if (G.n, G.q) not in PERFECTION_EXCEPTIONS else "brute"
    if method == "closed":
        if (G.n, G.q) in PERFECTION_EXCEPTIONS:
            raise NoClosedFormError(f"SL({G.n},{G.q}) is not perfect")
        # G^ab = D (cyclic of order d); Z's image in D has order z / gcd(n, z)
        order = G.d * gcd(G.n, G.z) // G.z
        return AbelianGroupInv.from_cyclic([p_prime_part(order, p)])
    if method == "brute":
        H = whole_group(G.without_center(), cap)
        return abelianization(H, cap, modulo=G.center_gens()).p_prime_part(p)
    raise ValueError(f"unknown method {method!r}")


# -- evaluator ------------------------------------------------------------------

def _params(G, P, p):
    d, q = G.d, G.q
    m = (q - 1) // d
    ell = gcd(m * (q - 1), q ** P.e - 1) // m
    return {"e": P.e, "r": P.r, "f": P.f, "t": P.t, "d": d, "m": m, "l": ell,
            "a": p_prime_part(d, p)}


def evaluate_T(G: GroupSpec, p=None, cap=None) -> TTResult:
    p = _resolve_p(G, p)
    shape = sylow_shape(G, p, cap)
    label = G.label
    if shape.kind == "trivial":
        X = X_group(G, p, cap=cap)
        return TTResult(label, p, "p'-group", 0, X, {"d": G.d, "z": G.z},
                        ["p does not divide |G/Z|: every module is projective; "
                         "reported torsion is X(G/Z)"])
    P = p_parameters(G.n, G.q, p)
    prm = _params(G, P, p)
    if shape.kind == "nonabelian":
        raise NoClosedFormError(f"Sylow {p}-subgroup of {label} is nonabelian")
    if shape.kind == "abelian":
        return TTResult(label, p, "1.1", 1, X_group(G, p, cap=cap), prm)
    if G.z != 1:
        raise NoClosedFormError("cyclic Sylow with nontrivial Z: no closed form "
                                "(use cross_validate for T of the normalizer)")
    tag, tors, warn = _cyclic_clause(G, P, p, prm)
    return TTResult(label, p, tag, 0, AbelianGroupInv.from_cyclic(tors), prm, warn)


def _cyclic_clause(G, P, p, prm):
    n, q, d = G.n, G.q, G.d
    e, f = P.e, P.f
    if p == 2:
        assert n == 1
        w = ("closed form T = D/S omits the T(S) = Z/2 summand present when |S| >= 3; "
             "implemented as stated")
        return "1.2(a)", [prm["a"]], [w]
    if e == 1:
        if d % p == 0:
            assert n == 1
            return "1.2(b)", [prm["a"], 2], []
        assert n == 2
        if ((q - 1) // d) % 2:
            return "1.2(c)(i)", [d, 4], []
        return "1.2(c)(ii)", [d, 4, 2], []
    if f == 0:
        return "1.2(d)(i)", [prm["l"], 2 * e], []
    if f == 2 and q == 2:
        return "1.2(d)(ii)", [2 * e, 2], []
    return "1.2(d)(ii)", [2 * e, q - 1, d], []


def case_tag_consistent(res: TTResult) -> bool:
    """Recheck the clause hypotheses against the recorded parameters."""
    prm, p, t = res.params, res.p, res.case_tag
    if t in ("1.1", "p'-group"):
        return True
    d, q_minus_1 = prm["d"], prm["d"] * prm["m"]
    q = q_minus_1 + 1
    if prm["l"] != gcd(prm["m"] * q_minus_1, q ** prm["e"] - 1) // prm["m"]:
        return False
    if t == "1.2(a)":
        return p == 2
    if t == "1.2(b)":
        return p > 2 and prm["e"] == 1 and d % p == 0
    if t == "1.2(c)(i)":
        return p > 2 and prm["e"] == 1 and d % p != 0 and prm["m"] % 2 == 1
    if t == "1.2(c)(ii)":
        return p > 2 and prm["e"] == 1 and d % p != 0 and prm["m"] % 2 == 0
    if t == "1.2(d)(i)":
        return prm["e"] > 1 and prm["f"] == 0
    if t == "1.2(d)(ii)":
        return prm["e"] > 1 and prm["f"] > 0
    return False


# -- torsion-free rank -------------------------------------------------------------

def torsion_free_rank(G: GroupSpec, p=None, mode="closed_form", cap=None) -> RankReport:
    p = _resolve_p(G, p)
    if mode == "closed_form":
        shape = sylow_shape(G, p, cap)
        rank = shape.p_rank
        tf = 0 if rank <= 1 else 1
        nG = 1 if rank == 2 else 0
        return RankReport(rank, nG, tf, "closed_form")
    if mode == "brute_force":
        if G.z % p == 0 and G.z > 1:
            raise NoClosedFormError("brute-force rank is computed in G; p divides |Z|")
        return _rank_brute(G.without_center(), p, cap)
    raise ValueError(f"unknown mode {mode!r}")


def _rank_brute(G: GroupSpec, p, cap):
    els = enumerate_group(G, cap)
    F = G.field
    orders = element_orders(F, els.mats, group_order(G))
    pidx = np.nonzero(orders == p)[0]
    if not len(pidx):
        return RankReport(0, 0, 0, "brute_force")
    subs = elementary_rank2_subgroups(G, p, cap)
    if not subs:
        return RankReport(1, 0, 0, "brute_force")
    P = els.mats[pidx]
    maximal = []
    for s in subs:
        a = s[1]
        b = next(j for j in s[2:] if not _in_cyclic(els, a, j, p, F))
        x, y = els.mats[a], els.mats[b]
        comm = (np.all(bmatmul(F, x, P) == bmatmul(F, P, x), axis=(1, 2))
                & np.all(bmatmul(F, y, P) == bmatmul(F, P, y), axis=(1, 2)))
        outside = np.setdiff1d(pidx[comm], np.array(s))
        maximal.append(len(outside) == 0)
    max_subs = [s for s, m in zip(subs, maximal) if m]
    nG = len(set(subgroup_orbits(G, max_subs, cap).tolist())) if max_subs else 0
    if all(maximal):
        rank, exact = 2, True
    else:
        rank, exact = _p_rank_from_sylow(G, p, cap)
    return RankReport(rank, nG, tf_from_ranks(rank, nG), "brute_force", exact)


def _in_cyclic(els, a, j, p, F):
    x = els.mats[a]
    y = x
    target = els.mats[j]
    for _ in range(p - 1):
        if np.array_equal(y, target):
            return True
        y = bmatmul(F, y, x)
    return False


def _p_rank_from_sylow(G, p, cap, limit=729):
    from .balmer import p_subgroups, _exponent_is, _is_abelian
    S = sylow_subgroup(G, p, cap)
    if S.order > limit:
        return 3, False
    best = 1
    for Q in p_subgroups(S, cap):
        if _is_abelian(Q) and _exponent_is(Q, p):
            best = max(best, valuation(Q.order, p))
    return best, True


# -- cross-validation --------------------------------------------------------------

def _order_p_subgroup(S, p, cap):
    els = S.elements(cap)
    orders = element_orders(S.field, els.mats, S.order)
    i = int(np.nonzero(orders == p)[0][0])
    return closure([els.mat(i)], S.ambient, cap, name="S~")


def cross_validate(G: GroupSpec, p=None, cap=None, workers=None) -> Report:
    from .balmer import solve_weak_hom, weak_hom_presentation
    cap = cap_or_default(cap)
    p = p if p is not None else G.p
    rep = Report("cross_validate", {"group": G.label, "p": p})
    base = G.without_center()
    order = group_order(base)
    if order > cap:
        for leg in ("normalizer", "X_of_N", "order_identity", "weak_hom_vs_X_of_N"):
            rep.skip(leg, f"|G| = {order} > cap {cap}")
        return rep
    try:
        result = evaluate_T(G, p, cap)
        rep.value("evaluator", result.to_json())
        evaluator_error = None
    except EndoAtlasError as exc:
        result, evaluator_error = None, f"{type(exc).__name__}: {exc}"
        rep.value("evaluator_error", evaluator_error)
    S = sylow_subgroup(base, p, cap)
    rep.value("sylow_order", S.order)
    cyclic = _is_cyclic_mod(S, G, p, cap)
    zgens = G.center_gens()
    if cyclic:
        St = _order_p_subgroup(S, p, cap)
        N = stabilizer_scan("normalizer", St, base, cap, workers)
        XN = abelianization(N, cap, modulo=zgens).p_prime_part(p)
        v = valuation(S.order, p) - valuation(G.z, p)
        TS = AbelianGroupInv.from_cyclic([2] if p ** v >= 3 else [])
        rep.check("normalizer", N.contains_all(S.gens), order=N.order)
        rep.value("X_of_N", XN)
        rep.value("T_of_S", TS)
        if result is not None and result.free_rank == 0:
            rep.check("order_identity", result.order == XN.order * TS.order,
                      evaluator=result.order, X_of_N=XN.order, T_of_S=TS.order)
        elif evaluator_error is not None and G.z == 1:
            rep.check("order_identity", False, evaluator_error=evaluator_error,
                      X_of_N=XN.order, T_of_S=TS.order, product=XN.order * TS.order)
        else:
            rep.skip("order_identity", evaluator_error or "no closed form")
            rep.value("T_order_from_normalizer", XN.order * TS.order)
        if G.z == 1:
            sol = _solve(base, S, p, cap, workers, weak_hom_presentation, solve_weak_hom)
            rep.value("A_mode", sol.completeness)
            rep.check("weak_hom_vs_X_of_N", sol.group == XN, A=sol.group, X_of_N=XN)
        else:
            rep.skip("weak_hom_vs_X_of_N", "weak homomorphisms are computed on G, not G/Z")
    else:
        Xc = X_group(G, p, "closed", cap) if (G.n, G.q) not in PERFECTION_EXCEPTIONS else None
        Xb = X_group(G, p, "brute", cap)
        if Xc is not None:
            rep.check("X_closed_vs_brute", Xc == Xb, closed=Xc, brute=Xb)
        rc = torsion_free_rank(G, p, "closed_form", cap)
        try:
            rb = torsion_free_rank(G, p, "brute_force", cap)
            rep.check("tf_closed_vs_brute", rc.tf_rank == rb.tf_rank, closed=rc, brute=rb)
        except NoClosedFormError as exc:
            rb = torsion_free_rank(base, p, "brute_force", cap)
            rep.value("tf_brute_on_G", rb)
            rep.check("tf_closed_vs_brute", rc.tf_rank == rb.tf_rank, closed=rc, brute=rb,
                      note=str(exc))
        sol = _solve(base, S, p, cap, workers, weak_hom_presentation, solve_weak_hom)
        XG = X_group(base, p, "brute", cap)
        rep.value("A_mode", sol.completeness)
        rep.check("A_contains_X", sol.group.order % XG.order == 0, A=sol.group, X_of_G=XG)
    if result is not None:
        result.cross_check = {"status": "passed" if rep.passed else "failed"}
        rep.value("evaluator", result.to_json())
    return rep


def _solve(G, S, p, cap, workers, present, solve):
    cfg = get_config()
    n = group_order(G)
    mode = "full" if n * n <= cfg.max_relation_pairs else "reduced"
    return solve(present(G, S, p, mode, cap=cap, workers=workers))


def _is_cyclic_mod(S, G, p, cap):
    """Is S Z / Z cyclic?"""
    if G.z % p:
        els = S.elements(cap)
        orders = element_orders(S.field, els.mats, S.order)
        return int(orders.max()) == S.order
    return sylow_shape(G, p, cap).kind == "cyclic"


__all__ = [
    "TTResult", "RankReport", "SylowShape", "sylow_shape", "sylow_T_lookup", "X_group",
    "evaluate_T", "case_tag_consistent", "torsion_free_rank", "tf_from_ranks",
    "cross_validate",
]
