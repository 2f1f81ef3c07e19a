import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from endoatlas.balmer import (
    certify_trivial, normalizer_oracle, p_subgroups, parabolic_chain_certificate, rho_chain,
    sl_is_perfect, solve_weak_hom, verify_section7, weak_hom_presentation,
)
from endoatlas.cosets import lower_sl
from endoatlas.errors import HypothesisError
from endoatlas.matgrp import GroupSpec, Mat, Subgroup, derived_subgroup, enumerate_group, whole_group
from endoatlas.numtheory import p_prime_part
from endoatlas.pstruct import sylow_subgroup


def _key(m):
    return tuple(np.asarray(m).ravel().tolist())


def naive_weak_hom(G, H, p):
    """A(G,H) from first principles: loops over all pairs of group elements."""
    F = G.field
    els = [Mat(F, m) for m in enumerate_group(G).mats]
    Hk = {_key(m) for m in H.elements().mats}
    Hm = [Mat(F, m) for m in H.elements().mats]
    hp = [h for h in Hm if h.order() == p]
    # double cosets by explicit orbit expansion
    label = {}
    for x in els:
        if _key(x.a) in label:
            continue
        lab = len(set(label.values()))
        for h1 in Hm:
            for h2 in Hm:
                label.setdefault(_key((h1 @ x @ h2).a), lab)
    inv = {_key(x.a): x.inv() for x in els}
    mask = {}
    for x in els:
        xi = inv[_key(x.a)]
        mask[_key(x.a)] = frozenset(i for i, h in enumerate(hp) if _key((xi @ h @ x).a) in Hk)
    ncos = len(set(label.values()))
    ident = label[_key(np.eye(G.n, dtype=np.int64))]
    killed = {ident}
    for x in els:
        if not mask[_key(x.a)]:
            killed.add(label[_key(x.a)])
    live = [c for c in range(ncos) if c not in killed]
    pos = {c: i for i, c in enumerate(live)}
    rows = set()
    for a, b in itertools.product(els, els):
        ab = a @ b
        if not (mask[_key(a.a)] & mask[_key(ab.a)]):
            continue
        row = [0] * len(live)
        for c, v in ((label[_key(ab.a)], 1), (label[_key(a.a)], -1), (label[_key(b.a)], -1)):
            if c in pos:
                row[pos[c]] += v
        if any(row):
            rows.add(tuple(row))
    if not live:
        return []
    if not rows:
        raise AssertionError("free symbols")
    inv_f = [abs(int(x)) for x in invariant_factors(Matrix(sorted(rows)), domain=ZZ)]
    assert len([x for x in inv_f if x]) == len(live)
    return sorted(x for x in (p_prime_part(x, p) for x in inv_f) if x > 1)


CRIT2 = [(GroupSpec.sl(2, 4), 3, [2]), (GroupSpec.sl(3, 2), 7, [3]),
         (GroupSpec.sl(2, 5), 5, [4]), (GroupSpec.sl(2, 7), 3, [4])]


@pytest.mark.parametrize("G,p,want", CRIT2, ids=lambda x: getattr(x, "label", str(x)))
def test_weak_hom_small_cases(G, p, want):
    H = sylow_subgroup(G, p)
    sol = solve_weak_hom(weak_hom_presentation(G, H, p, "full"))
    assert list(sol.group.torsion) == want
    assert list(normalizer_oracle(G, H, p)[0].torsion) == want


@pytest.mark.parametrize("G,p", [(GroupSpec.sl(2, 4), 3), (GroupSpec.sl(2, 5), 5),
                                 (GroupSpec.sl(2, 3), 3)])
def test_weak_hom_matches_naive(G, p):
    H = sylow_subgroup(G, p)
    sol = solve_weak_hom(weak_hom_presentation(G, H, p, "full"))
    assert list(sol.group.torsion) == naive_weak_hom(G, H, p)


def test_whole_group_is_trivial():
    G = GroupSpec.sl(2, 4)
    P = weak_hom_presentation(G, whole_group(G), 3)
    assert len(P.cosets) == 1 and P.live == [] and solve_weak_hom(P).group.is_trivial()


def test_needs_sylow():
    G = GroupSpec.sl(2, 4)
    with pytest.raises(HypothesisError):
        weak_hom_presentation(G, Subgroup(G, [], name="1"), 3)


@pytest.mark.parametrize("G,p", [(GroupSpec.sl(2, 4), 3), (GroupSpec.sl(3, 2), 7),
                                 (GroupSpec.gl(2, 3), 3), (GroupSpec.sl(2, 5), 5)])
def test_reduced_rows_equal_full_rows(G, p):
    H = sylow_subgroup(G, p)
    full = weak_hom_presentation(G, H, p, "full")
    red = weak_hom_presentation(G, H, p, "reduced")
    rows = lambda P: {tuple(sorted(r.items())) for r in P.relations}
    assert rows(full) == rows(red)
    assert full.killed == red.killed
    assert red.pairs_examined < full.pairs_examined


@settings(max_examples=10)
@given(st.integers(0, 10 ** 6), st.integers(0, 400))
def test_sampled_is_upper_bound(seed, k):
    G, p = GroupSpec.sl(2, 5), 5
    H = sylow_subgroup(G, p)
    full = solve_weak_hom(weak_hom_presentation(G, H, p, "full"))
    samp = solve_weak_hom(weak_hom_presentation(G, H, p, "sampled", seed=seed, samples=k))
    assert samp.upper_bound_only
    if samp.lattice.free_rank == 0:
        assert samp.group.order % full.group.order == 0
    else:
        assert "insufficient" in samp.diagnostic


def test_sampled_determinism():
    G, p = GroupSpec.sl(3, 2), 7
    H = sylow_subgroup(G, p)
    a = weak_hom_presentation(G, H, p, "sampled", seed=5, samples=300)
    b = weak_hom_presentation(G, H, p, "sampled", seed=5, samples=300, workers=4)
    assert a.relations == b.relations and a.seed == 5


def test_inverse_symbol_relations():
    # (x, x^-1) always satisfies the intersection condition when x is live
    G, p = GroupSpec.sl(2, 4), 3
    H = sylow_subgroup(G, p)
    P = weak_hom_presentation(G, H, p, "full")
    els = P.cosets.elements
    live = set(P.live)
    rows = {tuple(sorted(r.items())) for r in P.relations}
    for i in range(len(els)):
        a = P.cosets.labels[i]
        b = P.cosets.labels[els.inverse_index[i]]
        if a in live and b in live:
            r = {a: -2} if a == b else {a: -1, b: -1}
            assert tuple(sorted(r.items())) in rows


def test_json_roundtrip_fields():
    G, p = GroupSpec.sl(2, 4), 3
    P = weak_hom_presentation(G, sylow_subgroup(G, p), p)
    d = P.to_json()
    assert d["cosets"] == len(P.cosets) and len(d["relations"]) == len(P.relations)
    assert all(len(r) == len(P.live) for r in d["relations"])


@pytest.mark.parametrize("strategy", ["prop55", "rho_chain", "prop56", "cor57"])
def test_certificates_inconclusive_when_nontrivial(strategy):
    G, p = GroupSpec.sl(2, 4), 3
    H = sylow_subgroup(G, p)
    assert certify_trivial(G, H, strategy, p).status == "inconclusive"


def test_rho_chain_not_reached_for_sylow():
    G, p = GroupSpec.sl(2, 4), 3
    S = sylow_subgroup(G, p)
    res = rho_chain(G, S)
    assert res.subgroups[-1].order == 3 and not res.all_reached
    assert res.normalizers[0].order == 6


@pytest.mark.parametrize("G,p", [(GroupSpec.gl(2, 3), 2), (GroupSpec.gl(2, 4), 3)])
def test_certificates_trivial_when_A_trivial(G, p):
    H = sylow_subgroup(G, p)
    assert solve_weak_hom(weak_hom_presentation(G, H, p)).group.is_trivial()
    assert certify_trivial(G, H, "prop55", p).trivial


def test_lower_sl_certificate_sl32():
    G = GroupSpec.sl(3, 2)
    H = lower_sl(G)
    assert solve_weak_hom(weak_hom_presentation(G, H, 3)).group.is_trivial()
    assert certify_trivial(G, H, "prop55", 3).trivial


def test_p_subgroups_sl34():
    S = sylow_subgroup(GroupSpec.sl(3, 4), 3)
    Qs = p_subgroups(S)
    assert S.order == 27 and len(Qs) == 18
    assert [Q.order for Q in Qs].count(27) == 1


def test_p_subgroups_elementary():
    S = sylow_subgroup(GroupSpec.gl(2, 4), 3)
    assert [Q.order for Q in p_subgroups(S)] == [3, 3, 3, 3, 9]


def test_parabolic_chain_sl54():
    cert = parabolic_chain_certificate(5, 4, 5)
    assert cert.trivial, cert.witnesses


def test_parabolic_chain_small_refuses():
    cert = parabolic_chain_certificate(3, 2, 3)
    assert not cert.trivial
    failed = {w["check"] for w in cert.witnesses if not w["pass"]}
    assert "corner_fits" in failed


@pytest.mark.parametrize("m,q", [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (2, 7)])
def test_sl_is_perfect_by_enumeration(m, q):
    S = whole_group(GroupSpec.sl(m, q))
    assert sl_is_perfect(m, q) == (derived_subgroup(S).order == S.order)


@pytest.mark.parametrize("e,q,p", [(2, 5, 3), (2, 4, 5), (2, 2, 3), (5, 2, 31)])
def test_element_level_normalizer_checks(e, q, p):
    rep = verify_section7(e, q, p)
    assert rep.passed, rep.text()


def test_swap_element_presence():
    assert verify_section7(2, 4, 5).values["Q3_swap_element"]["present"]
    swap = verify_section7(5, 2, 31).values["Q3_swap_element"]
    assert swap["m"] == 3 and not swap["present"]
