from math import gcd

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from endoatlas.config import using
from endoatlas.errors import HypothesisError, NoClosedFormError, SizeCapError
from endoatlas.matgrp import GroupSpec
from endoatlas.numtheory import p_prime_part
from endoatlas.ttgroup import (
    X_group, case_tag_consistent, cross_validate, evaluate_T, sylow_shape, sylow_T_lookup,
    tf_from_ranks, torsion_free_rank,
)

# (group, p, clause, torsion invariants) worked out by hand from the clause table
CYCLIC = [
    (GroupSpec.sl(3, 2), 7, "1.2(d)(i)", [6]),
    (GroupSpec.sl(2, 4), 5, "1.2(d)(i)", [4]),
    (GroupSpec.gl(2, 4), 5, "1.2(d)(i)", [12]),
    (GroupSpec.gl(2, 5), 3, "1.2(d)(i)", [4, 4]),
    (GroupSpec.sl(3, 4), 5, "1.2(d)(ii)", [12]),
    (GroupSpec.sl(3, 2), 3, "1.2(d)(ii)", [4]),
    (GroupSpec.sl(5, 2), 7, "1.2(d)(ii)", [2, 6]),
    (GroupSpec.gl(1, 7), 3, "1.2(b)", [2, 2]),
    (GroupSpec.sl(2, 4), 3, "1.2(c)(i)", [4]),
    (GroupSpec.sl(2, 7), 3, "1.2(c)(ii)", [2, 4]),
    (GroupSpec.gl(1, 5), 2, "1.2(a)", []),
]


@pytest.mark.parametrize("G,p,tag,torsion", CYCLIC, ids=lambda x: getattr(x, "label", str(x)))
def test_cyclic_clauses(G, p, tag, torsion):
    res = evaluate_T(G, p)
    assert res.case_tag == tag and res.free_rank == 0
    assert list(res.torsion.torsion) == torsion
    assert case_tag_consistent(res)


# cross-check orders by the normalizer route; SL(2,5)-type p | q cases are excluded
SMALL_CYCLIC = [(GroupSpec.sl(3, 2), 7), (GroupSpec.sl(2, 4), 5), (GroupSpec.gl(2, 4), 5),
                (GroupSpec.gl(2, 5), 3), (GroupSpec.sl(3, 2), 3), (GroupSpec.gl(1, 7), 3),
                (GroupSpec.sl(2, 4), 3), (GroupSpec.sl(2, 7), 3)]


@pytest.mark.parametrize("G,p", SMALL_CYCLIC, ids=lambda x: getattr(x, "label", str(x)))
def test_cyclic_clause_against_normalizer(G, p):
    rep = cross_validate(G, p)
    assert rep.passed, rep.text()
    ids = {c.check_id for c in rep.checks}
    assert {"order_identity", "weak_hom_vs_X_of_N"} <= ids


def test_clause_a_warns_and_disagrees():
    G = GroupSpec.gl(1, 5)
    res = evaluate_T(G, 2)
    assert res.warnings and res.order == 1
    rep = cross_validate(G, 2)
    oi = next(c for c in rep.checks if c.check_id == "order_identity")
    assert not oi.passed and oi.witness["X_of_N"] * oi.witness["T_of_S"] == 2


ABELIAN = [(GroupSpec.gl(2, 4), 3, []), (GroupSpec.gl(2, 7), 3, [2]),
           (GroupSpec.sl(4, 2), 3, []), (GroupSpec(2, 7, 6, 2), 3, [2]),
           (GroupSpec.gl(2, 13), 3, [4]), (GroupSpec.sl(10, 2), 31, [])]


@pytest.mark.parametrize("G,p,torsion", ABELIAN, ids=lambda x: getattr(x, "label", str(x)))
def test_noncyclic_abelian(G, p, torsion):
    res = evaluate_T(G, p)
    assert res.case_tag == "1.1" and res.free_rank == 1
    assert list(res.torsion.torsion) == torsion


@pytest.mark.parametrize("G,p", [(GroupSpec.gl(2, 4), 3), (GroupSpec.gl(2, 7), 3),
                                 (GroupSpec(2, 7, 6, 2), 3), (GroupSpec.sl(4, 2), 3)],
                         ids=lambda x: getattr(x, "label", str(x)))
def test_noncyclic_cross_validation(G, p):
    rep = cross_validate(G, p)
    assert rep.passed, rep.text()


@pytest.mark.parametrize("G", [GroupSpec.gl(2, 3), GroupSpec.sl(2, 3), GroupSpec.gl(2, 4),
                               GroupSpec(2, 5, 4, 2), GroupSpec(2, 7, 6, 3), GroupSpec(3, 4, 3, 3),
                               GroupSpec(2, 9, 8, 4), GroupSpec(3, 3, 2, 2)],
                         ids=lambda g: g.label)
def test_X_closed_vs_brute(G):
    for p in (2, 3, 5, 7):
        if G.q % p == 0:
            continue
        assert X_group(G, p, "brute") == X_group(G, p)
        if (G.n, G.q) not in ((2, 2), (2, 3)):
            want = p_prime_part(G.d * gcd(G.n, G.z) // G.z, p)
            assert X_group(G, p, "closed").order == want


def test_closed_X_refuses_nonperfect():
    with pytest.raises(NoClosedFormError):
        X_group(GroupSpec.sl(2, 3), 2, "closed")


@pytest.mark.parametrize("G,p,tf", [(GroupSpec.gl(2, 4), 3, 1), (GroupSpec.sl(2, 4), 3, 0),
                                    (GroupSpec.gl(2, 7), 3, 1), (GroupSpec.sl(4, 2), 3, 1),
                                    (GroupSpec.sl(3, 2), 7, 0), (GroupSpec.gl(2, 5), 3, 0)],
                         ids=lambda x: getattr(x, "label", str(x)))
def test_tf_rank_closed_vs_brute(G, p, tf):
    rc = torsion_free_rank(G, p)
    rb = torsion_free_rank(G, p, "brute_force")
    assert rc.tf_rank == rb.tf_rank == tf
    assert rc.p_rank == rb.p_rank


def test_tf_brute_refuses_p_dividing_center():
    with pytest.raises(NoClosedFormError):
        torsion_free_rank(GroupSpec(2, 4, 3, 3), 3, "brute_force")


@given(st.integers(0, 5), st.integers(0, 4))
def test_tf_from_ranks(rank, n):
    tf = tf_from_ranks(rank, n)
    assert tf == (0 if rank <= 1 else n if rank == 2 else n + 1)


@given(st.integers(1, 12), st.sampled_from([2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32]),
       st.sampled_from([2, 3, 5, 7, 11, 13, 17, 31, 43, 73]), st.data())
def test_case_tag_consistency(n, q, p, data):
    assume(q % p)
    divisors = [d for d in range(1, q) if (q - 1) % d == 0]
    d = data.draw(st.sampled_from(divisors))
    G = GroupSpec(n, q, d)
    try:
        res = evaluate_T(G, p)
    except NoClosedFormError:
        assert sylow_shape(G, p).kind == "nonabelian"
        return
    assert case_tag_consistent(res)
    assert res == evaluate_T(G, p)
    if res.case_tag.startswith("1.2"):
        assert sylow_shape(G, p).kind == "cyclic"


def test_evaluator_does_not_enumerate():
    with using(max_enumerate=10):
        res = evaluate_T(GroupSpec.sl(5, 2), 31)
        assert res.case_tag == "1.2(d)(i)" and list(res.torsion.torsion) == [10]
        with pytest.raises(SizeCapError):
            torsion_free_rank(GroupSpec.sl(3, 2), 7, "brute_force")


def test_cyclic_with_center_refused():
    # PGL(2,4): the Sylow 3 of the quotient is cyclic
    with pytest.raises(NoClosedFormError):
        evaluate_T(GroupSpec(2, 4, 3, 3), 3)


def test_refusals():
    with pytest.raises(NoClosedFormError):
        evaluate_T(GroupSpec.sl(3, 4), 3)
    with pytest.raises(NoClosedFormError):
        evaluate_T(GroupSpec(2, 5, 4, 2), 3)
    with pytest.raises(HypothesisError):
        evaluate_T(GroupSpec.sl(2, 5), 5)
    with pytest.raises(ValueError):
        evaluate_T(GroupSpec.sl(2, 5), 4)


def test_pprime_group():
    res = evaluate_T(GroupSpec(1, 7, 2), 3)
    assert res.case_tag == "p'-group" and res.warnings


def test_sylow_lookup():
    assert sylow_T_lookup(sylow_shape(GroupSpec.sl(2, 4), 3), 3).torsion == (2,)
    assert sylow_T_lookup(sylow_shape(GroupSpec.gl(1, 3), 2), 2).is_trivial()
    with pytest.raises(ValueError):
        sylow_T_lookup(sylow_shape(GroupSpec.gl(2, 4), 3), 3)


def test_quotient_shape():
    # PGL(2,4) = SL(2,4): the Sylow 3 of GL(2,4)/Z is cyclic of order 3
    s = sylow_shape(GroupSpec(2, 4, 3, 3), 3)
    assert (s.kind, s.valuation, s.p_rank) == ("cyclic", 1, 1)


def test_json_shape():
    d = evaluate_T(GroupSpec.sl(3, 2), 7).to_json()
    assert d["torsion"] == [6] and d["params"]["e"] == 3 and d["cross_check"]["status"] == "not_run"
