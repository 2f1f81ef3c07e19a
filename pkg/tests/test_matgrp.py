import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from endoatlas.errors import HypothesisError, SizeCapError
from endoatlas.ff import field_from_q
from endoatlas.matgrp import (
    AbelianGroupInv, CentralQuotient, GroupSpec, Mat, abelianization, closure,
    derived_subgroup, enumerate_group, group_order, hex_decode, presentation_invariants,
    random_subgroup, stabilizer_scan, whole_group,
)
from endoatlas.pstruct import build_sylow, verify_torus_commutator

SMALL = [GroupSpec.gl(2, 2), GroupSpec.sl(2, 3), GroupSpec.gl(2, 3), GroupSpec.sl(2, 4),
         GroupSpec.gl(2, 4), GroupSpec.sl(2, 5), GroupSpec.sl(3, 2), GroupSpec.sl(2, 7),
         GroupSpec(2, 5, 2), GroupSpec(3, 3, 1)]


def test_identity_det_and_rotation():
    for q in (2, 5, 9):
        F = field_from_q(q)
        for n in (1, 3):
            assert Mat.identity(F, n).det() == 1
    F5 = field_from_q(5)
    U = Mat(F5, [[0, F5.minus_one], [1, 0]])
    assert (U ** 4).is_identity() and not (U ** 2).is_identity()


def test_torus_commutator_identity_sl34():
    assert verify_torus_commutator(3, 4).passed


@pytest.mark.parametrize("G,order", [(GroupSpec.gl(2, 2), 6), (GroupSpec.sl(2, 4), 60),
                                     (GroupSpec.gl(2, 4), 180), (GroupSpec.sl(2, 2), 6),
                                     (GroupSpec.sl(3, 2), 168), (GroupSpec.sl(3, 3), 5616)])
def test_orders_against_enumeration(G, order):
    assert group_order(G) == order == len(enumerate_group(G))


@pytest.mark.parametrize("G", SMALL, ids=lambda G: G.label)
def test_formula_equals_enumeration(G):
    els = enumerate_group(G)
    assert len(els) == group_order(G)
    assert np.all(G.contains(els.mats))
    assert len(np.unique(els.keys)) == len(els)


def test_size_cap():
    with pytest.raises(SizeCapError):
        enumerate_group(GroupSpec.sl(4, 3))


def test_p_dividing_q_rejected():
    with pytest.raises(HypothesisError):
        GroupSpec.sl(2, 9, p=3)


def test_closure_examples():
    G = GroupSpec.sl(2, 4)
    F = G.field
    assert closure([Mat.identity(F, 2)], G).order == 1
    z = F.prim
    assert closure([Mat.diag(F, [z, F.inv(z)])], G).order == 3


def test_normalizer_examples():
    G = GroupSpec.sl(2, 4)
    S = build_sylow(G, 3)
    assert stabilizer_scan("normalizer", S, G).order == 6
    G2 = GroupSpec.sl(3, 2)
    N = stabilizer_scan("normalizer", build_sylow(G2, 7), G2)
    assert N.order == 21
    assert abelianization(N) == AbelianGroupInv.from_cyclic([3])
    W = whole_group(GroupSpec.sl(2, 2))
    assert stabilizer_scan("normalizer", W, GroupSpec.sl(2, 2)).order == 6


def test_abelianization_examples():
    assert abelianization(whole_group(GroupSpec.gl(2, 2))) == AbelianGroupInv.from_cyclic([2])
    G = GroupSpec.sl(2, 7)
    N = stabilizer_scan("normalizer", build_sylow(G, 3), G)
    assert N.order == 12 and abelianization(N).torsion == (4,)


def test_central_quotients():
    assert CentralQuotient(GroupSpec.sl(2, 5, z=2)).order == 60
    assert CentralQuotient(GroupSpec.gl(2, 3, z=2)).order == 24
    assert CentralQuotient(GroupSpec.sl(2, 5)).order == 120


def test_hex_roundtrip():
    G = GroupSpec.gl(3, 4)
    F = G.field
    x = Mat(F, [[1, 2, 3], [0, 1, 2], [0, 0, 3]])
    assert np.array_equal(hex_decode(F, 3, x.hex()), x.a)


def _sympy_group(rows, ncols):
    inv = [abs(int(x)) for x in invariant_factors(Matrix(rows), domain=ZZ)] if rows else []
    nz = [x for x in inv if x]
    return AbelianGroupInv.from_cyclic([x for x in nz if x > 1], ncols - len(nz))


@settings(max_examples=150)
@given(st.integers(1, 7), st.integers(1, 7), st.data())
def test_presentation_invariants_vs_sympy(m, n, data):
    rows = [data.draw(st.lists(st.integers(-9, 9), min_size=n, max_size=n)) for _ in range(m)]
    assert presentation_invariants(rows, n) == _sympy_group(rows, n)


@given(st.lists(st.integers(0, 60), max_size=6))
def test_from_cyclic_normal_form(orders):
    A = AbelianGroupInv.from_cyclic(orders)
    assert all(b % a == 0 for a, b in zip(A.torsion, A.torsion[1:]))
    prod = 1
    for x in orders:
        prod *= x if x else 1
    assert A.order == prod and A.free_rank == orders.count(0)
    # oracle: Smith form of the diagonal relation matrix
    rows = [[x if i == j else 0 for j in range(len(orders))] for i, x in enumerate(orders)]
    assert A == _sympy_group([r for r in rows if any(r)], len(orders))


@settings(max_examples=40)
@given(st.sampled_from(SMALL[:8]), st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_random_subgroup_structure(G, seed, k):
    H = random_subgroup(G, np.random.default_rng(seed), ngens=k)
    els = H.elements()
    # closure under products and inverses
    prod = els.product_index(np.arange(len(els)), np.roll(np.arange(len(els)), 1))
    assert np.all(prod >= 0) and np.all(els.inverse_index >= 0)
    ab = abelianization(H)
    assert H.order == ab.order * derived_subgroup(H).order
    C = stabilizer_scan("centralizer", H, G)
    N = stabilizer_scan("normalizer", H, G)
    assert N.contains_all(H.gens) and N.contains_all(C.gens)
    assert N.order % C.order == 0 and N.order % H.order == 0


def test_canonical_order_stable():
    els = enumerate_group(GroupSpec.sl(2, 4))
    keys = els.keys
    assert np.all(keys[:-1] < keys[1:])
