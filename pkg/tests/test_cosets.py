import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from endoatlas.cosets import (
    check_double_coset_sizes, double_cosets, lemma44_bounds, lower_sl, stabilized_coset_count,
    trivial_multiplicity, verify_coset_lemmas, verify_corner_coverage_lower_sl,
)
from endoatlas.matgrp import GroupSpec, Mat, Subgroup, closure, enumerate_group, random_subgroup
from endoatlas.pstruct import build_standard_subgroups, sylow_subgroup


def _keys(els):
    return [m.tobytes() for m in els.mats]


def _naive_left_cosets(Gels, V):
    """Left cosets xV as frozensets of byte keys, by direct multiplication."""
    F, vm = Gels.field, V.elements().mats
    seen, cosets = set(), []
    for x in Gels.mats:
        if x.tobytes() in seen:
            continue
        c = frozenset(Mat(F, x).__matmul__(Mat(F, v)).a.tobytes() for v in vm)
        seen |= c
        cosets.append((Mat(F, x), c))
    return cosets


def _oracle_fixed_and_orbits(U, L, G):
    Gels = enumerate_group(G) if isinstance(G, GroupSpec) else G.elements()
    F = Gels.field
    cosets = _naive_left_cosets(Gels, L)
    where = {}
    for i, (_, c) in enumerate(cosets):
        for k in c:
            where[k] = i
    fixed = 0
    moves = []
    for i, (x, _) in enumerate(cosets):
        imgs = {where[(u @ x).a.tobytes()] for u in U.gens}
        fixed += imgs <= {i}
        moves.append(imgs)
    parent = list(range(len(cosets)))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a
    for i, imgs in enumerate(moves):
        for j in imgs:
            parent[find(i)] = find(j)
    sizes = {}
    for i in range(len(cosets)):
        sizes[find(i)] = sizes.get(find(i), 0) + 1
    return fixed, sorted(sizes.values())


def test_double_coset_examples():
    G = GroupSpec.sl(3, 2)
    P = build_standard_subgroups(G, "parabolic")
    D = double_cosets(P, P, G)
    assert len(D) == 2 and sorted(D.sizes) == [24, 144]
    B = sylow_subgroup(G, 2)
    assert len(double_cosets(B, B, G)) == 6  # Bruhat cells of S3
    T = sylow_subgroup(GroupSpec.sl(2, 4), 3)
    D = double_cosets(T, T, GroupSpec.sl(2, 4))
    assert sum(D.sizes) == 60 and check_double_coset_sizes(D, T, T) == (True, [])


def test_label_of_outside():
    G = GroupSpec.sl(2, 3)
    T = Subgroup(G, [], name="1")
    D = double_cosets(T, T, G)
    assert len(D) == 24
    assert D.label_of(np.array([[2, 0], [0, 1]])) == -1


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([GroupSpec.sl(2, 4), GroupSpec.sl(3, 2),
                                                       GroupSpec.gl(2, 3)]))
def test_double_coset_size_identity(seed, G):
    rng = np.random.default_rng(seed)
    A, B = random_subgroup(G, rng, 1), random_subgroup(G, rng, 2)
    D = double_cosets(A, B, G)
    assert check_double_coset_sizes(D, A, B) == (True, [])
    assert D.labels[D.rep_index].tolist() == list(range(len(D)))


def test_stabilized_count_examples():
    G = GroupSpec.sl(2, 3)
    S = sylow_subgroup(G, 3)
    H = Subgroup(G, [], enumerate_group(G))
    assert stabilized_coset_count(S, S, H) == 2  # N(S)/S
    one = Subgroup(G, [], name="1")
    assert stabilized_coset_count(one, S, H) == 8
    with pytest.raises(ValueError):
        stabilized_coset_count(S, one, H)


def test_printed_bound_fails_in_s3():
    # GL(2,2) is S3: U of order 2 inside V = H = S3 fixes one coset, yet |V|/|N_V(U)| = 3
    G = GroupSpec.gl(2, 2)
    H = Subgroup(G, [], enumerate_group(G))
    U = closure([Mat(G.field, np.array([[0, 1], [1, 0]]))], G)
    count, printed, corrected = lemma44_bounds(U, H, H)
    assert (count, printed, corrected) == (1, 3, 1)
    assert count < printed and count >= corrected


@settings(max_examples=30)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([GroupSpec.sl(2, 4), GroupSpec.sl(3, 2),
                                                       GroupSpec.gl(2, 3), GroupSpec.sl(2, 5)]))
def test_corrected_bound(seed, G):
    rng = np.random.default_rng(seed)
    H = random_subgroup(G, rng, 2)
    els = H.elements()
    V = closure([els.mat(int(i)) for i in rng.integers(0, len(els), 2)], G)
    vels = V.elements()
    U = closure([vels.mat(int(rng.integers(len(vels))))], G)
    count, _, corrected = lemma44_bounds(U, V, H)
    assert count >= corrected
    assert count % 1 == 0 and count <= H.order // V.order


@pytest.mark.parametrize("G,p", [(GroupSpec.sl(2, 4), 3), (GroupSpec.sl(3, 2), 7),
                                 (GroupSpec.gl(2, 3), 2)])
def test_trivial_multiplicity_examples(G, p):
    S = sylow_subgroup(G, p)
    count, orbits = trivial_multiplicity(S, S, G)
    want = _oracle_fixed_and_orbits(S, S, G)
    assert (count, orbits) == want
    assert sum(orbits) * S.order == len(enumerate_group(G))
    assert count == orbits.count(1)


@settings(max_examples=20)
@given(st.integers(0, 2 ** 32 - 1))
def test_trivial_multiplicity_oracle_and_conjugation(seed):
    G = GroupSpec.sl(2, 4)
    rng = np.random.default_rng(seed)
    U, L = random_subgroup(G, rng, 1), random_subgroup(G, rng, 1)
    res = trivial_multiplicity(U, L, G)
    assert res == _oracle_fixed_and_orbits(U, L, G)
    g = enumerate_group(G).mat(int(rng.integers(60)))
    assert trivial_multiplicity(U.conjugate(g), L, G) == res


@pytest.mark.parametrize("lemma", ["9.1", "9.3", "9.4", "9.5"])
@pytest.mark.parametrize("n,q", [(3, 2), (3, 3), (4, 2)])
def test_coset_lemmas(lemma, n, q):
    rep = verify_coset_lemmas(lemma, n, q)
    assert rep.passed, rep.text()


def test_coset_lemma_errors():
    with pytest.raises(ValueError):
        verify_coset_lemmas("9.2", 3, 2)
    with pytest.raises(ValueError):
        verify_coset_lemmas("9.1", 2, 3)


def test_lower_sl_corner_coverage_gap():
    rep = verify_corner_coverage_lower_sl(3, 2)
    assert not rep.passed
    assert len(rep.checks[0].witness["missed"]) == 1
    assert lower_sl(GroupSpec.sl(3, 2)).order == 6
