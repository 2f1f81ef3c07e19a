"""Double cosets, stabilized-coset counts and the parabolic coset lemmas."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .config import cap_or_default
from .errors import InconsistencyError
from .matgrp import (
    ElementSet, GroupSpec, Mat, Subgroup, binv, bmatmul, coset_labels, enumerate_group, sl_order,
)
from .matgrp.mat import identity_array
from .pstruct import build_standard_subgroups, diag_with, embed_block
from .report import Report


@dataclass
class DoubleCosetDecomp:
    """A\\X/B for X = ``elements`` (a group containing A and B)."""

    reps: list
    sizes: list
    total: int
    labels: np.ndarray  # label of every element of ``elements``
    rep_index: np.ndarray
    elements: ElementSet

    def __len__(self):
        return len(self.reps)

    def label_of(self, mats):
        """Double-coset labels of a batch of matrices (-1 if outside the ambient set)."""
        mats = np.asarray(mats)
        single = mats.ndim == 2
        idx = self.elements.index_of(mats[None] if single else mats)
        out = np.where(idx >= 0, self.labels[np.maximum(idx, 0)], -1)
        return int(out[0]) if single else out

    def to_json(self):
        return {"count": len(self.reps), "sizes": [int(s) for s in self.sizes],
                "total": int(self.total), "reps": [r.hex() for r in self.reps]}


def _ambient_elements(G, cap):
    if isinstance(G, GroupSpec):
        return enumerate_group(G, cap)
    return G.elements(cap)


def double_cosets(A: Subgroup, B: Subgroup, G, cap=None) -> DoubleCosetDecomp:
    """Orbits of x -> a x b on the elements of G (a GroupSpec or an enumerated Subgroup).

    Components of the graph with edges x ~ a x and x ~ x b over generators; the
    representative of each double coset is its least element, and double cosets
    are listed in order of their representatives.
    """
    cap = cap_or_default(cap)
    els = _ambient_elements(G, cap)
    F = els.field
    N = len(els)
    src, dst = [np.arange(N)], [np.arange(N)]
    for a in A.gens:
        src.append(np.arange(N))
        dst.append(els.index_of(bmatmul(F, a.a, els.mats)))
    for b in B.gens:
        src.append(np.arange(N))
        dst.append(els.index_of(bmatmul(F, els.mats, b.a)))
    r, c = np.concatenate(src), np.concatenate(dst)
    if np.any(c < 0):
        raise ValueError("A or B is not contained in the ambient group")
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(N, N)).tocsr()
    ncomp, lab = connected_components(graph, directed=True, connection="weak")
    first = np.full(ncomp, N, dtype=np.int64)
    np.minimum.at(first, lab, np.arange(N))
    order = np.argsort(first)
    relabel = np.empty(ncomp, dtype=np.int64)
    relabel[order] = np.arange(ncomp)
    labels = relabel[lab]
    rep_index = first[order]
    sizes = np.bincount(labels, minlength=ncomp)
    reps = [els.mat(int(i)) for i in rep_index]
    return DoubleCosetDecomp(reps, [int(s) for s in sizes], N, labels, rep_index, els)


def conjugate_intersection_order(A: Subgroup, B: Subgroup, x: Mat, cap=None):
    """|A ∩ x B x^-1| by scanning A."""
    ea = A.elements(cap)
    F = ea.field
    xi = x.inv()
    conj = bmatmul(F, bmatmul(F, xi.a, ea.mats), x.a)
    return int(np.sum(B.elements(cap).index_of(conj) >= 0))


def check_double_coset_sizes(D: DoubleCosetDecomp, A: Subgroup, B: Subgroup, cap=None):
    """(sum of sizes == total, every size == |A||B| / |A ∩ x B x^-1|)."""
    ok_sum = sum(D.sizes) == D.total
    bad = []
    for i, x in enumerate(D.reps):
        expected = A.order * B.order // conjugate_intersection_order(A, B, x, cap)
        if expected != D.sizes[i]:
            bad.append(i)
    return ok_sum, bad


def _fixed_cosets(U: Subgroup, V: Subgroup, H, cap=None):
    """Left cosets xV of V in H with U x V = x V, i.e. x^-1 U x ⊆ V."""
    cap = cap_or_default(cap)
    Hs = H if isinstance(H, Subgroup) else Subgroup(H, [], enumerate_group(H, cap))
    labels, reps = coset_labels(Hs, V, cap)
    F = Hs.field
    X = Hs.elements(cap).mats[reps]
    Xi = binv(F, X)
    fixed = np.ones(len(reps), dtype=bool)
    Vels = V.elements(cap)
    for u in U.gens:
        fixed &= Vels.index_of(bmatmul(F, bmatmul(F, Xi, u.a), X)) >= 0
    return fixed, reps, labels, Hs


def stabilized_coset_count(U: Subgroup, V: Subgroup, H, cap=None) -> int:
    if not V.contains_all(U.gens):
        raise ValueError("U is not contained in V")
    fixed, _, _, _ = _fixed_cosets(U, V, H, cap)
    return int(np.sum(fixed))


def normalizer_in(U: Subgroup, within: Subgroup, cap=None):
    from .matgrp import stabilizer_scan
    return stabilizer_scan("normalizer", U, within, cap)


def lemma44_bounds(U: Subgroup, V: Subgroup, H, cap=None):
    """(count, printed bound |V|/|N_V(U)|, bound [N_H(U) : N_V(U)])."""
    count = stabilized_coset_count(U, V, H, cap)
    Hs = H if isinstance(H, Subgroup) else Subgroup(H, [], enumerate_group(H, cap))
    nv = normalizer_in(U, V, cap).order
    nh = normalizer_in(U, Hs, cap).order
    return count, V.order // nv, nh // nv


def trivial_multiplicity(U: Subgroup, L: Subgroup, G, cap=None):
    """Number of left cosets xL fixed by U (multiplicity of the trivial module in
    the restriction of k[G/L] to U, which is a permutation module).

    Returns (count, orbit sizes of U on G/L sorted)."""
    fixed, reps, labels, Gs = _fixed_cosets(U, L, G, cap)
    F = Gs.field
    els = Gs.elements(cap)
    # U-orbits on cosets: graph on coset labels with edges c -> label(u x_c)
    ncos = len(reps)
    src, dst = [np.arange(ncos)], [np.arange(ncos)]
    for u in U.gens:
        j = els.index_of(bmatmul(F, u.a, els.mats[reps]))
        src.append(np.arange(ncos))
        dst.append(labels[j])
    r, c = np.concatenate(src), np.concatenate(dst)
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(ncos, ncos)).tocsr()
    _, lab = connected_components(graph, directed=True, connection="weak")
    orbit_sizes = sorted(np.bincount(lab).tolist())
    return int(np.sum(fixed)), orbit_sizes


# -- parabolic coset lemmas -------------------------------------------------

def phi(F, n, v):
    """[[I, v], [0, 1]] for a column vector v of length n-1."""
    a = identity_array(n)
    a[:n - 1, n - 1] = v
    return Mat(F, a)


def corner_block(F, n, W):
    """diag(I_{n-2}, W) for a 2x2 matrix W."""
    return embed_block(F, n, W, n - 2)


def a_zeta(F, n, zeta):
    return diag_with(F, n, {n - 2: zeta, n - 1: F.inv(zeta)})


def weyl_b(F, n):
    return corner_block(F, n, np.array([[0, 1], [F.minus_one, 0]]))


def lower_sl(G: GroupSpec):
    """SL(n-1, q) embedded as diag(A, 1)."""
    from .pstruct import sl_generators
    return Subgroup(G, sl_generators(G.field, G.n - 1, 0, G.n), name="L")


def derived_parabolic_checked(G: GroupSpec, cap=None):
    H = build_standard_subgroups(G, "derived_parabolic")
    expected = sl_order(G.n - 1, G.q) * G.q ** (G.n - 1)
    if H.elements(cap) is not None and H.order != expected:
        raise InconsistencyError(f"|H| = {H.order}, expected {expected}")
    return H


def verify_coset_lemmas(lemma_id, n, q, cap=None) -> Report:
    lemma_id = str(lemma_id)
    G = GroupSpec.sl(n, q)
    F = G.field
    rep = Report(f"coset-lemma-{lemma_id}", {"n": n, "q": q})
    if n < 3:
        raise ValueError("the parabolic coset lemmas need n >= 3")
    if lemma_id == "9.1":
        H = derived_parabolic_checked(G, cap)
        L = lower_sl(G)
        D = double_cosets(L, L, H, cap)
        e_last = np.zeros(n - 1, dtype=np.int64)
        e_last[-1] = 1
        w = phi(F, n, e_last)
        ident = Mat.identity(F, n)
        labs = (D.label_of(ident.a), D.label_of(w.a))
        rep.check("count", len(D) == 2, count=len(D))
        rep.check("representatives", sorted(labs) == list(range(len(D))) if len(D) == 2 else False,
                  labels=list(labs), w=w)
        rep.value("sizes", D.sizes)
    elif lemma_id == "9.3":
        P = build_standard_subgroups(G, "parabolic")
        H = derived_parabolic_checked(G, cap)
        labels, reps = coset_labels(P, H, cap)
        rep.check("index", len(reps) == q - 1, count=len(reps), expected=q - 1)
        zs = [a_zeta(F, n, z) for z in range(1, q)]
        Pels = P.elements(cap)
        idx = Pels.index_of(np.stack([z.a for z in zs]))
        rep.check("a_zeta_in_P", bool(np.all(idx >= 0)))
        hit_left = set(labels[idx].tolist())
        rep.check("left_cosets_covered", hit_left == set(range(len(reps))), hit=len(hit_left))
        # right cosets H x correspond to left cosets x^-1 H
        inv = P.elements(cap).inverse_index
        inv_labels = labels[inv]
        hit_right = set(inv_labels[idx].tolist())
        rep.check("right_cosets_covered", hit_right == set(range(len(reps))), hit=len(hit_right))
    elif lemma_id == "9.4":
        P = build_standard_subgroups(G, "parabolic")
        D = double_cosets(P, P, G, cap)
        b = weyl_b(F, n)
        rep.check("count", len(D) == 2, count=len(D), sizes=D.sizes)
        rep.check("b_separates", D.label_of(b.a) != D.label_of(Mat.identity(F, n).a), b=b)
        ok_sum, bad = check_double_coset_sizes(D, P, P, cap)
        rep.check("size_identity", ok_sum and not bad)
    elif lemma_id == "9.5":
        H = derived_parabolic_checked(G, cap)
        rep.check("order_H", H.order == sl_order(n - 1, q) * q ** (n - 1), order=H.order)
        D = double_cosets(H, H, G, cap)
        r = corner_coverage(D, F, n, cap)
        rep.check("coverage", r["missed"] == [], count=len(D), **r)
        ok_sum, bad = check_double_coset_sizes(D, H, H, cap)
        rep.check("size_identity", ok_sum and not bad)
    else:
        raise ValueError(f"unknown coset lemma {lemma_id!r}")
    return rep


def corner_coverage(D: DoubleCosetDecomp, F, n, cap=None):
    """Which double cosets contain some diag(I_{n-2}, W) with W in SL(2,q)."""
    W = enumerate_group(GroupSpec.sl(2, F.q), cap).mats
    X = np.broadcast_to(identity_array(n), (len(W), n, n)).copy()
    X[:, n - 2:, n - 2:] = W
    hit = set(D.label_of(X).tolist())
    hit.discard(-1)
    missed = [i for i in range(len(D)) if i not in hit]
    return {"hit": len(hit), "missed": missed}


def verify_corner_coverage_lower_sl(n, q, cap=None) -> Report:
    """Corner forms diag(I_{n-2}, W) against H\\G/H for H = SL(n-1, q)."""
    G = GroupSpec.sl(n, q)
    H = lower_sl(G)
    D = double_cosets(H, H, G, cap)
    rep = Report("corner-coverage-lower-sl", {"n": n, "q": q})
    r = corner_coverage(D, G.field, n, cap)
    rep.check("coverage", r["missed"] == [], count=len(D), **r)
    return rep
