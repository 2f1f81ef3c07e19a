"""Groups G with SL(n,q) <= G <= GL(n,q), their subgroups and quotients by
central scalars.

Element sets are kept as sorted key arrays plus the matching matrix stack,
so membership is a ``searchsorted``.  Subgroups of G/Z are represented by
their full preimages in G.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..config import cap_or_default, get_config
from ..errors import HypothesisError, SizeCapError
from ..ff import field_from_q
from ..numtheory import factorint, prime_power
from ..parallel import chunk_ranges, ordered_map
from .abelian import invariants_from_orders
from .mat import Mat, bdet, binv, bkeys, bmatmul, bpow, hex_encode, identity_array

CHUNK = 1 << 15


@dataclass(frozen=True)
class GroupSpec:
    """G = {g in GL(n,q) : det g in D} with |D| = d, and Z = central scalars of order z."""

    n: int
    q: int
    d: int = 1
    z: int = 1
    p: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be positive")
        prime_power(self.q)
        if self.d < 1 or (self.q - 1) % self.d:
            raise ValueError(f"det order {self.d} must divide q-1 = {self.q - 1}")
        if self.p is not None:
            if len(factorint(self.p)) != 1 or factorint(self.p)[0][1] != 1:
                raise ValueError(f"{self.p} is not prime")
            if self.q % self.p == 0:
                raise HypothesisError(f"p = {self.p} divides q = {self.q}")
        if self.z < 1 or self.scalar_count % self.z:
            raise ValueError(f"central order {self.z} does not divide the number of "
                             f"scalars in G ({self.scalar_count})")

    @classmethod
    def sl(cls, n, q, p=None, z=1):
        return cls(n, q, 1, z, p)

    @classmethod
    def gl(cls, n, q, p=None, z=1):
        return cls(n, q, q - 1, z, p)

    @property
    def field(self):
        return field_from_q(self.q)

    @property
    def label(self):
        if self.d == 1:
            base = f"SL({self.n},{self.q})"
        elif self.d == self.q - 1:
            base = f"GL({self.n},{self.q})"
        else:
            base = f"G({self.n},{self.q};d={self.d})"
        return base if self.z == 1 else f"{base}/Z{self.z}"

    @property
    def det_values(self):
        """Elements of D, sorted by encoding."""
        F = self.field
        step = (self.q - 1) // self.d
        return sorted(F.pow(F.prim, step * j) for j in range(self.d))

    @cached_property
    def det_mask(self):
        mask = np.zeros(self.q, dtype=bool)
        mask[self.det_values] = True
        return mask

    @property
    def scalar_count(self):
        """|{lam : lam^n in D}|, the order of the group of scalar matrices in G."""
        m = (self.q - 1) // self.d
        return sum(1 for j in range(self.q - 1) if (j * self.n) % m == 0)

    @property
    def center_values(self):
        F = self.field
        step = (self.q - 1) // self.z
        return sorted(F.pow(F.prim, step * j) for j in range(self.z))

    def center_gens(self):
        if self.z == 1:
            return []
        F = self.field
        return [Mat.scalar(F, self.n, F.pow(F.prim, (self.q - 1) // self.z))]

    def without_center(self):
        return GroupSpec(self.n, self.q, self.d, 1, self.p)

    def contains(self, mats):
        dets = bdet(self.field, mats)
        return self.det_mask[dets] & (dets != 0)


def sl_order(n, q):
    out = q ** (n * (n - 1) // 2)
    for i in range(2, n + 1):
        out *= q ** i - 1
    return out


def gl_order(n, q):
    return sl_order(n, q) * (q - 1)


def group_order(G: GroupSpec, quotient=False):
    """|G| (or |G/Z| with ``quotient=True``)."""
    order = sl_order(G.n, G.q) * G.d
    return order // G.z if quotient else order


def group_orders(G: GroupSpec):
    return group_order(G), group_order(G, quotient=True)


class ElementSet:
    """Matrices sorted by canonical key."""

    def __init__(self, field, mats, keys=None, presorted=False):
        mats = np.asarray(mats, dtype=np.int64)
        keys = bkeys(field, mats) if keys is None else keys
        if not presorted:
            order = np.argsort(keys, kind="stable")
            mats, keys = mats[order], keys[order]
            if len(keys) > 1 and np.any(keys[1:] == keys[:-1]):
                keep = np.concatenate([[True], keys[1:] != keys[:-1]])
                mats, keys = mats[keep], keys[keep]
        mats.setflags(write=False)
        self.field = field
        self.mats = mats
        self.keys = keys

    @property
    def n(self):
        return self.mats.shape[-1]

    def __len__(self):
        return len(self.keys)

    def index_of(self, mats):
        """Indices of the given matrices (batch), -1 where absent."""
        k = bkeys(self.field, mats)
        return self.index_of_keys(k)

    def index_of_keys(self, k):
        k = np.asarray(k)
        pos = np.searchsorted(self.keys, k)
        pos = np.minimum(pos, len(self.keys) - 1)
        found = self.keys[pos] == k
        return np.where(found, pos, -1).astype(np.int64)

    def contains(self, mats):
        return self.index_of(mats) >= 0

    def mat(self, i):
        return Mat(self.field, self.mats[i])

    @cached_property
    def inverse_index(self):
        """idx[i] = index of the inverse of element i (the set must be a group)."""
        out = np.empty(len(self), dtype=np.int64)
        for a, b in chunk_ranges(len(self), CHUNK):
            out[a:b] = self.index_of(binv(self.field, self.mats[a:b]))
        if np.any(out < 0):
            raise ValueError("element set is not closed under inverses")
        return out

    def product_index(self, left, right):
        """Indices of mats[left] @ mats[right] (broadcast index arrays)."""
        left, right = np.broadcast_arrays(np.asarray(left), np.asarray(right))
        out = np.empty(left.shape, dtype=np.int64)
        lf, rf, of = left.ravel(), right.ravel(), out.reshape(-1)
        for a, b in chunk_ranges(len(lf), CHUNK):
            of[a:b] = self.index_of(bmatmul(self.field, self.mats[lf[a:b]], self.mats[rf[a:b]]))
        return out

    def to_hex_lines(self):
        return [hex_encode(self.field, m) for m in self.mats]


# -- enumeration ------------------------------------------------------------

def _all_vectors(F, n):
    codes = np.arange(F.q ** n, dtype=np.int64)
    return np.stack([(codes // F.q ** (n - 1 - i)) % F.q for i in range(n)], axis=1)


def _span_codes(F, partial):
    """Codes of all vectors in the row span of each partial matrix (B, r, n)."""
    B, r, n = partial.shape
    C = _all_vectors(F, r)
    span = bmatmul(F, C[None], partial)
    w = np.array([F.q ** (n - 1 - i) for i in range(n)], dtype=np.int64)
    return span @ w, span


def _independent_rows(F, n, k):
    """All k x n matrices of rank k, as (B, k, n)."""
    vecs = _all_vectors(F, n)
    partial = vecs[1:, None, :]
    for _ in range(1, k):
        codes, _ = _span_codes(F, partial)
        mask = np.ones((partial.shape[0], F.q ** n), dtype=bool)
        mask[np.arange(partial.shape[0])[:, None], codes] = False
        b, v = np.nonzero(mask)
        partial = np.concatenate([partial[b], vecs[v][:, None, :]], axis=1)
    return partial


def _enumerate(G: GroupSpec):
    F, n = G.field, G.n
    D = np.array(G.det_values, dtype=np.int64)
    if n == 1:
        return D.reshape(-1, 1, 1)
    partial = _independent_rows(F, n, n - 1)
    codes, span = _span_codes(F, partial)
    B = partial.shape[0]
    mask = np.ones((B, F.q ** n), dtype=bool)
    mask[np.arange(B)[:, None], codes] = False
    first = np.argmax(mask, axis=1)
    x0 = _all_vectors(F, n)[first]
    det0 = bdet(F, np.concatenate([partial, x0[:, None, :]], axis=1))
    scale = F.vmul(D[None, :], F.vinv(det0)[:, None])            # (B, d)
    last = F.vmul(scale[:, :, None], x0[:, None, :])               # (B, d, n)
    last = F.vadd(last[:, :, None, :], span[:, None, :, :])        # (B, d, q^(n-1), n)
    m = last.shape[1] * last.shape[2]
    out = np.empty((B, m, n, n), dtype=np.int64)
    out[:, :, :n - 1, :] = partial[:, None]
    out[:, :, n - 1, :] = last.reshape(B, m, n)
    return out.reshape(-1, n, n)


_enum_cache = {}


def enumerate_group(G: GroupSpec, cap=None, cache_dir=None):
    """All elements of G (not G/Z) in canonical order."""
    cap = cap_or_default(cap)
    order = group_order(G)
    if order > cap:
        raise SizeCapError(G.label, order, cap)
    cache_dir = get_config().cache_dir if cache_dir is None else cache_dir
    key = (G.n, G.q, G.d)
    if key not in _enum_cache:
        mats = None
        path = None
        if cache_dir:
            import os
            path = os.path.join(cache_dir, f"elements_n{G.n}_q{G.q}_d{G.d}.npy")
            if os.path.exists(path):
                mats = np.load(path)
        if mats is None:
            mats = _enumerate(G)
            if path:
                np.save(path, mats)
        es = ElementSet(G.field, mats)
        if len(es) != order:
            raise AssertionError(f"enumerated {len(es)} elements of {G.label}, expected {order}")
        _enum_cache[key] = es
    return _enum_cache[key]


def standard_generators(G: GroupSpec):
    """Elementary transvections (over an additive basis of GF(q)) and one
    diagonal matrix whose determinant generates D."""
    F, n = G.field, G.n
    gens = []
    for i in range(n):
        for j in range(n):
            if i != j:
                for a in range(F.k):
                    m = identity_array(n)
                    m[i, j] = F.p0 ** a
                    gens.append(Mat(F, m))
    if G.d > 1:
        gens.append(Mat.diag(F, [F.pow(F.prim, (G.q - 1) // G.d)] + [1] * (n - 1)))
    if not gens:
        gens.append(Mat.identity(F, n))
    return gens


# -- subgroups --------------------------------------------------------------

class Subgroup:
    """A subgroup of G given by generators, with lazily computed elements."""

    def __init__(self, ambient: GroupSpec, gens, elements: Optional[ElementSet] = None,
                 order=None, name=""):
        self.ambient = ambient
        self._gens = list(gens)
        self._elements = elements
        self._order = order if elements is None else len(elements)
        self.name = name

    @property
    def gens(self):
        # a subgroup handed over as a bare element set gets generators on first use
        if not self._gens and self._elements is not None and len(self._elements) > 1:
            self._gens = _generators_from_elements(self.field, self._elements)
        return self._gens

    @gens.setter
    def gens(self, value):
        self._gens = list(value)

    @property
    def field(self):
        return self.ambient.field

    @property
    def n(self):
        return self.ambient.n

    def gens_in_ambient(self):
        if not self.gens:
            return True
        return bool(np.all(self.ambient.contains(np.stack([g.a for g in self.gens]))))

    def elements(self, cap=None) -> ElementSet:
        if self._elements is None:
            self._elements = _close(self.field, self.n, self.gens, cap_or_default(cap),
                                    self.name or "subgroup")
            self._order = len(self._elements)
        return self._elements

    @property
    def has_elements(self):
        return self._elements is not None

    @property
    def order(self):
        if self._order is None:
            self.elements()
        return self._order

    def contains(self, mats):
        mats = np.asarray(mats)
        single = mats.ndim == 2
        out = self.elements().index_of(mats[None] if single else mats) >= 0
        return bool(out[0]) if single else out

    def contains_all(self, mats):
        return bool(np.all(self.contains(np.stack([m.a for m in mats])))) if mats else True

    def is_subgroup_of(self, other):
        return other.contains_all(self.gens)

    def conjugate(self, g: Mat):
        """g S g^-1."""
        gi = g.inv()
        gens = [g @ x @ gi for x in self.gens]
        els = None
        if self._elements is not None:
            els = ElementSet(self.field, bmatmul(self.field, bmatmul(self.field, g.a, self._elements.mats), gi.a))
        return Subgroup(self.ambient, gens, els, name=f"{self.name}^g" if self.name else "")

    def __repr__(self):
        o = self._order if self._order is not None else "?"
        return f"Subgroup({self.name or 'unnamed'} in {self.ambient.label}, order {o})"


def whole_group(G: GroupSpec, cap=None) -> Subgroup:
    return Subgroup(G, standard_generators(G), enumerate_group(G, cap), name=G.label)


def _close(F, n, gens, cap, what):
    ident = identity_array(n)[None]
    seen = bkeys(F, ident)
    chunks = [ident]
    frontier = ident
    G = np.stack([g.a for g in gens]) if gens else np.empty((0, n, n), dtype=np.int64)
    while len(frontier) and len(G):
        prods = bmatmul(F, frontier[:, None], G[None]).reshape(-1, n, n)
        k = bkeys(F, prods)
        uniq, first = np.unique(k, return_index=True)
        new_mask = ~np.isin(uniq, seen, assume_unique=True)
        frontier = prods[first[new_mask]]
        if not len(frontier):
            break
        seen = np.union1d(seen, uniq[new_mask]) if seen.dtype != object else \
            np.array(sorted(set(seen.tolist()) | set(uniq[new_mask].tolist())), dtype=object)
        chunks.append(frontier)
        if len(seen) > cap:
            raise SizeCapError(what, f">{cap}", cap)
    return ElementSet(F, np.concatenate(chunks))


def closure(gens, ambient: GroupSpec, cap=None, name=""):
    """Subgroup generated by ``gens`` with elements cached."""
    S = Subgroup(ambient, gens, name=name)
    S.elements(cap)
    return S


def _batches_of(within, cap):
    if isinstance(within, GroupSpec):
        return enumerate_group(within, cap), within
    return within.elements(cap), within.ambient


def stabilizer_scan(kind, Q: Subgroup, within, cap=None, workers=None, name=""):
    """Normalizer or centralizer of Q inside ``within`` (Subgroup or GroupSpec), by scanning.

    Only the generators of Q are tested, which suffices.
    """
    if kind not in ("normalizer", "centralizer"):
        raise ValueError(f"unknown stabilizer kind {kind!r}")
    cap = cap_or_default(cap)
    elems, ambient = _batches_of(within, cap)
    F = elems.field
    gens = [g.a for g in Q.gens if not g.is_identity()]
    if kind == "normalizer":
        Qels = Q.elements(cap)

    def work(rng):
        a, b = rng
        X = elems.mats[a:b]
        keep = np.ones(b - a, dtype=bool)
        if kind == "centralizer":
            for x in gens:
                keep &= np.all(bmatmul(F, X, x) == bmatmul(F, x, X), axis=(1, 2))
        elif gens:
            Xi = binv(F, X)
            for x in gens:
                keep &= Qels.index_of(bmatmul(F, bmatmul(F, X, x), Xi)) >= 0
        return np.nonzero(keep)[0] + a

    idx = np.concatenate(ordered_map(work, chunk_ranges(len(elems), CHUNK // 4), workers)
                         or [np.empty(0, dtype=np.int64)])
    els = ElementSet(F, elems.mats[idx], elems.keys[idx], presorted=True)
    gens_out = _generators_from_elements(F, els)
    label = name or f"{'N' if kind == 'normalizer' else 'C'}({Q.name or 'Q'})"
    return Subgroup(ambient, gens_out, els, name=label)


def _generators_from_elements(F, els: ElementSet, limit=64):
    """Small generating set of a group given by its sorted elements: greedily add
    the first element not yet in the closure."""
    gens = []
    have = ElementSet(F, identity_array(els.n)[None])
    while len(have) < len(els):
        missing = np.nonzero(have.index_of_keys(els.keys) < 0)[0]
        gens.append(Mat(F, els.mats[missing[0]]))
        have = _close(F, els.n, gens, len(els), "generators")
        if len(gens) > limit:  # pragma: no cover - defensive
            raise AssertionError("generator search did not terminate")
    return gens


def intersect(A: Subgroup, B: Subgroup, cap=None, name=""):
    ea, eb = A.elements(cap), B.elements(cap)
    mask = eb.index_of_keys(ea.keys) >= 0
    els = ElementSet(ea.field, ea.mats[mask], ea.keys[mask], presorted=True)
    return Subgroup(A.ambient, _generators_from_elements(ea.field, els), els, name=name)


def commutator_gens(gens):
    out = []
    for i, x in enumerate(gens):
        for y in gens[i + 1:]:
            c = x.commutator(y)
            if not c.is_identity():
                out.append(c)
    return out


def derived_subgroup(H: Subgroup, cap=None, method="normal_closure", name=""):
    """[H, H].

    ``normal_closure``: normal closure in H of the commutators of H's generators.
    ``all_pairs``: closure of every commutator of cached elements (O(|H|^2)).
    """
    cap = cap_or_default(cap)
    F, n = H.field, H.n
    label = name or f"[{H.name or 'H'},{H.name or 'H'}]"
    if method == "all_pairs":
        X = H.elements(cap).mats
        Xi = X[H.elements(cap).inverse_index]
        keys = []
        reps = []
        for a, b in chunk_ranges(len(X), max(1, CHUNK // max(1, len(X)))):
            c = bmatmul(F, bmatmul(F, X[a:b, None], X[None]), bmatmul(F, Xi[a:b, None], Xi[None]))
            c = c.reshape(-1, n, n)
            k, first = np.unique(bkeys(F, c), return_index=True)
            keys.append(k)
            reps.append(c[first])
        C = ElementSet(F, np.concatenate(reps))
        gens = [Mat(F, m) for m in C.mats]
        K = Subgroup(H.ambient, gens, _close(F, n, gens, cap, label), name=label)
        K.gens = _generators_from_elements(F, K.elements())
        return K
    if method != "normal_closure":
        raise ValueError(f"unknown method {method!r}")
    gens = commutator_gens(H.gens)
    K = closure(gens, H.ambient, cap, name=label)
    while True:
        extra = []
        for h in H.gens:
            hi = h.inv()
            conj = [h @ k @ hi for k in K.gens]
            extra += [c for c in conj if not K.contains(c.a)]
        if not extra:
            return K
        gens = K.gens + _dedupe(extra)
        K = closure(gens, H.ambient, cap, name=label)


def _dedupe(mats):
    seen, out = set(), []
    for m in mats:
        k = m.a.tobytes()
        if k not in seen:
            seen.add(k)
            out.append(m)
    return out


def coset_labels(H: Subgroup, K: Subgroup, cap=None):
    """Label each element of H by its left coset hK.  Returns (labels, rep indices),
    the representative of a coset being its least element."""
    eh = H.elements(cap)
    N = len(eh)
    rows, cols = [np.arange(N)], [np.arange(N)]
    for k in K.gens:
        j = eh.index_of(bmatmul(H.field, eh.mats, k.a))
        if np.any(j < 0):
            raise ValueError("K is not contained in H")
        rows.append(np.arange(N))
        cols.append(j)
    r, c = np.concatenate(rows), np.concatenate(cols)
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(N, N)).tocsr()
    ncomp, lab = connected_components(graph, directed=True, connection="weak")
    reps = np.full(ncomp, N, dtype=np.int64)
    np.minimum.at(reps, lab, np.arange(N))
    # relabel so that label order follows representative order
    order = np.argsort(reps)
    relabel = np.empty(ncomp, dtype=np.int64)
    relabel[order] = np.arange(ncomp)
    return relabel[lab], reps[order]


def quotient_element_orders(F, reps, K: Subgroup, quotient_order):
    """Orders of the images of ``reps`` (matrix stack) in a group of the given
    order whose kernel is K (K must be normal)."""
    Kels = K.elements()
    orders = np.ones(len(reps), dtype=np.int64)
    for ell, a in factorint(quotient_order) if quotient_order > 1 else ():
        y = bpow(F, reps, quotient_order // ell ** a)
        for _ in range(a):
            inside = Kels.index_of(y) >= 0
            orders = np.where(inside, orders, orders * ell)
            y = bpow(F, y, ell)
    return orders


def abelianization(H: Subgroup, cap=None, modulo=None, method="normal_closure"):
    """Invariant factors of H / (M [H,H]) where M is generated by ``modulo``
    (central elements of H, e.g. the scalar subgroup Z)."""
    cap = cap_or_default(cap)
    K = derived_subgroup(H, cap, method=method)
    if modulo:
        K = closure(K.gens + list(modulo), H.ambient, cap, name="Z[H,H]")
    labels, reps = coset_labels(H, K, cap)
    Qorder = len(reps)
    if H.order != Qorder * K.order:
        raise AssertionError("coset count does not match |H|/|K|")
    orders = quotient_element_orders(H.field, H.elements().mats[reps], K, Qorder)
    return invariants_from_orders(orders)


class CentralQuotient:
    """G/Z for Z a group of central scalars.  Coset representative = least element of xZ."""

    def __init__(self, G: GroupSpec, cap=None):
        self.G = G
        self.scalars = np.array(G.center_values, dtype=np.int64)
        for lam in self.scalars:
            if not G.det_mask[G.field.pow(int(lam), G.n)]:
                raise HypothesisError(f"scalar {lam} is not in {G.label}")
        self._cap = cap

    @property
    def order(self):
        return group_order(self.G, quotient=True)

    def _orbit(self, mats):
        F = self.G.field
        mats = np.asarray(mats)
        return F.vmul(mats[None], self.scalars[:, None, None, None])

    def rep(self, mats):
        """Canonical representatives of the batch's Z-cosets."""
        F = self.G.field
        orb = self._orbit(mats)
        k = bkeys(F, orb)
        j = np.argmin(k, axis=0)
        return orb[j, np.arange(orb.shape[1])]

    def equal(self, x: Mat, y: Mat):
        return bool(np.array_equal(self.rep(x.a[None]), self.rep(y.a[None])))

    def representatives(self) -> ElementSet:
        els = enumerate_group(self.G, self._cap)
        return ElementSet(self.G.field, self.rep(els.mats))

    def preimage(self, S: Subgroup):
        return closure(S.gens + self.G.center_gens(), self.G, self._cap,
                       name=f"{S.name}Z" if S.name else "")


def central_quotient_view(G: GroupSpec, cap=None):
    return CentralQuotient(G, cap)


def random_subgroup(G: GroupSpec, rng, ngens=2, cap=None):
    """Subgroup generated by ``ngens`` uniformly random elements of G (enumerable G)."""
    els = enumerate_group(G, cap)
    idx = rng.integers(0, len(els), size=ngens)
    return closure([els.mat(int(i)) for i in idx], G, cap)


def element_orders(F, mats, bound):
    """Orders of a batch of matrices, each assumed to divide ``bound``."""
    n = mats.shape[-1]
    ident = identity_array(n)
    orders = np.ones(len(mats), dtype=np.int64)
    for ell, a in factorint(bound) if bound > 1 else ():
        y = bpow(F, mats, bound // ell ** a)
        for _ in range(a):
            one = np.all(y == ident, axis=(1, 2))
            orders = np.where(one, orders, orders * ell)
            y = bpow(F, y, ell)
    return orders

