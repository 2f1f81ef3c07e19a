"""p-local structure of SL(n,q) <= G <= GL(n,q) for a prime p not dividing q.

Parameters: e = ord_p(q), n = r e + f with 0 <= f < e, p^t || q^e - 1.
For e > 1 everything is built from GF(q^e)^x acting on GF(q^e) = GF(q)^e:
``w`` is multiplication by a primitive element, ``g`` the q-power Frobenius.
"""

from __future__ import annotations

import functools

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import cap_or_default
from .errors import HypothesisError, InconsistencyError, PCoprimeError
from .ff import extension, field_from_q
from .matgrp import (
    GroupSpec, Mat, Subgroup, abelianization, bmatmul, closure, derived_subgroup,
    enumerate_group, gl_order, stabilizer_scan,
)
from .matgrp.mat import identity_array
from .numtheory import factorial_valuation, factorint, is_prime, mult_order, p_part, valuation
from .report import Report


@dataclass(frozen=True)
class PParams:
    n: int
    q: int
    p: int
    e: int
    r: int
    f: int
    t: int
    sylow_abelian: bool
    sylow_valuation: int  # v_p |GL(n,q)|

    @property
    def formula_valuation(self):
        """r t + v_p(r!); equals sylow_valuation for odd p."""
        return self.r * self.t + factorial_valuation(self.r, self.p)

    def to_json(self):
        return {k: getattr(self, k) for k in
                ("n", "q", "p", "e", "r", "f", "t", "sylow_abelian", "sylow_valuation")}


def p_parameters(n, q, p) -> PParams:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if q % p == 0:
        raise HypothesisError(f"p = {p} divides q = {q}")
    e = mult_order(q % p, p)
    if e > n:
        raise PCoprimeError(f"p = {p} does not divide |GL({n},{q})|")
    r, f = divmod(n, e)
    t = valuation(q ** e - 1, p)
    val = valuation(gl_order(n, q), p)
    return PParams(n, q, p, e, r, f, t, n < p * e, val)


def sylow_order_valuation(G: GroupSpec, p):
    """v_p |G| for G between SL and GL (ignoring Z)."""
    return valuation(gl_order(G.n, G.q), p) - valuation(G.q - 1, p) + valuation(G.d, p) \
        if G.q - 1 else 0


# -- small matrix builders --------------------------------------------------

def embed_block(F, n, block, at):
    """n x n identity with ``block`` (Mat or array) placed at diagonal offset ``at``."""
    a = identity_array(n)
    b = block.a if isinstance(block, Mat) else np.asarray(block)
    k = b.shape[0]
    a[at:at + k, at:at + k] = b
    return Mat(F, a)


def block_matrix(F, blocks):
    """Assemble a square block matrix from a grid of arrays/Mats (None = zero block)."""
    sizes = [next(b for b in row if b is not None) for row in blocks]
    dim = [(b.a if isinstance(b, Mat) else np.asarray(b)).shape[0] for b in sizes]
    n = sum(dim)
    out = np.zeros((n, n), dtype=np.int64)
    ri = 0
    for i, row in enumerate(blocks):
        ci = 0
        for j, b in enumerate(row):
            if b is not None:
                arr = b.a if isinstance(b, Mat) else np.asarray(b)
                out[ri:ri + dim[i], ci:ci + dim[j]] = arr
            ci += dim[j]
        ri += dim[i]
    return Mat(F, out)


def diag_with(F, n, entries):
    """Diagonal matrix, identity except at the given {position: value}."""
    d = [1] * n
    for i, v in entries.items():
        d[i] = v
    return Mat.diag(F, d)


def block_permutation(F, n, e, perm):
    """Permutation of e x e diagonal blocks: block j is sent to block perm[j]."""
    a = np.zeros((n, n), dtype=np.int64)
    nb = len(perm)
    for j, tj in enumerate(perm):
        for k in range(e):
            a[tj * e + k, j * e + k] = 1
    for k in range(nb * e, n):
        a[k, k] = 1
    return Mat(F, a)


def sylow_symmetric_generators(r, p):
    """Permutations (as lists) generating a Sylow p-subgroup of S_r: iterated wreath
    products of p-cycles on consecutive chunks given by the base-p digits of r."""
    gens = []
    start = 0
    digits = []
    x = r
    while x:
        digits.append(x % p)
        x //= p
    for k in range(len(digits) - 1, 0, -1):
        size = p ** k
        for _ in range(digits[k]):
            for level in range(1, k + 1):
                sub = p ** (level - 1)
                perm = list(range(r))
                for i in range(p ** level):
                    perm[start + i] = start + (i + sub) % (p ** level)
                gens.append(perm)
            start += size
    return gens


# -- Sylow and E_p ----------------------------------------------------------

def _check_p2(G: GroupSpec, P: PParams):
    if P.p == 2 and G.n >= 2 and G.q % 4 == 3:
        raise HypothesisError("Sylow 2-subgroups for q = 3 mod 4 and n >= 2 are not "
                              "of diagonal-wreath shape; unsupported")


def _det_p_generator(G: GroupSpec, p):
    """Generator of the p-part of D (an element of GF(q))."""
    F = G.field
    dp = p_part(G.d, p)
    return F.pow(F.prim, (G.q - 1) // dp)


def build_sylow(G: GroupSpec, p=None, cap=None, verify=True) -> Subgroup:
    p = p or G.p
    P = p_parameters(G.n, G.q, p)
    _check_p2(G, P)
    F, n = G.field, G.n
    gens = []
    if P.e == 1:
        zeta = F.pow(F.prim, (G.q - 1) // p ** P.t)
        zi = F.inv(zeta)
        for i in range(n - 1):
            gens.append(diag_with(F, n, {i: zeta, n - 1: zi}))
        delta = _det_p_generator(G, p)
        if delta != 1:
            gens.append(diag_with(F, n, {n - 1: delta}))
    else:
        sg = special_elements(P.e, G.q, p)
        for i in range(P.r):
            gens.append(embed_block(F, n, sg.u_t, i * P.e))
    minus = F.minus_one
    for perm in sylow_symmetric_generators(P.r, p):
        m = block_permutation(F, n, P.e, perm)
        if m.det() != 1:
            m = diag_with(F, n, {0: minus}) @ m
        gens.append(m)
    S = Subgroup(G, gens, name="S")
    v = sylow_order_valuation(G, p)
    S._order = p ** v
    if verify and p ** v <= cap_or_default(cap):
        S._elements = None
        S._order = None
        if S.order != p ** v:
            raise InconsistencyError(f"Sylow construction has order {S.order}, expected {p}^{v}")
        if not S.gens_in_ambient():
            raise InconsistencyError("Sylow generator outside G")
    return S


def build_elementary_Ep(G: GroupSpec, p=None, cap=None) -> Subgroup:
    p = p or G.p
    P = p_parameters(G.n, G.q, p)
    F, n = G.field, G.n
    gens = []
    if P.e == 1:
        z1 = F.pow(F.prim, (G.q - 1) // p)
        if G.d % p == 0:
            gens = [diag_with(F, n, {i: z1}) for i in range(n)]
        else:
            gens = [diag_with(F, n, {i: z1, n - 1: F.inv(z1)}) for i in range(n - 1)]
        rank = n if G.d % p == 0 else n - 1
    else:
        sg = special_elements(P.e, G.q, p)
        gens = [embed_block(F, n, sg.u, i * P.e) for i in range(P.r)]
        rank = P.r
    E = Subgroup(G, gens, name="E_p")
    if p ** rank <= cap_or_default(cap):
        if E.order != p ** rank:
            raise InconsistencyError(f"E_p has order {E.order}, expected {p}^{rank}")
    else:
        E._order = p ** rank
    return E


# -- special elements of GL(e, q) -----------------------------------------

@dataclass
class SpecialGens:
    e: int
    q: int
    p: Optional[int]
    w: Mat
    u: Mat
    u_t: Mat
    g: Mat
    v: Mat
    s: int
    u_order: int
    field_ext: object = field(repr=False, default=None)

    def w_power(self, k):
        return self.w ** (k % (self.q ** self.e - 1))

    def k_matrix(self, y):
        """Matrix of multiplication by the GF(q^e) element y (0 gives the zero matrix)."""
        if y == 0:
            return Mat(self.w.field, np.zeros((self.e, self.e), dtype=np.int64))
        return self.w_power(self.field_ext.big.log(y))

    def in_cyclic(self, a: Mat):
        """a in <w>: invertible and commuting with w (the centralizer of w in M_e is GF(q^e))."""
        return a.det() != 0 and a @ self.w == self.w @ a


def primitive_prime_divisors(e, q):
    N = q ** e - 1
    return [ell for ell, _ in factorint(N) if mult_order(q % ell, ell) == e]


def _fallback_u_order(e, q):
    """Least m | q^e - 1 with m not dividing q^i - 1 for 0 < i < e."""
    N = q ** e - 1
    for m in range(2, N + 1):
        if N % m == 0 and all((q ** i - 1) % m for i in range(1, e)):
            return m
    raise AssertionError("no primitive order")  # pragma: no cover


def special_elements(e, q, p=None) -> SpecialGens:
    """w, u, g, v of GL(e,q) for e > 1.

    With p=None the least primitive prime divisor of q^e - 1 is used; when there
    is none, u is taken of the least order m that still does not divide any
    q^i - 1 with i < e (so that it acts irreducibly).
    """
    if e <= 1:
        raise HypothesisError("special elements need e > 1")
    if p is not None:
        if q % p == 0:
            raise HypothesisError(f"p = {p} divides q = {q}")
        if mult_order(q % p, p) != e:
            raise HypothesisError(f"ord_{p}({q}) != {e}")
    else:
        ppd = primitive_prime_divisors(e, q)
        p = ppd[0] if ppd else None
    return _special_elements(e, q, p)


_special_cache = {}


def _special_elements(e, q, p):
    key = (e, q, p)
    if key in _special_cache:
        return _special_cache[key]
    F = field_from_q(q)
    X = extension(F, e)
    K = X.big
    alpha = X.alpha
    basis = [K.pow(alpha, j) for j in range(e)]

    def matrix_of(fn):
        cols = [X.coords(fn(b)) for b in basis]
        return Mat(F, np.array(cols, dtype=np.int64).T)

    w = matrix_of(lambda y: K.mul(alpha, y))
    g = matrix_of(lambda y: K.pow(y, q))
    N = q ** e - 1
    if p is not None:
        t = valuation(N, p)
        u_t = w ** (N // p ** t)
        u = u_t ** (p ** (t - 1))
        u_order = p
    else:
        u_order = _fallback_u_order(e, q)
        u = u_t = w ** (N // u_order)
    v = w ** ((q - 1) // 2) if q % 2 else Mat.identity(F, e)
    s = sum(q ** i for i in range(e))
    sg = SpecialGens(e, q, p, w, u, u_t, g, v, s, u_order, X)
    _check_special(sg)
    _special_cache[key] = sg
    return sg


def _check_special(sg: SpecialGens):
    F = sg.w.field
    X = sg.field_ext
    K = X.big
    problems = []
    N = sg.q ** sg.e - 1
    detw = sg.w.det()
    norm = X.to_base(K.pow(X.alpha, sg.s))
    if detw != norm:
        problems.append("det(w) != w^s")
    if F.order(detw) != sg.q - 1 and sg.q > 2:
        problems.append("det(w) is not a generator")
    if sg.u.det() != 1:
        problems.append("det(u) != 1")
    if sg.g.det() != F.pow(F.minus_one, sg.e - 1):
        problems.append("det(g) != (-1)^(e-1)")
    if sg.v.det() != F.minus_one:
        problems.append("det(v) != -1")
    if sg.g @ sg.w @ sg.g.inv() != sg.w ** sg.q:
        problems.append("g w g^-1 != w^q")
    if not (sg.w ** N).is_identity() or any((sg.w ** (N // ell)).is_identity()
                                              for ell, _ in factorint(N)):
        problems.append("w does not have order q^e - 1")
    if not (sg.u ** sg.u_order).is_identity() or sg.u.is_identity():
        problems.append("u has the wrong order")
    if problems:
        raise InconsistencyError("special elements: " + "; ".join(problems))


# -- standard subgroups -----------------------------------------------------

def transvection(F, n, i, j, lam):
    a = identity_array(n)
    a[i, j] = lam
    return Mat(F, a)


def sl_generators(F, n, offset=0, total=None):
    """Transvections generating SL(n,q) placed on the diagonal block at ``offset``."""
    total = total or n
    return [transvection(F, total, offset + i, offset + j, F.p0 ** a)
            for i in range(n) for j in range(n) if i != j for a in range(F.k)]


def torus_generators(G: GroupSpec):
    F, n = G.field, G.n
    zeta = F.prim
    gens = [diag_with(F, n, {i: zeta, n - 1: F.inv(zeta)}) for i in range(n - 1)] if G.q > 2 else []
    if G.d > 1:
        gens.append(diag_with(F, n, {n - 1: F.pow(F.prim, (G.q - 1) // G.d)}))
    return [m for m in gens if not m.is_identity()]


def signed_transposition(F, n, i):
    """sigma_i: identity except the 2x2 block [[0,-1],[1,0]] at rows/cols i, i+1 (0-based)."""
    a = identity_array(n)
    a[i, i] = 0
    a[i + 1, i + 1] = 0
    a[i, i + 1] = F.minus_one
    a[i + 1, i] = 1
    return Mat(F, a)


def torus_diagonal(F, n, i, zeta):
    """D_i: zeta at position i and zeta^-1 at position i+1 (0-based)."""
    return diag_with(F, n, {i: zeta, i + 1: F.inv(zeta)})


def levi_generators(G: GroupSpec, composition):
    if sum(composition) != G.n or any(c <= 0 for c in composition):
        raise ValueError(f"invalid composition {composition} of {G.n}")
    F, n = G.field, G.n
    gens = []
    off = 0
    for c in composition:
        gens += sl_generators(F, c, off, n)
        off += c
    return gens + torus_generators(G)


@dataclass
class Sec7Data:
    sg: SpecialGens
    A: Mat
    B: Mat
    m: Optional[int]
    subgroups: dict


def q3_exponent(e, q, p):
    """Least m in (Z/p)^x outside the q-power orbit of 1, or None."""
    orbit = {pow(q, i, p) for i in range(e)}
    return next((m for m in range(2, p) if m not in orbit), None)


def q3_exponents(e, q, p):
    orbit = {pow(q, i, p) for i in range(e)}
    return [m for m in range(2, p) if m not in orbit]


def section7_subgroups(e, q, p) -> Sec7Data:
    sg = special_elements(e, q, p)
    F = sg.w.field
    G = GroupSpec.sl(2 * e, q)
    I = Mat.identity(F, e)
    A = Mat.block_diag(sg.u, I)
    B = Mat.block_diag(I, sg.u)
    m = q3_exponent(e, q, p)
    C1 = Mat.block_diag(sg.w, sg.w.inv())
    C2 = Mat.block_diag(sg.w ** (q - 1), I)
    subs = {
        "E": Subgroup(G, [A, B], name="E"),
        "Q1": Subgroup(G, [A], name="Q1"),
        "Q2": Subgroup(G, [A @ B], name="Q2"),
        "U": Subgroup(G, [C1, C2], name="U"),
    }
    if m is not None:
        subs["Q3"] = Subgroup(G, [A @ B ** m], name="Q3")
    return Sec7Data(sg, A, B, m, subs)


def build_standard_subgroups(G: GroupSpec, kind, params=None) -> Subgroup:
    """kind: torus, torus_normalizer, levi, parabolic, derived_parabolic, or sec7:<name>."""
    params = params or {}
    F, n = G.field, G.n
    if kind == "torus":
        return Subgroup(G, torus_generators(G) or [Mat.identity(F, n)], name="T")
    if kind == "torus_normalizer":
        gens = torus_generators(G) + [signed_transposition(F, n, i) for i in range(n - 1)]
        return Subgroup(G, gens or [Mat.identity(F, n)], name="N(T)")
    if kind == "levi":
        comp = tuple(params.get("composition", (n - 1, 1)))
        return Subgroup(G, levi_generators(G, comp), name=f"L{comp}")
    if kind == "parabolic":
        gens = levi_generators(G, (n - 1, 1))
        gens += [transvection(F, n, i, n - 1, F.p0 ** a) for i in range(n - 1) for a in range(F.k)]
        return Subgroup(G, gens, name="P")
    if kind == "derived_parabolic":
        gens = sl_generators(F, n - 1, 0, n)
        gens += [transvection(F, n, i, n - 1, F.p0 ** a) for i in range(n - 1) for a in range(F.k)]
        return Subgroup(G, gens, name="H")
    if kind.startswith("sec7:"):
        p = params.get("p", G.p)
        if n % 2 or n // 2 <= 1:
            raise ValueError("section-7 subgroups need n = 2e with e > 1")
        data = section7_subgroups(n // 2, G.q, p)
        name = kind.split(":", 1)[1]
        if name not in data.subgroups:
            raise HypothesisError(f"{name} does not exist for (e,q,p) = ({n // 2},{G.q},{p})")
        S = data.subgroups[name]
        return Subgroup(G, S.gens, name=S.name)
    raise ValueError(f"unknown subgroup kind {kind!r}")


# -- verifiers --------------------------------------------------------------

def _same_elements(A: Subgroup, B: Subgroup):
    ea, eb = A.elements(), B.elements()
    return len(ea) == len(eb) and bool(np.array_equal(ea.keys, eb.keys))


def verify_glebasics(e, q, p=None, scan_cap=10_000) -> Report:
    sg = special_elements(e, q, p)
    F = sg.w.field
    X = sg.field_ext
    K = X.big
    GL = GroupSpec.gl(e, q)
    rep = Report("glebasics", {"e": e, "q": q, "p": sg.p, "u_order": sg.u_order})
    detw = sg.w.det()
    rep.check("c:det_w_is_norm", detw == X.to_base(K.pow(X.alpha, sg.s)),
              det_w=detw, s=sg.s)
    rep.check("c:det_w_generates", q == 2 or F.order(detw) == q - 1, order=F.order(detw) if detw else 0)
    rep.check("e:det_u", sg.u.det() == 1)
    rep.check("e:det_g", sg.g.det() == F.pow(F.minus_one, e - 1), det_g=sg.g.det())
    rep.check("v:det_v", sg.v.det() == F.minus_one or (q % 2 == 0 and sg.v.is_identity()))
    rep.check("frobenius", sg.g @ sg.w @ sg.g.inv() == sg.w ** q)
    N = closure([sg.w, sg.g], GL, name="<w,g>")
    S = closure([sg.u_t], GL, name="S")
    rep.check("b:normalizes", all(S.contains((x @ y @ x.inv()).a) for x in (sg.w, sg.g) for y in S.gens))
    Nd = derived_subgroup(N)
    W1 = closure([sg.w ** (q - 1)], GL, name="<w^(q-1)>")
    rep.check("d:derived_is_w^(q-1)", _same_elements(Nd, W1), derived_order=Nd.order)
    rep.check("d:index", N.order // Nd.order == e * (q - 1), index=N.order // Nd.order,
              expected=e * (q - 1))
    # (d) last clause: [N,N] = elements of C(S) = <w> of determinant 1
    Wgrp = closure([sg.w], GL, name="<w>")
    dets = _dets(F, Wgrp.elements().mats)
    rep.check("d:det_one_part", int(np.sum(dets == 1)) == Nd.order and
              bool(np.all(_dets(F, Nd.elements().mats) == 1)))
    if gl_order(e, q) <= scan_cap:
        C = stabilizer_scan("centralizer", closure([sg.u], GL), GL)
        rep.check("a:centralizer_scan", _same_elements(C, Wgrp), order=C.order)
        NS = stabilizer_scan("normalizer", S, GL)
        rep.check("b:normalizer_scan", _same_elements(NS, N), order=NS.order)
    else:
        rep.skip("a:centralizer_scan", f"|GL({e},{q})| > {scan_cap}")
        rep.skip("b:normalizer_scan", f"|GL({e},{q})| > {scan_cap}")
    rep.check("f:zero_or_invertible", *_check_intertwiners(sg))
    return rep


def _dets(F, mats):
    from .matgrp import bdet
    return bdet(F, mats)


def _check_intertwiners(sg: SpecialGens, limit=200_000, samples=4000, seed=0):
    """Every a with a u^l = u^m a (l a unit mod ord u) is 0 or invertible.

    Exhaustive over all e x e matrices when q^(e^2) <= limit, else a seeded sample.
    """
    F = sg.w.field
    e = sg.e
    total = sg.q ** (e * e)
    if total <= limit:
        codes = np.arange(total, dtype=np.int64)
        mats = np.stack([(codes // sg.q ** i) % sg.q for i in range(e * e)], axis=1).reshape(-1, e, e)
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        mats = rng.integers(0, sg.q, size=(samples, e, e))
        mode = "sampled"
    from .matgrp import bdet
    dets = bdet(F, mats)
    nonzero = np.any(mats != 0, axis=(1, 2))
    bad = 0
    hits = 0
    o = sg.u_order
    for ell in range(1, o):
        if np.gcd(ell, o) != 1:
            continue
        ul = (sg.u ** ell).a
        left = bmatmul(F, mats, ul)
        for m in range(o):
            um = (sg.u ** m).a
            ok = np.all(left == bmatmul(F, um, mats), axis=(1, 2))
            hits += int(np.sum(ok & nonzero))
            bad += int(np.sum(ok & nonzero & (dets == 0)))
    return bad == 0, {"mode": mode, "nonzero_solutions": hits, "singular_solutions": bad}


def verify_torus_commutator(n, q) -> Report:
    if n < 3:
        raise ValueError("torus commutator identity needs n >= 3")
    F = field_from_q(q)
    zeta = F.prim
    rep = Report("torus-commutator", {"n": n, "q": q})
    D = [torus_diagonal(F, n, i, zeta) for i in range(n - 1)]
    for i in range(n - 1):
        sigma = signed_transposition(F, n, i)
        W = D[i + 1] if i < n - 2 else D[i - 1]
        lhs = sigma @ W @ sigma.inv() @ W.inv()
        rep.check(f"sigma_{i + 1}", lhs == D[i], vacuous=q == 2)
    return rep


def weyl_image_group(r, q):
    """N_{GL(r,q)}(T) intersected with SL(r,q): monomial matrices of determinant 1."""
    G = GroupSpec.sl(r, q)
    return build_standard_subgroups(G, "torus_normalizer")


def verify_weyl_abelianization(r, q, cap=None) -> Report:
    H = weyl_image_group(r, q)
    expected_order = (q - 1) ** (r - 1) * _factorial(r)
    rep = Report("weyl-ab", {"r": r, "q": q})
    rep.check("order", H.order == expected_order, order=H.order, expected=expected_order)
    ab = abelianization(H, cap)
    rep.value("abelianization", ab.to_json())
    if r >= 3:
        rep.check("order_two", ab.order == 2 and ab.free_rank == 0, torsion=list(ab.torsion))
    return rep


def _factorial(r):
    out = 1
    for i in range(2, r + 1):
        out *= i
    return out


def sylow_bruteforce(G: GroupSpec, p, cap=None) -> Subgroup:
    """A Sylow p-subgroup of an enumerable G, grown greedily: while P is not Sylow,
    some p-element of N_G(P) outside P extends it."""
    from .matgrp import element_orders
    els = enumerate_group(G, cap)
    F = G.field
    size = group_order_of(G)
    target = p ** valuation(size, p)
    orders = element_orders(F, els.mats, size)
    pel = [int(i) for i in np.nonzero((orders > 1) & (orders == np.array(
        [p ** valuation(int(o), p) for o in orders])))[0]]
    P = closure([], G, name="S")
    while P.order < target:
        for i in pel:
            x = els.mat(i)
            if P.contains(x.a):
                continue
            xi = x.inv()
            if not all(P.contains((x @ y @ xi).a) for y in P.gens):
                continue
            cand = closure(P.gens + [x], G, cap, name="S")
            if cand.order == p ** valuation(cand.order, p):
                P = cand
                break
        else:  # pragma: no cover - impossible by Sylow theory
            raise InconsistencyError("Sylow search stalled")
    return P


def sylow_subgroup(G: GroupSpec, p, cap=None) -> Subgroup:
    """Structured construction when available, brute force otherwise (p | q, or
    p = 2 with q = 3 mod 4)."""
    if G.q % p and not (p == 2 and G.q % 4 == 3 and G.n >= 2):
        S = build_sylow(G, p, cap)
        S.elements(cap)
        return S
    return sylow_bruteforce(G, p, cap)


def elementary_rank2_subgroups(G: GroupSpec, p, cap=None):
    """All subgroups of G isomorphic to C_p x C_p, as sorted tuples of element
    indices into ``enumerate_group(G)``."""
    return list(_rank2_cached(G, p, cap_or_default(cap)))


@functools.lru_cache(maxsize=8)
def _rank2_cached(G: GroupSpec, p, cap):
    from .matgrp import element_orders
    els = enumerate_group(G, cap)
    F = G.field
    orders = element_orders(F, els.mats, group_order_of(G))
    idx = np.nonzero(orders == p)[0]
    P = els.mats[idx]
    ident = identity_array(G.n)
    found = {}
    partners = {}  # element index -> indices sharing a found subgroup with it
    for t, i in enumerate(idx):
        i = int(i)
        x = P[t]
        comm = np.nonzero(np.all(bmatmul(F, x, P) == bmatmul(F, P, x), axis=(1, 2)))[0]
        xs = [ident]
        for _ in range(p - 1):
            xs.append(bmatmul(F, xs[-1], x))
        xs = np.stack(xs)
        cyc = set(els.index_of(xs).tolist())
        for s_ in comm:
            j = int(idx[s_])
            if j in cyc or j in partners.get(i, ()):
                continue
            ys = [ident]
            for _ in range(p - 1):
                ys.append(bmatmul(F, ys[-1], P[s_]))
            grid = bmatmul(F, xs[:, None], np.stack(ys)[None]).reshape(-1, G.n, G.n)
            members = tuple(sorted(els.index_of(grid).tolist()))
            if members in found:
                continue
            found[members] = True
            for a in members:
                partners.setdefault(a, set()).update(members)
    return tuple(sorted(found))


def subgroup_orbits(G: GroupSpec, subgroups, cap=None):
    """Orbit labels of G acting by conjugation on a conjugation-closed list of
    subgroups (tuples of element indices).  Uses G's generators only."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components
    from .matgrp import standard_generators
    els = enumerate_group(G, cap)
    F = G.field
    pos = {s: k for k, s in enumerate(subgroups)}
    m = len(subgroups)
    if not m:
        return np.empty(0, dtype=np.int64)
    size = len(subgroups[0])
    flat = els.mats[np.array(subgroups).reshape(-1)]
    src, dst = [np.arange(m)], [np.arange(m)]
    for g in standard_generators(G):
        gi = g.inv()
        conj = bmatmul(F, bmatmul(F, g.a, flat), gi.a)
        img = np.sort(els.index_of(conj).reshape(m, size), axis=1)
        dst.append(np.array([pos[tuple(r.tolist())] for r in img]))
        src.append(np.arange(m))
    r, c = np.concatenate(src), np.concatenate(dst)
    graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(m, m)).tocsr()
    _, lab = connected_components(graph, directed=True, connection="weak")
    return lab


def lemma33_scan(G: GroupSpec, p, cap=None) -> Report:
    """Every C_p x C_p subgroup of G is conjugate to one inside E_p (exhaustive)."""
    els = enumerate_group(G, cap)
    E = build_elementary_Ep(G, p, cap)
    subs = elementary_rank2_subgroups(G, p, cap)
    lab = subgroup_orbits(G, subs, cap)
    Eidx = set(els.index_of(E.elements().mats).tolist())
    inside = [k for k, s in enumerate(subs) if set(s) <= Eidx]
    good = {int(lab[k]) for k in inside}
    missing = sum(1 for k in range(len(subs)) if int(lab[k]) not in good)
    rep = Report("lemma33", {"group": G.label, "p": p})
    rep.check("all_conjugate_into_Ep", missing == 0 and (bool(inside) or not subs), subgroups=len(subs),
              classes=len(set(lab.tolist())), not_conjugate=missing, Ep_order=E.order)
    return rep


def group_order_of(G):
    from .matgrp import group_order
    return group_order(G)


__all__ = [
    "PParams", "p_parameters", "build_sylow", "build_elementary_Ep", "SpecialGens",
    "special_elements", "build_standard_subgroups", "section7_subgroups", "q3_exponent",
    "verify_glebasics", "verify_torus_commutator", "verify_weyl_abelianization",
    "sylow_bruteforce", "sylow_subgroup", "lemma33_scan", "elementary_rank2_subgroups",
    "subgroup_orbits", "q3_exponents", "embed_block", "sl_generators", "transvection",
    "primitive_prime_divisors", "sylow_order_valuation", "group_order_of",
]
