"""Finitely generated abelian groups: invariant factors and Smith normal form."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from math import gcd

from ..numtheory import factorint, p_part, p_prime_part


@dataclass(frozen=True)
class AbelianGroupInv:
    """Z^free_rank + Z/d1 + ... + Z/dk with d1 | d2 | ... and every di >= 2."""

    free_rank: int = 0
    torsion: tuple = field(default_factory=tuple)

    def __post_init__(self):
        t = tuple(int(x) for x in self.torsion)
        object.__setattr__(self, "torsion", t)
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        if any(x < 2 for x in t):
            raise ValueError(f"invariant factors must be >= 2: {t}")
        if any(b % a for a, b in zip(t, t[1:])):
            raise ValueError(f"not a divisor chain: {t}")

    @classmethod
    def from_cyclic(cls, orders, free_rank=0):
        """Normal form of a direct sum of cyclic groups of the given orders (0 = Z)."""
        primary = defaultdict(list)
        for m in orders:
            m = int(m)
            if m == 0:
                free_rank += 1
                continue
            if m < 0:
                raise ValueError("negative cyclic order")
            for ell, a in factorint(m):
                primary[ell].append(a)
        return cls.from_primary(primary, free_rank)

    @classmethod
    def from_primary(cls, primary, free_rank=0):
        """primary maps a prime to the exponents of its cyclic factors."""
        length = max((len(v) for v in primary.values()), default=0)
        factors = [1] * length
        for ell, exps in primary.items():
            for i, a in enumerate(sorted(exps, reverse=True)):
                factors[length - 1 - i] *= ell ** a
        return cls(free_rank, tuple(x for x in factors if x > 1))

    @property
    def order(self):
        """Order of the torsion part."""
        out = 1
        for x in self.torsion:
            out *= x
        return out

    @property
    def exponent(self):
        return self.torsion[-1] if self.torsion else 1

    def is_trivial(self):
        return self.free_rank == 0 and not self.torsion

    def p_prime_part(self, p):
        return AbelianGroupInv.from_cyclic([p_prime_part(x, p) for x in self.torsion], self.free_rank)

    def p_part(self, p):
        return AbelianGroupInv.from_cyclic([p_part(x, p) for x in self.torsion], self.free_rank)

    def __add__(self, other):
        return AbelianGroupInv.from_cyclic(self.torsion + other.torsion,
                                           self.free_rank + other.free_rank)

    def to_json(self):
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}

    def __str__(self):
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts += [f"Z/{x}" for x in self.torsion]
        return " + ".join(parts) if parts else "0"


TRIVIAL = AbelianGroupInv()


def invariants_from_orders(orders):
    """Invariant factors of a finite abelian group from the list of all its element orders.

    For each prime l, |G_l[l^j]| = #{x : v_l(ord x) <= j} * |G_l| / |G|, and the
    number of cyclic l-factors of order >= l^j is log_l of the jump at j.
    """
    orders = [int(o) for o in orders]
    size = len(orders)
    primary = {}
    for ell, a in factorint(size):
        vals = [0] * (a + 1)
        for o in orders:
            v = 0
            while o % ell == 0:
                o //= ell
                v += 1
            vals[v] += 1
        cum, logs = 0, []
        for j in range(a + 1):
            cum += vals[j]
            m = cum * ell ** a // size
            logs.append(_int_log(m, ell))
        exps = []
        for j in range(1, a + 1):
            exps += [j] * ((logs[j] - logs[j - 1]) - (logs[j + 1] - logs[j] if j < a else 0))
        primary[ell] = exps
    inv = AbelianGroupInv.from_primary(primary)
    if inv.order != size:
        raise ValueError("element orders are not those of an abelian group")
    return inv


def _int_log(m, ell):
    k = 0
    while m > 1:
        if m % ell:
            raise ValueError("element orders are not those of an abelian group")
        m //= ell
        k += 1
    return k


# -- Smith normal form ------------------------------------------------------

def _eliminate_unit_pivots(rows, ncols):
    """Sparse elimination with +-1 pivots.

    rows: list of dict col -> nonzero int.  Each pivot removes one row and one
    column and contributes an invariant factor 1.  Returns (remaining rows,
    remaining column ids, number of pivots).
    """
    rows = [dict(r) for r in rows if r]
    col_rows = defaultdict(set)
    for i, r in enumerate(rows):
        for c in r:
            col_rows[c].add(i)
    alive_rows = set(range(len(rows)))
    alive_cols = set(range(ncols))
    pivots = 0
    queue = sorted(alive_rows)
    while queue:
        i = queue.pop()
        if i not in alive_rows:
            continue
        r = rows[i]
        if not r:
            alive_rows.discard(i)
            continue
        c = next((c for c in sorted(r) if abs(r[c]) == 1), None)
        if c is None:
            continue
        sign = r[c]
        for j in sorted(col_rows[c] - {i}):
            rj = rows[j]
            f = rj[c] * sign
            for cc, v in r.items():
                nv = rj.get(cc, 0) - f * v
                if nv:
                    rj[cc] = nv
                    col_rows[cc].add(j)
                else:
                    rj.pop(cc, None)
                    col_rows[cc].discard(j)
            queue.append(j)
        for cc in r:
            col_rows[cc].discard(i)
        rows[i] = {}
        alive_rows.discard(i)
        alive_cols.discard(c)
        pivots += 1
    rest = [rows[i] for i in sorted(alive_rows) if rows[i]]
    return rest, sorted(alive_cols), pivots


def _row_hermite(M):
    """Row-reduce (in place semantics, returns new list) by gcd steps to echelon form."""
    M = [list(r) for r in M if any(r)]
    if not M:
        return []
    ncols = len(M[0])
    out = []
    for c in range(ncols):
        idx = [i for i, r in enumerate(M) if r[c]]
        if not idx:
            continue
        # gcd-combine all rows with nonzero column c into one pivot row
        piv = M[idx[0]]
        others = []
        for i in idx[1:]:
            r = M[i]
            a, b = piv[c], r[c]
            g, x, y = _xgcd(a, b)
            new_piv = [x * u + y * v for u, v in zip(piv, r)]
            new_r = [(b // g) * u - (a // g) * v for u, v in zip(piv, r)]
            piv = new_piv
            others.append(new_r)
        rest = [M[i] for i in range(len(M)) if i not in set(idx)]
        out.append(piv)
        M = [r for r in rest + others if any(r)]
    return out + M


def _xgcd(a, b):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        qt, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - qt * x1
        y0, y1 = y1, y0 - qt * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def smith_diagonal_dense(M):
    """Nonzero diagonal of the Smith normal form of an integer matrix (list of rows)."""
    A = [list(map(int, r)) for r in M if any(r)]
    if not A:
        return []
    A = _row_hermite(A)
    m, n = len(A), len(A[0])
    diag = []
    t = 0
    while t < min(m, n):
        nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not nz:
            break
        _, i, j = min(nz)
        A[t], A[i] = A[i], A[t]
        for r in A:
            r[t], r[j] = r[j], r[t]
        while True:
            done = True
            piv = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    qt = A[i][t] // piv
                    A[i] = [x - qt * y for x, y in zip(A[i], A[t])]
                    if A[i][t]:
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    qt = A[t][j] // piv
                    for r in A:
                        r[j] -= qt * r[t]
                    if A[t][j]:
                        done = False
            if done:
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if A[i][j] % piv), None)
                if bad is None:
                    break
                A[t] = [x + y for x, y in zip(A[t], A[bad[0]])]
                continue
            nz = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n)
                  if A[i][j] and (i == t or j == t)]
            _, i, j = min(nz)
            A[t], A[i] = A[i], A[t]
            for r in A:
                r[t], r[j] = r[j], r[t]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def presentation_invariants(rows, ncols):
    """Z^ncols modulo the row span.  rows are dicts col -> coefficient or dense lists."""
    sparse = [r if isinstance(r, dict) else {c: int(v) for c, v in enumerate(r) if v} for r in rows]
    rest, cols, pivots = _eliminate_unit_pivots(sparse, ncols)
    pos = {c: k for k, c in enumerate(cols)}
    dense = []
    for r in rest:
        row = [0] * len(cols)
        for c, v in r.items():
            row[pos[c]] = v
        dense.append(row)
    diag = smith_diagonal_dense(dense) if cols else []
    rank = pivots + len(diag)
    return AbelianGroupInv.from_cyclic([d for d in diag if d != 1], ncols - rank)


def gcd_list(xs):
    g = 0
    for x in xs:
        g = gcd(g, x)
    return g
