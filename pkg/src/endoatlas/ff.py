"""Exact arithmetic in GF(q), q = p0**k.

Elements are encoded as integers: the coefficient vector (c_0, ..., c_{k-1})
of the residue class c_0 + c_1 x + ... in GF(p0)[x]/(modulus) is stored as
sum(c_i * p0**i).  This integer order is the canonical "repr order" used for
deterministic choices (primitive elements, matrix keys).

For q <= 2**16 exp/log/Zech tables are built at construction, which gives
O(1) scalar ops and makes the numpy array kernels (``vadd``, ``vmul`` ...)
available.  Larger extension fields fall back to polynomial arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import FieldMismatchError
from .numtheory import factorint, is_prime, prime_power

TABLE_LIMIT = 2 ** 16
SMALL_TABLE_LIMIT = 256  # full q x q add/mul tables below this size
MAX_DEGREE = 20


# -- polynomials over GF(p) as coefficient lists, low degree first ----------

def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, f, p):
    a = list(a)
    df = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(_ptrim(a)) - 1 >= df:
        c = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - df
        for i, fi in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fi) % p
    return a


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _ptrim(out)


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _ptrim(_pmod(a, b, p))
    return a


def _ppow_x_mod(e, f, p):
    """x**e mod f."""
    result, base = [1], [0, 1]
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), f, p)
        base = _pmod(_pmul(base, base, p), f, p)
        e >>= 1
    return result


def is_irreducible(f, p):
    """Ben-Or test for a monic polynomial f (low-first list) over GF(p)."""
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    for i in range(1, k // 2 + 1):
        h = _ppow_x_mod(p ** i, f, p)
        h = h + [0] * max(0, 2 - len(h))
        h[1] = (h[1] - 1) % p
        if len(_pgcd(f, _ptrim(h), p)) > 1:
            return False
    return True


def least_irreducible(p, k):
    """Lexicographically least monic irreducible of degree k over GF(p).

    Candidates x**k + c_{k-1} x**(k-1) + ... + c_0 are ordered by the integer
    sum(c_i p**i), i.e. lexicographically on (c_{k-1}, ..., c_0).
    """
    for c in range(p ** k):
        f = [(c // p ** i) % p for i in range(k)] + [1]
        if is_irreducible(f, p):
            return tuple(f)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


# -- fields -----------------------------------------------------------------

class FieldSpec:
    """GF(p0**k) with a fixed modulus.  Immutable once built."""

    def __init__(self, p0, k, modulus):
        self.p0 = p0
        self.k = k
        self.q = p0 ** k
        self.modulus = tuple(modulus)
        self._weights = [p0 ** i for i in range(k)]
        self.has_tables = self.q <= TABLE_LIMIT
        if self.k == 1:
            self.prim = self._first_primitive()
            self._inv_tab = np.array([0] + [pow(a, p0 - 2, p0) for a in range(1, p0)],
                                     dtype=np.int64) if self.has_tables else None
        else:
            self.prim = self._first_primitive()
            if self.has_tables:
                self._build_tables()

    # encoding
    def digits(self, a):
        return [(a // w) % self.p0 for w in self._weights]

    def from_digits(self, d):
        return sum((c % self.p0) * w for c, w in zip(d, self._weights))

    def __repr__(self):
        return f"GF({self.q})"

    def __reduce__(self):
        return (field_create, (self.p0, self.k))

    # tables
    def _build_tables(self):
        p, k, q = self.p0, self.k, self.q
        elems = np.arange(q, dtype=np.int64)
        D = np.stack([(elems // w) % p for w in self._weights], axis=1)
        gd = np.array(self.digits(self.prim), dtype=np.int64)
        R = np.zeros((q, 2 * k - 1), dtype=np.int64)
        for j in range(k):
            R[:, j:j + k] += D * gd[j]
        R %= p
        f = np.array(self.modulus, dtype=np.int64)
        for deg in range(2 * k - 2, k - 1, -1):
            c = R[:, deg].copy()
            R[:, deg - k:deg] -= c[:, None] * f[:k]
            R[:, deg] = 0
            R %= p
        times_g = R[:, :k] @ np.array(self._weights, dtype=np.int64)
        exp = np.empty(q - 1, dtype=np.int64)
        exp[0] = 1
        tg = times_g.tolist()
        x = 1
        for i in range(1, q - 1):
            x = tg[x]
            exp[i] = x
        log = np.full(q, -1, dtype=np.int64)
        log[exp] = np.arange(q - 1, dtype=np.int64)
        d0 = exp % p
        plus_one = exp - d0 + (d0 + 1) % p
        zech = np.where(plus_one == 0, -1, log[plus_one])
        self._exp, self._log, self._zech = exp, log, zech
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = exp[(-log[1:]) % (q - 1)]
        self._inv_tab = inv
        self._add_tab = self._mul_tab = None
        if q <= SMALL_TABLE_LIMIT:
            a, b = np.meshgrid(elems, elems, indexing="ij")
            self._mul_tab = self._vmul_log(a, b)
            if p != 2:
                self._add_tab = self._vadd_zech(a, b)

    def _first_primitive(self):
        if self.q == 2:
            return 1
        for a in range(1, self.q):
            if self._order_poly(a) == self.q - 1:
                return a
        raise AssertionError("no primitive element")  # pragma: no cover

    def _order_poly(self, a):
        n = self.q - 1
        order = n
        for ell, _ in factorint(n):
            while order % ell == 0 and self._pow_poly(a, order // ell) == 1:
                order //= ell
        return order

    # scalar arithmetic on encoded ints
    def _mul_poly(self, a, b):
        if self.k == 1:
            return (a * b) % self.p0
        prod = _pmul(_ptrim(self.digits(a)), _ptrim(self.digits(b)), self.p0)
        return self.from_digits(_pmod(prod, self.modulus, self.p0) + [0] * self.k)

    def _pow_poly(self, a, e):
        result = 1
        while e:
            if e & 1:
                result = self._mul_poly(result, a)
            a = self._mul_poly(a, a)
            e >>= 1
        return result

    def add(self, a, b):
        if self.k == 1:
            return (a + b) % self.p0
        if self.p0 == 2:
            return a ^ b
        return self.from_digits([x + y for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a):
        if self.k == 1:
            return (-a) % self.p0
        if self.p0 == 2:
            return a
        return self.from_digits([-x for x in self.digits(a)])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.k > 1 and self.has_tables:
            if a == 0 or b == 0:
                return 0
            return int(self._exp[(self._log[a] + self._log[b]) % (self.q - 1)])
        return self._mul_poly(a, b)

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in " + repr(self))
        if self.has_tables:
            return int(self._inv_tab[a])
        return self._pow_poly(a, self.q - 2)

    def pow(self, a, e):
        if e < 0:
            a, e = self.inv(a), -e
        if a == 0:
            return 1 if e == 0 else 0
        if self.k > 1 and self.has_tables:
            return int(self._exp[(int(self._log[a]) * e) % (self.q - 1)])
        if self.k == 1:
            return pow(a, e, self.p0)
        return self._pow_poly(a, e % (self.q - 1))

    def log(self, a):
        """Discrete log to base ``prim``."""
        if a == 0:
            raise ValueError("log of zero")
        if self.k > 1 and self.has_tables:
            return int(self._log[a])
        x, i = 1, 0
        while x != a:
            x = self.mul(x, self.prim)
            i += 1
        return i

    def order(self, a):
        if a == 0:
            raise ValueError("multiplicative order of zero")
        n = self.q - 1
        order = n
        for ell, _ in factorint(n):
            while order % ell == 0 and self.pow(a, order // ell) == 1:
                order //= ell
        return order

    @property
    def minus_one(self):
        return self.neg(1)

    # vectorised kernels on int64 arrays
    def vadd(self, a, b):
        if self.k == 1:
            return (a + b) % self.p0
        if self.p0 == 2:
            return np.bitwise_xor(a, b)
        self._need_tables()
        if self._add_tab is not None:
            return self._add_tab[a, b]
        return self._vadd_zech(a, b)

    def _vadd_zech(self, a, b):
        a, b = np.broadcast_arrays(a, b)
        la, lb = self._log[a], self._log[b]
        z = self._zech[(lb - la) % (self.q - 1)]
        s = np.where(z < 0, 0, self._exp[(la + np.maximum(z, 0)) % (self.q - 1)])
        return np.where(a == 0, b, np.where(b == 0, a, s))

    def vneg(self, a):
        if self.k == 1:
            return (-a) % self.p0
        if self.p0 == 2:
            return a
        return self.vmul(a, np.int64(self.minus_one))

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    def vmul(self, a, b):
        if self.k == 1:
            return (a * b) % self.p0
        self._need_tables()
        if self._mul_tab is not None:
            return self._mul_tab[a, b]
        return self._vmul_log(a, b)

    def _vmul_log(self, a, b):
        a, b = np.broadcast_arrays(a, b)
        s = self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, s)

    def vinv(self, a):
        """Elementwise inverse; zero maps to zero (callers check)."""
        if self._inv_tab is None:
            return np.vectorize(lambda x: self.inv(int(x)) if x else 0, otypes=[np.int64])(a)
        return self._inv_tab[a]

    def vsum(self, a, axis):
        """Field sum along an axis."""
        if self.k == 1:
            return a.sum(axis=axis) % self.p0
        if self.p0 == 2:
            return np.bitwise_xor.reduce(a, axis=axis)
        a = np.moveaxis(a, axis, 0)
        out = a[0]
        for i in range(1, a.shape[0]):
            out = self.vadd(out, a[i])
        return out

    def _need_tables(self):
        if not self.has_tables:
            raise NotImplementedError(f"array arithmetic needs tables; {self!r} is too large")

    # element construction
    def __call__(self, value):
        if isinstance(value, FieldElem):
            if value.owner is not self:
                raise FieldMismatchError(f"{value!r} is not in {self!r}")
            return value
        if not 0 <= value < self.q:
            raise ValueError(f"{value} is not an element encoding of {self!r}")
        return FieldElem(self, int(value))

    def elements(self):
        return [FieldElem(self, a) for a in range(self.q)]


@dataclass(frozen=True)
class FieldElem:
    owner: FieldSpec
    value: int

    def _other(self, b):
        if isinstance(b, FieldElem):
            if b.owner is not self.owner:
                raise FieldMismatchError(f"mixed fields {self.owner!r} and {b.owner!r}")
            return b.value
        # plain ints act as prime-field scalars
        return int(b) % self.owner.p0

    def __add__(self, b):
        return FieldElem(self.owner, self.owner.add(self.value, self._other(b)))

    __radd__ = __add__

    def __sub__(self, b):
        return FieldElem(self.owner, self.owner.sub(self.value, self._other(b)))

    def __neg__(self):
        return FieldElem(self.owner, self.owner.neg(self.value))

    def __mul__(self, b):
        return FieldElem(self.owner, self.owner.mul(self.value, self._other(b)))

    __rmul__ = __mul__

    def inverse(self):
        return FieldElem(self.owner, self.owner.inv(self.value))

    def __truediv__(self, b):
        return self * FieldElem(self.owner, self._other(b)).inverse()

    def __pow__(self, e):
        return FieldElem(self.owner, self.owner.pow(self.value, e))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.owner!r}[{self.value}]"


@lru_cache(maxsize=None)
def field_create(p0, k=1):
    """GF(p0**k) with the lexicographically least irreducible modulus."""
    if not is_prime(p0):
        raise ValueError(f"characteristic {p0} is not prime")
    if not 1 <= k <= MAX_DEGREE:
        raise ValueError(f"extension degree {k} out of range 1..{MAX_DEGREE}")
    return FieldSpec(p0, k, least_irreducible(p0, k))


def field_from_q(q):
    p0, k = prime_power(q)
    return field_create(p0, k)


def field_arith(op, a, b=None):
    """Dispatch form of the scalar operations: add, mul, inv, pow, neg, sub."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown field op {op!r}")


def multiplicative_order(a):
    return a.owner.order(a.value)


def primitive_element(F):
    return FieldElem(F, F.prim)


# -- GF(q) inside GF(q^e) ---------------------------------------------------

def _solve_mod_p(M, p):
    """Inverse of a square matrix (list of rows) over GF(p)."""
    n = len(M)
    A = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(M)]
    for c in range(n):
        r = next(r for r in range(c, n) if A[r][c] % p)
        A[c], A[r] = A[r], A[c]
        inv = pow(A[c][c], p - 2, p)
        A[c] = [(x * inv) % p for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [(x - f * y) % p for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


class Extension:
    """GF(q^e) as an e-dimensional GF(q)-space with basis 1, a, ..., a^(e-1).

    ``a`` is the primitive element of the big field.  The embedding of GF(q)
    sends the class of x to the least root (in repr order) of GF(q)'s modulus.
    """

    def __init__(self, base, e):
        self.base = base
        self.e = e
        self.big = field_create(base.p0, base.k * e)
        big = self.big
        if base.k == 1:
            self.embed = list(range(base.q))
        else:
            beta = next(b for b in range(big.q) if self._eval_in_big(base.modulus, b) == 0)
            powers = [big.pow(beta, i) for i in range(base.k)]
            self.embed = []
            for a in range(base.q):
                acc = 0
                for c, pw in zip(base.digits(a), powers):
                    acc = big.add(acc, big.mul(c, pw))
                self.embed.append(acc)
        self.restrict = {img: a for a, img in enumerate(self.embed)}
        self.alpha = big.prim
        # GF(p0)-basis of the big field: embed(x^a) * alpha^i, coordinate (i, a)
        cols = []
        self._basis_index = []
        for i in range(e):
            ai = big.pow(self.alpha, i)
            for a in range(base.k):
                cols.append(big.digits(big.mul(self.embed[base.p0 ** a], ai)))
                self._basis_index.append((i, a))
        M = [[cols[j][r] for j in range(len(cols))] for r in range(len(cols))]
        self._inv = _solve_mod_p(M, base.p0)

    def _eval_in_big(self, poly, b):
        acc = 0
        for c in reversed(poly):
            acc = self.big.add(self.big.mul(acc, b), c)
        return acc

    def coords(self, y):
        """Coordinates of big-field element y over GF(q) in the alpha-power basis."""
        d = self.big.digits(y)
        p = self.base.p0
        sol = [sum(r * x for r, x in zip(row, d)) % p for row in self._inv]
        out = [[0] * self.base.k for _ in range(self.e)]
        for (i, a), c in zip(self._basis_index, sol):
            out[i][a] = c
        return [self.base.from_digits(cs) for cs in out]

    def to_base(self, y):
        """Inverse of the embedding; y must lie in the image of GF(q)."""
        try:
            return self.restrict[y]
        except KeyError:
            raise ValueError(f"{y} is not in the image of {self.base!r}") from None


@lru_cache(maxsize=None)
def extension(base, e):
    return Extension(base, e)
