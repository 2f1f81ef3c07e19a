"""Matrices over GF(q): batched numpy kernels and a small value type.

Batched kernels operate on int64 arrays of shape (..., n, n) whose entries
are field-element encodings (see ``endoatlas.ff``).  ``Mat`` wraps a single
matrix for readable construction code; heavy loops should stay batched.

Canonical key: the row-major entry sequence read as base-q digits, most
significant first.  Sorting by key is the canonical total order; it is an
int64 when q**(n*n) fits and a Python int otherwise.
"""

from __future__ import annotations

import numpy as np

from ..ff import FieldSpec

_INT64_LIMIT = 2 ** 62


def identity_array(n):
    return np.eye(n, dtype=np.int64)


def bmatmul(F: FieldSpec, A, B):
    """Batched product A @ B over F with numpy broadcasting on the batch axes."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if F.k == 1:
        return np.matmul(A, B) % F.p0
    n = A.shape[-1]
    acc = F.vmul(A[..., :, 0:1], B[..., 0:1, :])
    for j in range(1, n):
        acc = F.vadd(acc, F.vmul(A[..., :, j:j + 1], B[..., j:j + 1, :]))
    return acc


def binv_det(F: FieldSpec, A):
    """Batched Gauss-Jordan: returns (inverse, det).  Singular inputs get det 0
    and an unspecified inverse."""
    A = np.asarray(A, dtype=np.int64)
    lead = A.shape[:-2]
    n = A.shape[-1]
    A = A.reshape(-1, n, n)
    m = A.shape[0]
    M = np.concatenate([A, np.broadcast_to(identity_array(n), (m, n, n))], axis=2).copy()
    det = np.ones(m, dtype=np.int64)
    singular = np.zeros(m, dtype=bool)
    rows = np.arange(m)
    minus_one = F.minus_one
    for c in range(n):
        nz = M[:, c:, c] != 0
        singular |= ~nz.any(axis=1)
        r = np.argmax(nz, axis=1) + c
        swap = r != c
        if swap.any():
            rc = M[rows, c].copy()
            M[rows, c] = M[rows, r]
            M[rows, r] = rc
            det = np.where(swap, F.vmul(det, np.int64(minus_one)), det)
        piv = M[:, c, c]
        det = F.vmul(det, piv)
        scale = F.vinv(np.where(piv == 0, 1, piv))
        M[:, c] = F.vmul(M[:, c], scale[:, None])
        f = M[:, :, c].copy()
        f[:, c] = 0
        M = F.vsub(M, F.vmul(f[:, :, None], M[:, c][:, None, :]))
    det[singular] = 0
    return M[:, :, n:].reshape(lead + (n, n)), det.reshape(lead)


def bdet(F: FieldSpec, A):
    return binv_det(F, A)[1]


def binv(F: FieldSpec, A):
    inv, det = binv_det(F, A)
    if np.any(det == 0):
        raise ZeroDivisionError("singular matrix in batch inverse")
    return inv


def bpow(F: FieldSpec, A, e):
    """Batched power with a shared non-negative exponent."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[-1]
    result = np.broadcast_to(identity_array(n), A.shape).copy()
    base = A
    while e:
        if e & 1:
            result = bmatmul(F, result, base)
        e >>= 1
        if e:
            base = bmatmul(F, base, base)
    return result


def key_weights(q, n):
    if q ** (n * n) < _INT64_LIMIT:
        return np.array([q ** (n * n - 1 - i) for i in range(n * n)], dtype=np.int64)
    return np.array([q ** (n * n - 1 - i) for i in range(n * n)], dtype=object)


def bkeys(F: FieldSpec, A):
    """Canonical keys of a batch (..., n, n)."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[-1]
    w = key_weights(F.q, n)
    flat = A.reshape(A.shape[:-2] + (n * n,))
    if w.dtype == object:
        return flat.astype(object) @ w
    return flat @ w


def entry_width(q):
    return max(1, ((q - 1).bit_length() + 7) // 8)


def hex_encode(F: FieldSpec, A):
    """Fixed-width big-endian hex of the row-major entries of one matrix."""
    w = entry_width(F.q)
    return b"".join(int(x).to_bytes(w, "big") for x in np.asarray(A).ravel()).hex()


def hex_decode(F: FieldSpec, n, text):
    w = entry_width(F.q)
    raw = bytes.fromhex(text.strip())
    vals = [int.from_bytes(raw[i:i + w], "big") for i in range(0, len(raw), w)]
    if len(vals) != n * n or any(v >= F.q for v in vals):
        raise ValueError("malformed matrix encoding")
    return np.array(vals, dtype=np.int64).reshape(n, n)


class Mat:
    """An n x n matrix over a FieldSpec (immutable value type)."""

    __slots__ = ("field", "a", "_det")

    def __init__(self, field: FieldSpec, a, det=None):
        arr = np.array(a, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= field.q):
            raise ValueError("entries out of range for " + repr(field))
        arr.setflags(write=False)
        self.field = field
        self.a = arr
        self._det = det

    # constructors
    @classmethod
    def identity(cls, field, n):
        return cls(field, identity_array(n), det=1)

    @classmethod
    def diag(cls, field, entries):
        return cls(field, np.diag(np.array(entries, dtype=np.int64)))

    @classmethod
    def scalar(cls, field, n, lam):
        return cls(field, np.eye(n, dtype=np.int64) * int(lam))

    @classmethod
    def block_diag(cls, *blocks):
        field = blocks[0].field
        n = sum(b.n for b in blocks)
        out = np.zeros((n, n), dtype=np.int64)
        i = 0
        for b in blocks:
            if b.field is not field:
                raise ValueError("blocks over different fields")
            out[i:i + b.n, i:i + b.n] = b.a
            i += b.n
        return cls(field, out)

    @property
    def n(self):
        return self.a.shape[0]

    def _check(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        if other.field is not self.field:
            raise ValueError(f"field mismatch {self.field!r} vs {other.field!r}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch {self.n} vs {other.n}")
        return other

    def __matmul__(self, other):
        other = self._check(other)
        return Mat(self.field, bmatmul(self.field, self.a, other.a))

    __mul__ = __matmul__

    def det(self):
        if self._det is None:
            self._det = int(bdet(self.field, self.a))
        return self._det

    def inv(self):
        inv, det = binv_det(self.field, self.a)
        if int(det) == 0:
            raise ZeroDivisionError("singular matrix")
        self._det = int(det)
        return Mat(self.field, inv, det=self.field.inv(int(det)))

    def __pow__(self, e):
        if e < 0:
            return self.inv() ** (-e)
        return Mat(self.field, bpow(self.field, self.a, e))

    def conj(self, g):
        """g x g^-1."""
        return g @ self @ g.inv()

    def commutator(self, y):
        """x y x^-1 y^-1."""
        return self @ y @ self.inv() @ y.inv()

    def is_identity(self):
        return bool(np.array_equal(self.a, identity_array(self.n)))

    def order(self, bound=None):
        """Multiplicative order by repeated multiplication (small orders only)."""
        x, k = self, 1
        bound = bound or self.field.q ** (self.n * self.n)
        while not x.is_identity():
            x = x @ self
            k += 1
            if k > bound:
                raise ValueError("order bound exceeded")
        return k

    def key(self):
        return int(bkeys(self.field, self.a))

    def hex(self):
        return hex_encode(self.field, self.a)

    def __eq__(self, other):
        return (isinstance(other, Mat) and other.field is self.field
                and np.array_equal(self.a, other.a))

    def __lt__(self, other):
        return self.key() < other.key()

    def __hash__(self):
        return hash((self.field.q, self.a.tobytes()))

    def __repr__(self):
        return f"Mat({self.field!r}, {self.a.tolist()})"


def mat_arith(op, x, y=None):
    """Dispatch form: mul, inv, det, pow, conj (conj(x, g) = g x g^-1)."""
    if op == "mul":
        return x @ y
    if op == "inv":
        return x.inv()
    if op == "det":
        return x.det()
    if op == "pow":
        return x ** int(y)
    if op == "conj":
        return x.conj(y)
    raise ValueError(f"unknown matrix op {op!r}")


def stack(mats):
    return np.stack([m.a for m in mats]) if mats else None
