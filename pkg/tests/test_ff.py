import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from endoatlas.ff import (
    field_arith, field_create, field_from_q, least_irreducible, multiplicative_order,
    primitive_element,
)
from endoatlas.errors import FieldMismatchError
from endoatlas.numtheory import factorint

PRIME_POWERS = [q for q in range(2, 257) if len(factorint(q)) == 1]


def _has_root(coeffs, p):
    return any(sum(c * x ** i for i, c in enumerate(coeffs)) % p == 0 for x in range(p))


def test_prime_field_and_gf4():
    assert field_create(2, 1).q == 2
    assert field_create(2, 2).modulus == (1, 1, 1)


def test_gf25_modulus_is_least_irreducible_quadratic():
    # oracle: scan monic quadratics x^2 + c1 x + c0 in lexicographic order of (c1, c0);
    # no root over GF(5) means irreducible for degree 2
    want = next((c0, c1, 1) for c1 in range(5) for c0 in range(5) if not _has_root((c0, c1, 1), 5))
    assert field_create(5, 2).modulus == want


def test_field_create_deterministic():
    assert least_irreducible(3, 4) == least_irreducible(3, 4) == field_create(3, 4).modulus


def test_small_arithmetic():
    F4 = field_create(2, 2)
    x = F4(2)
    assert int(field_arith("mul", x, x)) == 3  # x^2 = x + 1
    F5 = field_create(5)
    assert int(field_arith("inv", F5(2))) == 3
    F25 = field_create(5, 2)
    assert all(int(g ** 24) == 1 for g in F25.elements()[1:])


def test_orders():
    assert multiplicative_order(field_create(2, 2)(2)) == 3
    assert multiplicative_order(field_create(7)(2)) == 3
    g = primitive_element(field_create(5, 2))
    assert int(g ** 24) == 1 and int(g ** 12) != 1 and int(g ** 8) != 1


@pytest.mark.parametrize("q", PRIME_POWERS)
def test_orders_divide_group_order(q):
    F = field_from_q(q)
    for a in range(1, q):
        assert (q - 1) % F.order(a) == 0
    assert F.order(F.prim) == q - 1


@pytest.mark.parametrize("q", [q for q in PRIME_POWERS if q <= 25])
def test_ring_axioms_exhaustive(q):
    F = field_from_q(q)
    a, b, c = (np.array(t) for t in zip(*itertools.product(range(q), repeat=3)))
    assert np.array_equal(F.vmul(a, F.vadd(b, c)), F.vadd(F.vmul(a, b), F.vmul(a, c)))
    assert np.array_equal(F.vmul(F.vmul(a, b), c), F.vmul(a, F.vmul(b, c)))
    assert np.array_equal(F.vadd(F.vadd(a, b), c), F.vadd(a, F.vadd(b, c)))


@given(st.sampled_from([2 ** 17, 3 ** 11, 7 ** 6]), st.data())
def test_polynomial_fallback_field(q, data):
    F = field_from_q(q)
    assert not F.has_tables
    a = data.draw(st.integers(1, q - 1))
    b = data.draw(st.integers(0, q - 1))
    x, y = F(a), F(b)
    assert int(x * x.inverse()) == 1
    assert int((x + y) * x) == int(x * x + y * x)
    assert int(x ** (q - 1)) == 1


@given(st.sampled_from([4, 8, 9, 16, 27, 49, 64, 81, 125, 243, 256]), st.data())
def test_vectorized_matches_scalar(q, data):
    F = field_from_q(q)
    xs = data.draw(st.lists(st.integers(0, q - 1), min_size=1, max_size=20))
    ys = data.draw(st.lists(st.integers(0, q - 1), min_size=len(xs), max_size=len(xs)))
    a, b = np.array(xs), np.array(ys)
    assert F.vmul(a, b).tolist() == [F.mul(x, y) for x, y in zip(xs, ys)]
    assert F.vadd(a, b).tolist() == [F.add(x, y) for x, y in zip(xs, ys)]
    assert F.vsub(a, b).tolist() == [F.sub(x, y) for x, y in zip(xs, ys)]


def test_mixed_fields_rejected():
    with pytest.raises(FieldMismatchError):
        field_create(2, 2)(1) + field_create(2, 3)(1)


def test_bad_characteristic():
    with pytest.raises(ValueError):
        field_create(4, 1)
