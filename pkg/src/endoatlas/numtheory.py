"""Small integer helpers: factorisation, valuations, multiplicative orders."""

from functools import lru_cache
from math import gcd


@lru_cache(maxsize=None)
def factorint(n):
    """Prime factorisation by trial division, as a tuple of (prime, exponent)."""
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return tuple(out)


def primes_dividing(n):
    return [p for p, _ in factorint(n)]


def is_prime(n):
    return n >= 2 and factorint(n) == ((n, 1),)


def prime_power(q):
    """Return (p, k) with q = p**k, or raise ValueError."""
    f = factorint(q) if q >= 2 else ()
    if len(f) != 1:
        raise ValueError(f"{q} is not a prime power")
    return f[0]


def valuation(n, p):
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def p_part(n, p):
    return p ** valuation(n, p)


def p_prime_part(n, p):
    return n // p_part(n, p)


def mult_order(a, m):
    """Multiplicative order of a modulo m (gcd(a, m) must be 1)."""
    if gcd(a, m) != 1:
        raise ValueError(f"{a} is not a unit mod {m}")
    if m == 1:
        return 1
    order = 1
    x = a % m
    while x != 1:
        x = (x * a) % m
        order += 1
    return order


def factorial_valuation(r, p):
    """v_p(r!) by Legendre's formula."""
    v, pk = 0, p
    while pk <= r:
        v += r // pk
        pk *= p
    return v
