"""Finite-field arithmetic over GF(h) for prime powers h = p**n.

Elements are the integers ``0 .. h-1``.  An element's base-``p`` digits are
the coefficients of its polynomial representative, lowest degree first, so
for GF(4) the integer 2 is ``x`` and 3 is ``x + 1``.

Extension fields are reduced modulo a fixed irreducible polynomial.  These
are frozen because every orthogonal array built on top of them depends on
the choice:

======  ===========================
order   modulus
======  ===========================
4       x^2 + x + 1
8       x^3 + x + 1
9       x^2 + 2x + 2
16      x^4 + x + 1
25      x^2 + 4x + 2
27      x^3 + 2x + 1
32      x^5 + x^2 + 1
49      x^2 + 6x + 3
64      x^6 + x^4 + x^3 + x + 1
81      x^4 + 2x^3 + 2
======  ===========================

Any other prime power uses the lexicographically smallest monic irreducible
polynomial of the right degree (coefficients compared from the constant term
upwards), which is equally deterministic.
"""
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import NotPrimePower

# coefficients lowest degree first, leading 1 included
IRREDUCIBLE_POLYNOMIALS = {
    4: (1, 1, 1),
    8: (1, 1, 0, 1),
    9: (2, 2, 1),
    16: (1, 1, 0, 0, 1),
    25: (2, 4, 1),
    27: (1, 2, 0, 1),
    32: (1, 0, 1, 0, 0, 1),
    49: (3, 6, 1),
    64: (1, 1, 0, 1, 1, 0, 1),
    81: (2, 0, 0, 2, 1),
}


def prime_power(h):
    """Return ``(p, n)`` with ``h == p**n`` and ``p`` prime, else ``None``."""
    if h < 2:
        return None
    p = 2
    while p * p <= h:
        if h % p == 0:
            break
        p += 1
    else:
        return h, 1
    n = 0
    while h % p == 0:
        h //= p
        n += 1
    return (p, n) if h == 1 else None


def is_prime_power(h):
    return prime_power(h) is not None


def _poly_mod(a, m, p):
    """Remainder of ``a`` modulo monic ``m`` over GF(p); lists low->high."""
    a = list(a)
    dm = len(m) - 1
    for shift in range(len(a) - 1 - dm, -1, -1):
        c = a[shift + dm] % p
        if c:
            for i, mc in enumerate(m):
                a[shift + i] = (a[shift + i] - c * mc) % p
    a = [c % p for c in a[:dm]] if len(a) > dm else [c % p for c in a]
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _is_irreducible(poly, p):
    degree = len(poly) - 1
    for d in range(1, degree // 2 + 1):
        for low in product(range(p), repeat=d):
            divisor = list(low) + [1]
            if _poly_mod(poly, divisor, p) == [0]:
                return False
    return True


def find_irreducible(p, n):
    """Smallest monic irreducible polynomial of degree ``n`` over GF(p)."""
    for low in product(range(p), repeat=n):
        # product() varies the last slot fastest; reverse so the constant
        # term is the least significant position in the ordering
        poly = tuple(reversed(low)) + (1,)
        if poly[0] != 0 and _is_irreducible(poly, p):
            return poly
    raise AssertionError(f"no irreducible polynomial of degree {n} over GF({p})")


class GaloisField:
    """Arithmetic context for GF(h), backed by full operation tables."""

    def __init__(self, order):
        pn = prime_power(order)
        if pn is None:
            raise NotPrimePower(f"{order} is not a prime power")
        self.order = order
        self.characteristic, self.degree = pn
        p, n = pn
        if n == 1:
            self.modulus = None
            elems = np.arange(order)
            self.add_table = (elems[:, None] + elems[None, :]) % p
            self.mul_table = (elems[:, None] * elems[None, :]) % p
        else:
            self.modulus = IRREDUCIBLE_POLYNOMIALS.get(order) or find_irreducible(p, n)
            digits = [self._digits(a) for a in range(order)]
            self.add_table = np.empty((order, order), dtype=np.int64)
            self.mul_table = np.empty((order, order), dtype=np.int64)
            for a in range(order):
                for b in range(order):
                    da, db = digits[a], digits[b]
                    self.add_table[a, b] = self._encode([(x + y) % p for x, y in zip(da, db)])
                    prod = [0] * (2 * n - 1)
                    for i, x in enumerate(da):
                        if x:
                            for j, y in enumerate(db):
                                prod[i + j] += x * y
                    self.mul_table[a, b] = self._encode(_poly_mod(prod, self.modulus, p))
        self.add_table.setflags(write=False)
        self.mul_table.setflags(write=False)
        zero_cols = np.argmax(self.add_table == 0, axis=1)
        self._neg = tuple(int(x) for x in zero_cols)
        inv = [0] * order
        for a in range(1, order):
            inv[a] = int(np.argmax(self.mul_table[a] == 1))
        self._inv = tuple(inv)

    def _digits(self, a):
        p = self.characteristic
        out = []
        for _ in range(self.degree):
            a, r = divmod(a, p)
            out.append(r)
        return out

    def _encode(self, coeffs):
        value = 0
        for c in reversed(coeffs):
            value = value * self.characteristic + c
        return value

    @property
    def elements(self):
        return range(self.order)

    def add(self, a, b):
        return int(self.add_table[a, b])

    def sub(self, a, b):
        return int(self.add_table[a, self._neg[b]])

    def neg(self, a):
        return self._neg[a]

    def mul(self, a, b):
        return int(self.mul_table[a, b])

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        return self._inv[a]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def dot(self, u, v):
        """Inner product of two equal-length element sequences."""
        acc = 0
        for x, y in zip(u, v):
            acc = self.add_table[acc, self.mul_table[x, y]]
        return int(acc)

    def __repr__(self):
        return f"GaloisField({self.order})"


@lru_cache(maxsize=None)
def build_field(h):
    """Return the (cached) arithmetic context for GF(h).

    Raises :class:`~oatune.errors.NotPrimePower` when ``h`` has two distinct
    prime divisors.
    """
    return GaloisField(h)
