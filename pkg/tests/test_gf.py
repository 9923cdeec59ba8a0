import itertools

import pytest

from oatune.errors import NotPrimePower
from oatune.gf import build_field, find_irreducible, is_prime_power, prime_power

ORDERS = (2, 3, 4, 5, 7, 8, 9)


@pytest.mark.parametrize("h", ORDERS)
def test_field_axioms_exhaustive(h):
    gf = build_field(h)
    els = list(gf.elements)
    assert els == list(range(h))
    for a, b in itertools.product(els, els):
        assert gf.add(a, b) == gf.add(b, a)
        assert gf.mul(a, b) == gf.mul(b, a)
        assert gf.sub(gf.add(a, b), b) == a
    for a, b, c in itertools.product(els, els, els):
        assert gf.add(gf.add(a, b), c) == gf.add(a, gf.add(b, c))
        assert gf.mul(gf.mul(a, b), c) == gf.mul(a, gf.mul(b, c))
        assert gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c))
    for a in els:
        assert gf.add(a, 0) == a
        assert gf.mul(a, 1) == a
        assert gf.mul(a, 0) == 0
        assert gf.add(a, gf.neg(a)) == 0
        if a:
            assert gf.mul(a, gf.inv(a)) == 1


@pytest.mark.parametrize("h", ORDERS)
def test_no_zero_divisors(h):
    gf = build_field(h)
    for a, b in itertools.product(range(1, h), repeat=2):
        assert gf.mul(a, b) != 0


def test_gf3_arithmetic():
    gf = build_field(3)
    assert gf.add(2, 2) == 1
    assert gf.mul(2, 2) == 1


def test_gf4_x_squared_is_x_plus_one():
    # element 2 encodes x, 3 encodes x + 1
    gf = build_field(4)
    assert gf.mul(2, 2) == 3
    assert gf.add(2, 3) == 1


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError):
        build_field(5).inv(0)


@pytest.mark.parametrize("h", [6, 10, 12, 1, 0])
def test_not_prime_power(h):
    with pytest.raises(NotPrimePower):
        build_field(h)


def test_prime_power_decomposition():
    assert prime_power(8) == (2, 3)
    assert prime_power(49) == (7, 2)
    assert is_prime_power(27) and not is_prime_power(36)


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (3, 2), (5, 2), (11, 2), (13, 2)])
def test_find_irreducible_yields_field(p, n):
    poly = find_irreducible(p, n)
    assert len(poly) == n + 1 and poly[-1] == 1
    # an irreducible polynomial has no root in GF(p)
    for x in range(p):
        assert sum(c * x**i for i, c in enumerate(poly)) % p != 0


def test_large_fields_have_inverses():
    for h in (16, 25, 27, 32, 121):
        gf = build_field(h)
        for a in range(1, h):
            assert gf.mul(a, gf.inv(a)) == 1
