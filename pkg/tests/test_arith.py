import math
import random
from fractions import Fraction

import pytest
import sympy

from preimdyn.arith import (
    INF,
    PrimeSet,
    QuadTower,
    denominator_primes,
    factorize,
    format_point,
    is_s_integral,
    is_s_unit,
    padic_ord,
    parse_rational,
    rational_sqrt,
    s_of,
    scalar_is_square,
    weil_height,
)
from preimdyn.errors import InvalidPrime


@pytest.mark.parametrize("x,p,want", [(Fraction(3, 4), 2, -2), (18, 3, 2), (Fraction(7, 5), 5, -1), (7, 2, 0)])
def test_padic_ord(x, p, want):
    assert padic_ord(x, p) == want


def test_padic_ord_zero_is_infinite_and_not_an_int():
    v = padic_ord(0, 5)
    assert v == math.inf and not isinstance(v, int)


def test_padic_ord_rejects_composite():
    with pytest.raises(InvalidPrime):
        padic_ord(3, 4)


@pytest.mark.parametrize("x,want", [(Fraction(3, 4), (2,)), (5, ()), (Fraction(7, 6), (2, 3))])
def test_denominator_primes(x, want):
    assert denominator_primes(x).primes == want
    assert s_of(x) == len(want)


def test_weil_height_examples():
    assert weil_height(2) == pytest.approx(math.log(2))
    assert weil_height(INF) == 0
    assert weil_height(Fraction(3, 5)) == pytest.approx(math.log(5))


def test_s_units():
    S = PrimeSet.of([2, 3])
    assert is_s_unit(Fraction(3, 2), S)
    assert not is_s_unit(5, S)
    assert not is_s_unit(0, S)
    assert is_s_integral(Fraction(5, 12), S) and not is_s_integral(Fraction(1, 5), S)


def test_prime_set_is_sorted_and_validated():
    assert PrimeSet.of([5, 2, 5, 3]).primes == (2, 3, 5)
    with pytest.raises(InvalidPrime):
        PrimeSet.of([6])


def _rand_rational(rng):
    return Fraction(rng.choice((-1, 1)) * rng.randint(1, 10**6), rng.randint(1, 10**6))


def test_valuations_recover_log_abs():
    rng = random.Random(1)
    for _ in range(200):
        x = _rand_rational(rng)
        primes = set(sympy.factorint(abs(x.numerator))) | set(sympy.factorint(x.denominator))
        total = sum(padic_ord(x, p) * math.log(p) for p in primes)
        assert total == pytest.approx(math.log(abs(x.numerator)) - math.log(x.denominator))


def test_height_product_formula():
    rng = random.Random(2)
    for _ in range(1000):
        x = _rand_rational(rng)
        primes = set(sympy.factorint(x.denominator))
        local = sum(max(0, -padic_ord(x, p)) * math.log(p) for p in primes) + max(0.0, math.log(abs(x)))
        assert weil_height(x) == pytest.approx(local, rel=1e-12, abs=1e-12)


def test_factorize_matches_sympy():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(2, 10**9)
        assert factorize(n) == sympy.factorint(n)


def test_rational_sqrt():
    assert rational_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert rational_sqrt(2) is None
    assert rational_sqrt(-4) is None


def test_scalar_square_examples():
    Q = QuadTower.rationals()
    assert scalar_is_square(Q.coerce(4)) == Q.coerce(2)
    assert scalar_is_square(Q.coerce(2)) is None
    K = Q.adjoin(2)
    r2 = scalar_is_square(K.coerce(2))
    x = K.coerce(3) + 2 * r2
    r = scalar_is_square(x)
    assert r is not None and r * r == x
    assert r in (1 + r2, -1 - r2)


def test_adjoin_rejects_squares():
    with pytest.raises(ValueError):
        QuadTower.rationals().adjoin(9)


def test_nonsquare_has_no_small_root():
    rng = random.Random(4)
    K = QuadTower.rationals().adjoin(2).adjoin(3)
    s2, s3 = scalar_is_square(K.coerce(2)), scalar_is_square(K.coerce(3))
    basis = [K.coerce(1), s2, s3, s2 * s3]

    def rand():
        return sum((rng.randint(-3, 3) * b for b in basis), K.coerce(0))

    x = K.coerce(5) + s2
    assert scalar_is_square(x) is None
    for _ in range(50):
        s = rand()
        assert s * s != x
    for _ in range(30):
        s = rand()
        r = scalar_is_square(s * s)
        assert r is not None and r * r == s * s


def test_tower_arithmetic_closed():
    K = QuadTower.rationals().adjoin(-1).adjoin(5)
    i = scalar_is_square(K.coerce(-1))
    w = scalar_is_square(K.coerce(5))
    z = 3 + i * w - 2 * w
    assert z * z.inverse() == K.coerce(1)
    assert (i * i).as_rational() == -1


def test_parse_and_format_points():
    assert parse_rational("-3/6") == Fraction(-1, 2)
    assert format_point(INF) == "inf"
    assert format_point(Fraction(2, 3)) == "2/3"
