import math

import pytest
from hypothesis import given, settings, strategies as st

from ivorra_watkins.intcore import (
    OutOfRange, convention_sqrt, factorize, is_prime, ivorra_bound, omega, residue_tests,
    squarefree_part, vp,
)

nonzero = st.integers(-10**9, 10**9).filter(bool)
small_primes = st.sampled_from([3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83])


def test_vp_values():
    assert vp(-124, 2) == 2
    assert vp(29, 29) == 1
    assert vp(16 * -124, 2) == 6


def test_vp_zero_rejected():
    with pytest.raises(ValueError):
        vp(0, 2)


def test_omega_values():
    assert omega(116) == 2
    assert omega(-8) == 1
    assert omega(1) == 0


def test_squarefree_part_values():
    assert squarefree_part(-124) == -31
    assert squarefree_part(32) == 2
    assert squarefree_part(1) == 1


def test_convention_sqrt_values():
    assert convention_sqrt(25) == 5
    assert convention_sqrt(9) == -3
    assert convention_sqrt(16) == 4
    assert convention_sqrt(7) is None
    assert convention_sqrt(-4) is None
    assert convention_sqrt(0) == 0


def test_is_prime_values():
    assert is_prime(5741)
    assert is_prime(33461)
    assert not is_prime(1)
    assert is_prime(2**61 - 1)
    with pytest.raises(OutOfRange):
        is_prime(2**64 + 13)


def test_residue_tests_minus64_mod5():
    r = residue_tests(-64, 5)
    assert (r.is_square, r.is_fourth_power) == (True, True)


def test_ivorra_bound_values():
    assert ivorra_bound(2**10) == 38
    assert ivorra_bound(2**96) == 1395
    assert ivorra_bound(1) == 18


@given(st.integers(1, 2**120))
def test_ivorra_bound_is_the_floor(n):
    # integer k satisfies k <= f(n) exactly when k <= floor(f(n))
    c, base = (2, 18) if n < 2**96 else (10, 435)
    t = ivorra_bound(n) - base
    assert 2**t <= n**c < 2 ** (t + 1)


def test_is_prime_matches_sieve_up_to_a_million():
    N = 10**6
    sieve = bytearray([1]) * (N + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, int(N**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, N + 1, i)))
    assert all(is_prime(n) == bool(sieve[n]) for n in range(N + 1))


@given(nonzero)
def test_squarefree_part_properties(n):
    s = squarefree_part(n)
    assert all(e == 1 for e in factorize(s).values())
    q = n // s
    assert n % s == 0 and q > 0 and math.isqrt(q) ** 2 == q


@given(st.integers(-10**6, 10**6))
def test_convention_sqrt_properties(r):
    root = convention_sqrt(r * r)
    assert root is not None and root * root == r * r
    if root % 2:
        assert root % 4 == 1
    else:
        assert root >= 0
    assert root in (r, -r)


@given(st.integers(0, 10**12))
def test_convention_sqrt_square_check(n):
    root = convention_sqrt(n)
    if root is None:
        assert math.isqrt(n) ** 2 != n
    else:
        assert root * root == n


@given(nonzero, nonzero, st.sampled_from([2, 3, 5, 7, 29]))
def test_vp_additive(m, n, p):
    assert vp(m * n, p) == vp(m, p) + vp(n, p)


@given(nonzero, nonzero)
def test_omega_subadditive(m, n):
    assert omega(m * n) <= omega(m) + omega(n)


@given(small_primes, st.integers(1, 20))
def test_omega_prime_power(p, k):
    assert omega(p**k) == 1


@settings(max_examples=300)
@given(st.integers(-10**6, 10**6).filter(bool), small_primes)
def test_fourth_power_implies_square(a, p):
    if a % p == 0:
        return
    r = residue_tests(a, p)
    if r.is_fourth_power:
        assert r.is_square
    if p % 4 == 3:
        assert r.is_fourth_power == r.is_square


@given(st.integers(1, 10**6), small_primes)
def test_residue_tests_against_enumeration(a, p):
    if a % p == 0:
        return
    squares = {x * x % p for x in range(1, p)}
    fourths = {x**4 % p for x in range(1, p)}
    r = residue_tests(a, p)
    assert r.is_square == (a % p in squares)
    assert r.is_fourth_power == (a % p in fourths)
