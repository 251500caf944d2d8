"""Exact integer kernel: valuations, square classes, residue tests, primality.

Everything here works on Python ints; nothing touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt

import sympy

TRIAL_LIMIT = 10**6
PRIMALITY_LIMIT = 2**64
# Deterministic Miller-Rabin witness set; sufficient for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class OutOfRange(ValueError):
    """Input lies outside the range where a result is certified."""


def _require_nonzero(n: int, what: str) -> None:
    if n == 0:
        raise ValueError(f"{what} is undefined for n = 0")


def vp(n: int, p: int) -> int:
    """Largest e with p**e dividing n."""
    _require_nonzero(n, "valuation")
    if p < 2:
        raise ValueError(f"p = {p} is not a prime")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation of |n| as {prime: exponent}.

    Trial division up to TRIAL_LIMIT, sympy for whatever cofactor remains.
    """
    _require_nonzero(n, "factorisation")
    n = abs(n)
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    step = 2
    while f * f <= n and f <= TRIAL_LIMIT:
        if n % f == 0:
            while n % f == 0:
                out[f] = out.get(f, 0) + 1
                n //= f
            if n < PRIMALITY_LIMIT and is_prime(n):
                break
        f += step
        step = 6 - step
    if n > 1:
        if f * f > n or (n < PRIMALITY_LIMIT and is_prime(n)):
            out[n] = out.get(n, 0) + 1
        else:
            for q, e in sympy.factorint(n).items():
                out[int(q)] = out.get(int(q), 0) + int(e)
    return out


def omega(n: int) -> int:
    """Number of distinct primes dividing n; omega(+-1) = 0."""
    _require_nonzero(n, "omega")
    return len(factorize(n))


def squarefree_part(n: int) -> int:
    """The squarefree s with n/s a positive square (sign of s is the sign of n)."""
    _require_nonzero(n, "squarefree part")
    s = -1 if n < 0 else 1
    for p, e in factorize(n).items():
        if e % 2:
            s *= p
    return s


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def convention_sqrt(n: int) -> int | None:
    """Square root under Ivorra's sign convention, or None if n is not a square.

    Odd roots are normalised to 1 mod 4, even roots to be non-negative.
    """
    if n < 0:
        return None
    r = isqrt(n)
    if r * r != n:
        return None
    if r % 2 == 1 and r % 4 != 1:
        r = -r
    return r


def is_prime(n: int) -> bool:
    if n < 0:
        raise ValueError("is_prime expects n >= 0")
    if n >= PRIMALITY_LIMIT:
        raise OutOfRange(f"{n} is out of certified range (>= 2^64)")
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(bound: int) -> list[int]:
    """All primes <= bound (Eratosthenes on a bytearray)."""
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, bound + 1, i)))
    return [i for i in range(bound + 1) if sieve[i]]


@dataclass(frozen=True)
class ResidueTest:
    is_square: bool
    is_fourth_power: bool


def residue_tests(a: int, p: int) -> ResidueTest:
    """Quadratic and quartic residuosity of a modulo the odd prime p (Euler's criterion)."""
    if p < 3 or p % 2 == 0:
        raise ValueError(f"p = {p} must be an odd prime")
    if a % p == 0:
        raise ValueError(f"p = {p} divides a = {a}")
    a %= p
    sq = pow(a, (p - 1) // 2, p) == 1
    quart = pow(a, (p - 1) // gcd(4, p - 1), p) == 1
    return ResidueTest(sq, quart)


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def ivorra_bound(n: int) -> int:
    """floor(f(n)) with f(n) = 18 + 2 log2 n below 2^96, 435 + 10 log2 n from there on.

    floor(c*log2 n) is the largest t with 2^t <= n^c, i.e. bit_length(n^c) - 1.
    """
    if n < 1:
        raise ValueError("ivorra_bound expects n >= 1")
    if n < 2**96:
        return 18 + (n * n).bit_length() - 1
    return 435 + (n**10).bit_length() - 1


def integer_root(n: int, k: int) -> int | None:
    """Exact k-th root of n >= 0, or None."""
    if n < 0 or k < 1:
        return None
    r, exact = sympy.integer_nthroot(n, k)
    return int(r) if exact else None


def prime_power(n: int) -> tuple[int, int] | None:
    """(p, k) with n = p**k and p prime, or None."""
    if n < 2:
        return None
    for k in range(n.bit_length(), 0, -1):
        r = integer_root(n, k)
        # candidates beyond the certified primality range are skipped
        if r is not None and 2 <= r < PRIMALITY_LIMIT and is_prime(r):
            return r, k
    return None
