"""Small cached arithmetic functions on positive integers (sympy-backed)."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from sympy import divisors as _divisors
from sympy import factorint as _factorint


@lru_cache(maxsize=None)
def factor(n: int) -> tuple:
    return tuple(sorted(_factorint(n).items()))


def primes_of(n: int) -> list[int]:
    return [p for p, _ in factor(n)]


@lru_cache(maxsize=None)
def divisors(n: int) -> tuple:
    return tuple(int(d) for d in _divisors(n))


@lru_cache(maxsize=None)
def mobius(n: int) -> int:
    if n == 1:
        return 1
    f = factor(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    out = n
    for p, _ in factor(n):
        out = out // p * (p - 1)
    return out


@lru_cache(maxsize=None)
def jordan2(n: int) -> int:
    """n^2 * prod_{p | n} (1 - 1/p^2)."""
    out = n * n
    for p, _ in factor(n):
        out = out // (p * p) * (p * p - 1)
    return out


@lru_cache(maxsize=None)
def dedekind_psi(n: int) -> int:
    """n * prod_{p | n} (1 + 1/p)."""
    out = n
    for p, _ in factor(n):
        out = out // p * (p + 1)
    return out


def sigma0(n: int) -> int:
    return len(divisors(n))


def sigma(n: int, k: int = 1) -> int:
    return sum(d ** k for d in divisors(n))


def bernoulli2_periodic(x: Fraction) -> Fraction:
    """Periodic second Bernoulli function B2({x}) = {x}^2 - {x} + 1/6."""
    f = x - (x.numerator // x.denominator)
    return f * f - f + Fraction(1, 6)
