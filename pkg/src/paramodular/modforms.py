"""q-expansions of eta powers and the Eisenstein series E4, E6."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .arith import sigma
from .series import LaurentPoly, QSeriesTrunc, power_series_pow


@lru_cache(maxsize=64)
def _euler(L: int) -> tuple:
    # prod (1 - q^n) by the pentagonal number theorem
    c = [0] * (L + 1)
    k = 0
    while True:
        done = True
        for j in (k, -k) if k else (0,):
            e = j * (3 * j - 1) // 2
            if e <= L:
                c[e] = -1 if j % 2 else 1
                done = False
        if done and k:
            break
        k += 1
    return tuple(c)


def euler_coeffs(L: int) -> list[int]:
    """Coefficients of prod_{n>=1} (1 - q^n) through q^L."""
    return list(_euler(L))


@lru_cache(maxsize=256)
def _eta_pow(e: int, L: int) -> tuple:
    return tuple(power_series_pow(list(_euler(L)), e, L))


def eta_power_coeffs(e: int, L: int) -> list[int]:
    """Coefficients of prod (1 - q^n)^e through q^L (any integer e)."""
    return list(_eta_pow(e, L))


def _column_series(offset, coeffs: list, order: int) -> QSeriesTrunc:
    blk = np.array([[int(c)] for c in coeffs], dtype=object).reshape(len(coeffs), 1)
    return QSeriesTrunc._from_block(Fraction(offset), order, blk, 0, 1)


def eta_power(e: int, L: int) -> QSeriesTrunc:
    """eta^e = q^(e/24) prod (1 - q^n)^e, known through relative order L."""
    return _column_series(Fraction(e, 24), eta_power_coeffs(e, L), L)


def delta(L: int) -> QSeriesTrunc:
    return eta_power(24, L)


@lru_cache(maxsize=64)
def _eis(k: int, L: int) -> tuple:
    const = {4: 240, 6: -504}[k]
    return tuple([1] + [const * sigma(n, k - 1) for n in range(1, L + 1)])


def eisenstein_coeffs(k: int, L: int) -> list[int]:
    """E4 or E6 through q^L."""
    if k not in (4, 6):
        raise ValueError("only E4 and E6 are provided")
    return list(_eis(k, L))


def eisenstein(k: int, L: int) -> QSeriesTrunc:
    return _column_series(0, eisenstein_coeffs(k, L), L)


def constant_series(c, L: int) -> QSeriesTrunc:
    return QSeriesTrunc(0, [LaurentPoly.constant(c)], L)
