"""Exact rational helpers: conversions, factorials, and dense polynomials.

Polynomials are lists of coefficients in ascending powers. Entries may be
``Fraction`` or ``float``; the helpers never coerce between the two.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import numpy as np


def exact(x) -> Fraction:
    """Convert ``x`` to a Fraction.

    Floats go through their shortest repr so that ``0.3`` becomes ``3/10``
    rather than the binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, (int, np.integer, Rational)):
        return Fraction(int(x)) if isinstance(x, (int, np.integer)) else Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot represent {x} exactly")
    return Fraction(repr(x))


def rising(a, k: int):
    """Rising factorial a(a+1)...(a+k-1); empty product is 1."""
    out = Fraction(1) if isinstance(a, Fraction) else 1.0
    for i in range(k):
        out *= a + i
    return out


def falling(a, k: int):
    """Falling factorial a(a-1)...(a-k+1); empty product is 1."""
    out = Fraction(1) if isinstance(a, Fraction) else 1.0
    for i in range(k):
        out *= a - i
    return out


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def multinomial(parts) -> int:
    total = 0
    out = 1
    for part in parts:
        total += part
        out *= math.comb(total, part)
    return out


# -- dense polynomial arithmetic -------------------------------------------

def poly_trim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def poly_add(a, b):
    n = max(len(a), len(b))
    zero = 0
    return poly_trim([(a[i] if i < len(a) else zero) + (b[i] if i < len(b) else zero) for i in range(n)])


def poly_scale(a, c):
    return [c * ai for ai in a]


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return poly_trim(out)


def poly_eval(a, x):
    """Horner evaluation; works for scalars, Fractions and numpy arrays."""
    out = 0 * x + a[-1] if isinstance(x, np.ndarray) else a[-1]
    for c in reversed(a[:-1]):
        out = out * x + c
    return out


def falling_poly(k: int, shift=0):
    """Coefficients of (x - shift)_k = (x-shift)(x-shift-1)...(x-shift-k+1)."""
    out = [Fraction(1)]
    for i in range(k):
        out = poly_mul(out, [-(shift + i), Fraction(1)])
    return out
