"""Wigner 6-j symbols via the Racah closed form.

Arguments may be integers or half-integers. Uses exact integer arithmetic
(math.factorial with Fraction accumulation) so values are correct to float
rounding for the small angular momenta used here.
"""
from __future__ import annotations

import math
from fractions import Fraction


def _is_half_integer(x: float) -> bool:
    return abs(2 * x - round(2 * x)) < 1e-9


def triangle_ok(a: float, b: float, c: float) -> bool:
    """Triangle inequality plus integer-perimeter selection rule."""
    if not (abs(a - b) <= c <= a + b):
        return False
    return _is_half_integer(a + b + c) and abs((a + b + c) - round(a + b + c)) < 1e-9


def _delta_sq(a: float, b: float, c: float) -> Fraction:
    # squared triangle coefficient, exact
    return Fraction(
        math.factorial(round(a + b - c))
        * math.factorial(round(a - b + c))
        * math.factorial(round(-a + b + c)),
        math.factorial(round(a + b + c + 1)),
    )


def sixj(j1: float, j2: float, j3: float, j4: float, j5: float, j6: float) -> float:
    """Wigner 6-j symbol {j1 j2 j3; j4 j5 j6}.

    Raises ValueError if any argument is not a non-negative (half-)integer.
    Returns 0.0 when a triangle condition fails.
    """
    js = (j1, j2, j3, j4, j5, j6)
    for j in js:
        if j < 0 or not _is_half_integer(j):
            raise ValueError(f"invalid angular momentum {j}")
    triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)]
    if not all(triangle_ok(*t) for t in triads):
        return 0.0

    f = [j1 + j2 + j3, j1 + j5 + j6, j4 + j2 + j6, j4 + j5 + j3]
    g = [j1 + j2 + j4 + j5, j2 + j3 + j5 + j6, j3 + j1 + j6 + j4]
    t_min = round(max(f))
    t_max = round(min(g))
    total = Fraction(0)
    for t in range(t_min, t_max + 1):
        num = Fraction(math.factorial(t + 1))
        den = Fraction(1)
        for fi in f:
            den *= math.factorial(t - round(fi))
        for gi in g:
            den *= math.factorial(round(gi) - t)
        total += (-1) ** t * num / den

    delta = Fraction(1)
    for t in triads:
        delta *= _delta_sq(*t)
    # delta is a perfect ratio; take the square root in floats
    return math.sqrt(float(delta)) * float(total)
