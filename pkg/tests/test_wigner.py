import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.physics.wigner import wigner_6j

from erasesim.wigner import sixj, triangle_ok

half_ints = st.integers(min_value=0, max_value=8).map(lambda n: n / 2)


def test_known_values():
    # tabulated: {1 1 1; 1 1 1} = 1/6, {2 1 1; 1 1 1} = 1/6, and the
    # degenerate {a b 0; c d f} = (-1)^(a+c+f) / sqrt((2a+1)(2c+1))
    assert sixj(1, 1, 1, 1, 1, 1) == pytest.approx(1 / 6)
    assert sixj(1, 1, 0, 1, 1, 1) == pytest.approx(-1 / 3)
    assert sixj(2, 1, 1, 1, 1, 1) == pytest.approx(1 / 6)


def test_triangle_violation_is_zero():
    assert sixj(0, 0, 1, 1, 1, 1) == 0.0
    assert sixj(5, 1, 1, 1, 1, 1) == 0.0


def test_half_integer_perimeter_rule():
    # j1+j2+j3 = 3/2 is not an integer: not a valid triad
    assert not triangle_ok(0.5, 0.5, 0.5)
    assert triangle_ok(0.5, 0.5, 1.0)


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        sixj(0.3, 1, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        sixj(-1, 1, 1, 1, 1, 1)


@settings(max_examples=200, deadline=None)
@given(half_ints, half_ints, half_ints, half_ints, half_ints, half_ints)
def test_matches_sympy(j1, j2, j3, j4, j5, j6):
    try:
        ref = float(wigner_6j(j1, j2, j3, j4, j5, j6))
    except ValueError:
        ref = 0.0
    assert sixj(j1, j2, j3, j4, j5, j6) == pytest.approx(ref, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(half_ints, half_ints, half_ints, half_ints, half_ints, half_ints)
def test_column_swap_symmetry(j1, j2, j3, j4, j5, j6):
    # the 6-j symbol is invariant under swapping any two columns
    a = sixj(j1, j2, j3, j4, j5, j6)
    b = sixj(j2, j1, j3, j5, j4, j6)
    assert a == pytest.approx(b, abs=1e-12)


def test_orthogonality_sum():
    # sum_x (2x+1) {a b x; a b x'} ... simplest check:
    # sum_x (2x+1) {1 1 x; 1 1 x}^2 * (2*1+1) over valid x equals ... use
    # the standard relation sum_x (2x+1) {a b x; b a 0} pattern instead:
    # {a b x; b a 0} = (-1)^(a+b+x) / sqrt((2a+1)(2b+1))
    for a, b in [(1, 1), (1.5, 0.5), (2, 1)]:
        for x in range(int(abs(a - b)), int(a + b) + 1):
            val = sixj(a, b, x, b, a, 0)
            expect = (-1) ** round(a + b + x) / math.sqrt((2 * a + 1) * (2 * b + 1))
            assert val == pytest.approx(expect, abs=1e-12)
