import math
from fractions import Fraction

from hypothesis import given, strategies as st

from metafib.surd import Surd

PHI = Surd.phi()


def floor_brute(a: Fraction, b: Fraction) -> int:
    """Largest integer m with m <= a + b*sqrt5, by exhaustive integer comparison."""
    approx = math.floor(float(a) + float(b) * 5 ** 0.5)
    for m in range(approx - 3, approx + 4):
        # m <= a + b sqrt5  <=>  (m - a) <= b sqrt5
        w = m - a
        ok = (b >= 0 and (w <= 0 or w * w <= 5 * b * b)) or (b < 0 and w < 0 and w * w >= 5 * b * b)
        w1 = m + 1 - a
        ok1 = (b >= 0 and (w1 <= 0 or w1 * w1 <= 5 * b * b)) or (b < 0 and w1 < 0 and w1 * w1 >= 5 * b * b)
        if ok and not ok1:
            return m
    raise AssertionError("no floor found")


def test_phi_squared_is_phi_plus_one():
    assert PHI * PHI == PHI + 1


def test_floor_of_small_multiples():
    assert [math.floor(PHI * i) for i in range(1, 9)] == [1, 3, 4, 6, 8, 9, 11, 12]


def test_ceil_of_integer_is_itself():
    assert math.ceil(Surd(7)) == 7 and math.floor(Surd(-7)) == -7


@given(
    st.fractions(min_value=-10**6, max_value=10**6, max_denominator=1000),
    st.fractions(min_value=-10**6, max_value=10**6, max_denominator=1000),
)
def test_floor_matches_brute_force(a, b):
    x = Surd(a, b)
    assert math.floor(x) == floor_brute(a, b)
    assert math.ceil(x) == -floor_brute(-a, -b)


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_division_inverts_multiplication(p, q, r, s):
    x, y = Surd(p, q), Surd(r, s)
    if (r, s) != (0, 0):
        assert (x * y) / y == x
