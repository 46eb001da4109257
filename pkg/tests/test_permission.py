from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from svl.permission import (
    ONE, ZERO, Fraction, Ordering, PermissionOverflow, PermissionRangeError,
    frac_add, frac_cmp, frac_cutoff_sub,
)


@st.composite
def perms(draw, max_den=10**12):
    den = draw(st.integers(1, max_den))
    num = draw(st.integers(0, den))
    return Fraction(num, den)


def q(f: Fraction) -> Q:
    return Q(f.numerator, f.denominator)


@pytest.mark.parametrize("a,b,want", [
    ((1, 2), (1, 2), (1, 1)),
    ((0, 1), (3, 7), (3, 7)),
])
def test_add_examples(a, b, want):
    assert frac_add(Fraction(*a), Fraction(*b)) == Fraction(*want)


def test_add_overflow():
    with pytest.raises(PermissionOverflow):
        frac_add(Fraction(3, 4), Fraction(1, 2))
    assert issubclass(PermissionOverflow, OverflowError)


@pytest.mark.parametrize("a,b,want", [((3, 4), (1, 2), (1, 4)), ((1, 4), (1, 4), (0, 1)), ((1, 4), (1, 2), (0, 1))])
def test_cutoff_examples(a, b, want):
    assert frac_cutoff_sub(Fraction(*a), Fraction(*b)) == Fraction(*want)


def test_cmp_examples():
    assert frac_cmp(Fraction(1, 3), Fraction(1, 2)) is Ordering.LESS
    assert frac_cmp(Fraction(2, 4), Fraction(1, 2)) is Ordering.EQUAL
    assert frac_cmp(ONE, ZERO) is Ordering.GREATER


def test_canonical_form_and_rendering():
    assert (Fraction(6, 8).numerator, Fraction(6, 8).denominator) == (3, 4)
    assert (Fraction(0, 9).numerator, Fraction(0, 9).denominator) == (0, 1)
    assert [str(Fraction(0)), str(Fraction(1)), str(Fraction(2, 6))] == ["0", "1", "1/3"]
    assert Fraction.parse(" 2/4 ") == Fraction(1, 2)


@pytest.mark.parametrize("args", [(-1, 2), (3, 2), (5, 4)])
def test_out_of_range_rejected(args):
    with pytest.raises(PermissionRangeError):
        Fraction(*args)


def test_zero_denominator_and_types():
    with pytest.raises(ZeroDivisionError):
        Fraction(1, 0)
    with pytest.raises(TypeError):
        Fraction(0.5, 1)


@settings(max_examples=1000, deadline=None)
@given(perms(), perms())
def test_add_matches_rational_oracle(a, b):
    exact = q(a) + q(b)
    if exact > 1:
        with pytest.raises(PermissionOverflow):
            frac_add(a, b)
    else:
        r = frac_add(a, b)
        assert q(r) == exact
        assert frac_add(b, a) == r


@settings(max_examples=1000, deadline=None)
@given(perms(), perms(), perms())
def test_add_associative_where_defined(a, b, c):
    if q(a) + q(b) + q(c) <= 1:
        assert frac_add(frac_add(a, b), c) == frac_add(a, frac_add(b, c))


@settings(max_examples=1000, deadline=None)
@given(perms(), perms())
def test_cutoff_complement_law(a, b):
    x, y = frac_cutoff_sub(a, b), frac_cutoff_sub(b, a)
    assert q(x) + q(y) == abs(q(a) - q(b))
    assert x.is_zero() or y.is_zero()
    assert q(x) == max(q(a) - q(b), 0)


@settings(max_examples=1000, deadline=None)
@given(perms())
def test_cutoff_identities(a):
    assert frac_cutoff_sub(a, ZERO) == a
    assert frac_cutoff_sub(a, a) == ZERO
    assert frac_cutoff_sub(ZERO, a) == ZERO


@settings(max_examples=1000, deadline=None)
@given(perms(), st.data())
def test_split_merge_inverse(a, data):
    b = data.draw(perms().filter(lambda b: q(b) <= q(a)))
    assert frac_add(b, frac_cutoff_sub(a, b)) == a


@settings(max_examples=1000, deadline=None)
@given(perms(), perms())
def test_order_agrees_with_rationals(a, b):
    want = Ordering.LESS if q(a) < q(b) else Ordering.GREATER if q(a) > q(b) else Ordering.EQUAL
    assert frac_cmp(a, b) is want
    assert (a == b) == (q(a) == q(b))
    assert (hash(a) == hash(b)) or a != b
