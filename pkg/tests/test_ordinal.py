import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import cnf_add, cnf_terms
from trasdim.ordinal import (
    INFINITY,
    OMEGA,
    ZERO,
    Ordinal,
    OrdinalError,
    add,
    compare,
    make,
    omega_times,
    parse,
)

coeffs = st.lists(st.integers(min_value=0, max_value=5), max_size=4)


def test_make_canonical():
    assert make([5]) == Ordinal.of(5)
    assert make([3, 1]) == OMEGA + 3
    assert str(make([3, 1])) == "w*1 + 3"
    assert make([0, 0, 1]).degree == 2
    assert make([4, 0, 0]) == make([4])
    assert make([]) == ZERO


def test_negative_coefficient_rejected():
    with pytest.raises(OrdinalError):
        make([1, -1])


def test_compare_examples():
    assert compare(OMEGA + 3, omega_times(2)) == -1
    assert compare(Ordinal.of(7), OMEGA) == -1
    assert compare(INFINITY, make([0, 0, 1])) == 1
    assert compare(OMEGA, OMEGA) == 0


def test_add_examples():
    assert add(OMEGA, Ordinal.of(3)) == make([3, 1])
    assert add(Ordinal.of(3), OMEGA) == OMEGA
    assert add(omega_times(2, 1), omega_times(1, 4)) == omega_times(3, 4)


def test_add_infinity_rejected():
    with pytest.raises(OrdinalError):
        add(INFINITY, OMEGA)


def test_int_conversion():
    assert int(Ordinal.of(4)) == 4
    with pytest.raises(OrdinalError):
        int(OMEGA)


def test_parse_round_trip():
    for a in (ZERO, Ordinal.of(6), OMEGA, omega_times(3, 2), make([1, 0, 2]), INFINITY):
        assert parse(str(a)) == a


@given(coeffs, coeffs)
def test_add_matches_textbook(a, b):
    got = add(make(a), make(b))
    assert cnf_terms(got.coefficients) == cnf_add(cnf_terms(a), cnf_terms(b))


@given(coeffs, coeffs, coeffs)
def test_add_associative(a, b, c):
    x, y, z = make(a), make(b), make(c)
    assert (x + y) + z == x + (y + z)


@given(coeffs, coeffs)
def test_add_monotone_in_right_argument(a, b):
    # x + y >= y, with equality allowed (absorption)
    assert make(a) + make(b) >= make(b)
    assert make(a) + make(b) >= make(a)


@given(coeffs, coeffs)
def test_order_is_total_and_antisymmetric(a, b):
    x, y = make(a), make(b)
    assert compare(x, y) == -compare(y, x)
    assert (compare(x, y) == 0) == (x == y)


@given(st.integers(0, 50), st.integers(0, 50))
def test_naturals_add_as_integers(m, n):
    assert add(Ordinal.of(m), Ordinal.of(n)) == Ordinal.of(m + n)
