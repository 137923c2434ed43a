"""Exact rational lattice algebra."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dgslab.core import (
    Basis,
    DimensionMismatchError,
    ShiftedLattice,
    SingularBasisError,
    bit_length_bounds,
    coords,
    denominator_lcm,
    format_vec,
    identity_basis,
    is_lattice_member,
    is_primitive,
    lattice,
    norm_sq,
    parse_vec,
    vec,
)
from dgslab.oracles import solve_cvp, solve_svp

rationals = st.fractions(
    min_value=-8, max_value=8, max_denominator=6
)


def small_basis_strategy(n):
    def ok(cols):
        try:
            Basis(cols)
            return True
        except SingularBasisError:
            return False

    return st.lists(
        st.lists(rationals, min_size=n, max_size=n), min_size=n, max_size=n
    ).filter(ok)


def test_det_and_inverse_diag():
    b = Basis([[Fraction(3), 0], [0, Fraction(1, 2)]])
    assert b.det == Fraction(3, 2)
    assert b.multiply((Fraction(1), Fraction(2))) == (Fraction(3), Fraction(1))
    assert coords(b, (Fraction(3), Fraction(1))) == (Fraction(1), Fraction(2))


def test_singular_basis_rejected():
    with pytest.raises(SingularBasisError):
        Basis([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        Basis([[Fraction(1)], [Fraction(0), Fraction(1)]])


def test_membership_and_primitivity():
    b = Basis([[Fraction(2), 0], [0, Fraction(3)]])
    assert is_lattice_member(b, (Fraction(4), Fraction(3)))
    assert not is_lattice_member(b, (Fraction(1), Fraction(0)))
    assert is_primitive(b, (Fraction(2), Fraction(3)))
    assert not is_primitive(b, (Fraction(4), Fraction(6)))


def test_bit_length_convention():
    # one column (3, 1/2): bits(3) + (bits(1) + bits(2)) summed per column.
    b = Basis([[Fraction(3), 0], [0, Fraction(1, 2)]])
    assert b.bit_length == max(2, 1 + 2)


def test_bit_length_bounds_contain_truth():
    for cols in ([[1, 0], [0, 1]], [[3, 0], [0, Fraction(1, 2)]],
                 [[2, 1], [1, 3]]):
        b = Basis([[Fraction(x) for x in c] for c in cols])
        bounds = bit_length_bounds(b)
        l1 = solve_svp(b).lambda1_sq
        assert bounds.lambda1_lo**2 <= l1 <= bounds.lambda1_hi**2


def test_covering_bound_contains_truth():
    b = Basis([[Fraction(3), 0], [0, Fraction(1, 2)]])
    bounds = bit_length_bounds(b)
    # a deep hole shift for this lattice
    lat = ShiftedLattice(b, (Fraction(3, 2), Fraction(1, 4)))
    d = solve_cvp(lat).dist_sq
    assert d <= bounds.mu_hi**2


def test_denominator_lcm():
    lat = ShiftedLattice(Basis([[Fraction(1, 6), 0], [0, Fraction(1)]]),
                         (Fraction(1, 4), Fraction(0)))
    assert denominator_lcm(lat) == 12


def test_format_parse_roundtrip():
    v = (Fraction(-3, 7), Fraction(2), Fraction(0))
    assert parse_vec(format_vec(v)) == v


@settings(max_examples=50, deadline=None)
@given(small_basis_strategy(2), st.lists(st.integers(-5, 5), min_size=2,
                                         max_size=2))
def test_multiply_coords_roundtrip(cols, a):
    b = Basis(cols)
    x = b.multiply(tuple(Fraction(k) for k in a))
    assert coords(b, x) == tuple(Fraction(k) for k in a)
    assert is_lattice_member(b, x)


@settings(max_examples=50, deadline=None)
@given(small_basis_strategy(2))
def test_inverse_times_basis_is_identity(cols):
    b = Basis(cols)
    ident = identity_basis(2)
    for j, col in enumerate(ident.columns):
        back = b.multiply(coords(b, col))
        assert back == col


def test_lattice_constructor_and_vec():
    lat = lattice([[1, 0], [0, 1]], shift=[Fraction(1, 2), 0])
    assert lat.shift == (Fraction(1, 2), Fraction(0))
    assert norm_sq(vec([1, 1])) == 2
