"""The Gaussian rational layer is cross-checked against the rational
layer on real inputs, where the two must agree exactly."""

from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from relfan.errors import NotNilpotent, SpecFormatError
from relfan.gaussian import (
    I,
    ONE,
    ZERO,
    GSpace,
    Gi,
    coerce,
    format_gi,
    gdet,
    gexp_nilpotent,
    gmat,
    gmatmul,
    gmatvec,
    grank,
    grref,
    i_power,
    lift_mat,
    parse_gi,
)
from relfan import qlinalg
from relfan.qlinalg import Subspace, det, exp_nilpotent, rref

from conftest import fracs


def gi(a, b=0):
    return Gi(F(a), F(b))


def lift_vec(v):
    return tuple(coerce(x) for x in v)


# --- scalar arithmetic ---

def test_field_ops_hand_values():
    assert gi(1, 2) * gi(3, -1) == gi(5, 5)
    assert gi(1, 1) / gi(1, -1) == I
    assert gi(2, 3) - gi(2, 3) == ZERO
    assert -gi(1, -2) == gi(-1, 2)
    assert gi(1, 2).conjugate() == gi(1, -2)
    assert (gi(3, 4) * gi(3, 4).conjugate()) == gi(25)


def test_scalar_coercion():
    assert gi(1, 2) + 1 == gi(2, 2)
    assert 2 * gi(1, 1) == gi(2, 2)
    assert 1 - gi(0, 1) == gi(1, -1)
    assert F(1, 2) * gi(2, 4) == gi(1, 2)
    with pytest.raises(SpecFormatError):
        coerce("i")


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        gi(1) / ZERO


def test_i_power_cycle():
    assert [i_power(n) for n in range(4)] == [ONE, I, -ONE, -I]
    assert i_power(-1) == -I
    assert i_power(6) == -ONE


@given(fracs(), fracs(), fracs(), fracs())
def test_field_axiom_samples(a, b, c, d):
    x = Gi(a, b)
    y = Gi(c, d)
    assert x + y == y + x
    assert x * y == y * x
    if y:
        assert (x / y) * y == x


# --- formatting ---

def test_format_hand_values():
    assert format_gi(gi(F(1, 2), F(-3, 4))) == "1/2-3/4*i"
    assert format_gi(I) == "0+1*i"
    assert format_gi(gi(-2, 0)) == "-2+0*i"


def test_parse_hand_values():
    assert parse_gi("1/2-3/4*i") == gi(F(1, 2), F(-3, 4))
    assert parse_gi("-2+1/3*i") == gi(-2, F(1, 3))
    assert parse_gi("5/3") == gi(F(5, 3))
    with pytest.raises(SpecFormatError):
        parse_gi("2+i")
    with pytest.raises(SpecFormatError):
        parse_gi("1/0+0*i")


@given(fracs(), fracs())
def test_format_parse_roundtrip(a, b):
    z = Gi(a, b)
    assert parse_gi(format_gi(z)) == z


def test_gaussian_integer_predicate():
    assert gi(3, -2).is_gaussian_integer()
    assert not gi(F(1, 2), 0).is_gaussian_integer()
    assert gi(4).is_real


# --- linear algebra against the rational oracle ---

def rational_mats():
    return st.lists(
        st.lists(fracs(), min_size=3, max_size=3), min_size=2, max_size=4
    ).map(lambda rows: tuple(tuple(r) for r in rows))


@given(rational_mats())
def test_rref_matches_rational_layer(m):
    red, piv = rref(m)
    gred, gpiv = grref(lift_mat(m))
    assert gpiv == piv
    assert gred == lift_mat(red)


@given(rational_mats())
def test_rank_matches_rational_layer(m):
    assert grank(lift_mat(m)) == qlinalg.rank(m)


@given(st.lists(st.lists(fracs(), min_size=3, max_size=3), min_size=3, max_size=3))
def test_det_matches_rational_layer(rows):
    m = tuple(tuple(r) for r in rows)
    assert gdet(lift_mat(m)) == coerce(det(m))


def test_matmul_hand_value():
    a = gmat([[I, ONE], [ZERO, I]])
    assert gmatmul(a, a) == gmat([[gi(-1), gi(0, 2)], [ZERO, gi(-1)]])
    assert gmatvec(a, (ONE, ONE)) == (gi(1, 1), I)


# --- spaces ---

def test_space_membership_complex():
    line = GSpace(2, [(ONE, I)])
    assert line.contains((gi(0, 2), gi(-2)))
    assert not line.contains((ONE, -I))
    assert line.conjugate() == GSpace(2, [(ONE, -I)])


def test_space_intersection_complex():
    line = GSpace(2, [(ONE, I)])
    other = GSpace(2, [(ONE, -I)])
    assert line.intersect(other).dim == 0
    assert GSpace(2, [(ONE, I), (ONE, -I)]).dim == 2
    plane = GSpace(3, [(ONE, ZERO, ZERO), (ZERO, ONE, I)])
    assert plane.intersect(GSpace(3, [(ZERO, ONE, I)])).dim == 1


@given(rational_mats(), rational_mats())
def test_intersection_matches_rational_layer(a, b):
    sa = Subspace.span(a, 3)
    sb = Subspace.span(b, 3)
    ga = GSpace(3, lift_mat(a))
    gb = GSpace(3, lift_mat(b))
    assert ga.intersect(gb).dim == sa.intersect(sb).dim


def test_space_apply():
    op = gmat([[ZERO, ONE], [ZERO, ZERO]])
    assert GSpace(2, [(ZERO, ONE)]).apply(op) == GSpace(2, [(ONE, ZERO)])
    assert GSpace(2, [(ONE, ZERO)]).apply(op).dim == 0


# --- exponentials ---

def test_exp_matches_rational_layer():
    n = ((F(0), F(2), F(0)), (F(0), F(0), F(2)), (F(0), F(0), F(0)))
    assert gexp_nilpotent(lift_mat(n)) == lift_mat(exp_nilpotent(n))


def test_exp_imaginary_direction():
    n = gmat([[ZERO, gi(0, 3)], [ZERO, ZERO]])
    assert gexp_nilpotent(n) == gmat([[ONE, gi(0, 3)], [ZERO, ONE]])


def test_exp_rejects_non_nilpotent():
    with pytest.raises(NotNilpotent):
        gexp_nilpotent(gmat([[ONE, ZERO], [ZERO, ONE]]))
