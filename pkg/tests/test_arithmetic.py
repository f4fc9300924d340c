import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bianchi.arithmetic import (
    ExactPoint,
    FieldElem,
    Ideal,
    Mat2,
    canonical_unit_multiple,
    coprime_witness,
    cusps_equivalent,
    hnf_rows,
    ideal_index,
    ideals_of_norm,
    make_order,
    reduce_mod_lattice,
    units,
)
from bianchi.rational import QQ

DISCS = [-3, -4, -7, -8, -11, -15, -20, -23, -24, -84, -95]


def test_make_order_omega_data():
    assert (make_order(-4).T, make_order(-4).N) == (0, 1)
    assert (make_order(-3).T, make_order(-3).N) == (1, 1)
    assert (make_order(-7).T, make_order(-7).N) == (1, 2)
    assert (make_order(-20).T, make_order(-20).N) == (0, 5)


@pytest.mark.parametrize("bad", [-5, -6, -1, -2, 0, 4, -13])
def test_make_order_rejects_non_discriminants(bad):
    if bad in (-1, -2, -5, -6, -13):
        with pytest.raises(ValueError):
            make_order(bad)
    elif bad >= 0:
        with pytest.raises(ValueError):
            make_order(bad)


def test_make_order_accepts_non_fundamental():
    # orders like -12, -16 are valid quadratic orders even if not maximal
    assert make_order(-12).N == 3
    assert make_order(-16).N == 4


def test_norm_examples():
    o4 = make_order(-4)
    assert (o4.one() + o4.omega()).norm() == 2
    o7 = make_order(-7)
    assert o7.omega().norm() == 2
    assert o7.zero().norm() == 0


@settings(max_examples=200)
@given(
    st.sampled_from(DISCS),
    st.integers(-50, 50), st.integers(-50, 50),
    st.integers(-50, 50), st.integers(-50, 50),
)
def test_norm_multiplicative(D, a, b, c, d):
    o = make_order(D)
    x, y = o.elem(a, b), o.elem(c, d)
    assert (x * y).norm() == x.norm() * y.norm()
    assert x.norm() >= 0
    assert (x.norm() == 0) == x.is_zero()
    # conj is a ring homomorphism against norm
    assert x.conj().norm() == x.norm()
    assert (x * x.conj()).key() == (x.norm(), 0)


def test_units():
    assert len(units(make_order(-20))) == 2
    assert len(units(make_order(-4))) == 4
    assert len(units(make_order(-3))) == 6
    for D in DISCS:
        o = make_order(D)
        for u in units(o):
            assert u.norm() == 1
            assert -u in units(o)


def _minor_gcd_index(rows):
    # independent oracle: index of the row span in Z^2 = gcd of 2x2 minors
    g = 0
    n = len(rows)
    for i in range(n):
        for j in range(i + 1, n):
            g = math.gcd(g, abs(rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0]))
    return g


def test_ideal_index_examples():
    o = make_order(-20)
    assert ideal_index(o.one(), o.zero()) == 1
    assert ideal_index(o.elem(2), o.one() + o.omega()) == 2
    assert ideal_index(o.elem(2), o.zero()) == 4
    with pytest.raises(ValueError):
        ideal_index(o.zero(), o.zero())


@settings(max_examples=200)
@given(
    st.sampled_from(DISCS),
    st.integers(-9, 9), st.integers(-9, 9),
    st.integers(-9, 9), st.integers(-9, 9),
)
def test_ideal_index_matches_minor_gcd_oracle(D, ca, cb, da, db):
    o = make_order(D)
    c, d = o.elem(ca, cb), o.elem(da, db)
    if c.is_zero() and d.is_zero():
        return
    w = o.omega()
    rows = [(x.a, x.b) for x in (c, c * w, d, d * w)]
    assert ideal_index(c, d) == _minor_gcd_index(rows)


@settings(max_examples=150)
@given(
    st.sampled_from(DISCS),
    st.integers(-6, 6), st.integers(-6, 6),
    st.integers(-6, 6), st.integers(-6, 6),
)
def test_ideal_index_divides_norms_and_unit_invariance(D, ca, cb, da, db):
    o = make_order(D)
    c, d = o.elem(ca, cb), o.elem(da, db)
    if c.is_zero() and d.is_zero():
        return
    idx = ideal_index(c, d)
    if not c.is_zero():
        assert c.norm() % idx == 0
    if not d.is_zero():
        assert d.norm() % idx == 0
    for u in units(o):
        assert ideal_index(u * c, u * d) == idx


@settings(max_examples=150)
@given(
    st.sampled_from(DISCS),
    st.integers(-8, 8), st.integers(-8, 8),
    st.integers(-8, 8), st.integers(-8, 8),
)
def test_coprime_witness(D, ca, cb, da, db):
    o = make_order(D)
    c, d = o.elem(ca, cb), o.elem(da, db)
    if c.is_zero() and d.is_zero():
        return
    if ideal_index(c, d) != 1:
        return
    x, y = coprime_witness(c, d)
    assert x * d + y * c == o.one()


def test_reduce_mod_lattice_examples():
    o4 = make_order(-4)
    p, lam = reduce_mod_lattice(ExactPoint(QQ(3, 4), QQ(0)), o4)
    assert p == ExactPoint(QQ(-1, 4), QQ(0)) and lam.key() == (1, 0)
    p, lam = reduce_mod_lattice(ExactPoint(QQ(0), QQ(0)), o4)
    assert p == ExactPoint(QQ(0), QQ(0)) and lam.key() == (0, 0)
    o7 = make_order(-7)
    p, lam = reduce_mod_lattice(ExactPoint(QQ(1, 2), QQ(5, 8)), o7)
    assert lam.key() == (0, 1)
    alpha, beta = o7.coeffs_of_point(p)
    assert -QQ(1, 2) <= alpha < QQ(1, 2) and -QQ(1, 2) <= beta < QQ(1, 2)


@settings(max_examples=150)
@given(
    st.sampled_from(DISCS),
    st.integers(-400, 400), st.integers(1, 40),
    st.integers(-400, 400), st.integers(1, 40),
)
def test_reduce_mod_lattice_idempotent(D, xn, xd, yn, yd):
    o = make_order(D)
    p = ExactPoint(QQ(xn, xd), QQ(yn, yd))
    p1, lam = reduce_mod_lattice(p, o)
    # difference is exactly the lattice element
    assert p1.x == p.x - o.point_of_elem(lam).x
    assert p1.y == p.y - o.point_of_elem(lam).y
    p2, lam2 = reduce_mod_lattice(p1, o)
    assert p2 == p1 and lam2.is_zero()


@settings(max_examples=100)
@given(
    st.sampled_from(DISCS),
    st.integers(-50, 50), st.integers(1, 12),
    st.integers(-50, 50), st.integers(1, 12),
    st.integers(-50, 50), st.integers(1, 12),
    st.integers(-50, 50), st.integers(1, 12),
)
def test_dist2_metric_properties(D, ax, axd, ay, ayd, bx, bxd, by, byd):
    o = make_order(D)
    p = ExactPoint(QQ(ax, axd), QQ(ay, ayd))
    q = ExactPoint(QQ(bx, bxd), QQ(by, byd))
    assert o.dist2(p, q) == o.dist2(q, p)
    assert o.dist2(p, q) >= 0
    assert (o.dist2(p, q) == 0) == (p == q)


def test_field_elem_normalization():
    o = make_order(-4)
    f = FieldElem.make(o.elem(2, 4), 6)
    assert (f.num.key(), f.den) == ((1, 2), 3)
    g = FieldElem.make(o.elem(1, 0), -2)
    assert (g.num.key(), g.den) == ((-1, 0), 2)
    p = f.point()
    assert FieldElem.from_point(p, o) == f


def test_point_field_roundtrip():
    o = make_order(-7)
    p = ExactPoint(QQ(3, 4), QQ(-5, 8))
    num, den = o.field_of_point(p)
    assert o.point_of_field(num, den) == p


def test_canonical_unit_multiple_is_canonical():
    o = make_order(-3)
    x = o.elem(2, -1)
    reps = {canonical_unit_multiple(u * x).key() for u in units(o)}
    assert len(reps) == 1


def test_mat2_basics():
    o = make_order(-4)
    m = Mat2(o.zero(), -o.one(), o.one(), o.zero())  # z -> -1/z
    assert m.det() == o.one()
    assert (m @ m.inv()).is_scalar()
    # apex of the unit sphere is fixed
    pt, h2 = m.apply_h3(ExactPoint(QQ(0), QQ(0)), QQ(1))
    assert pt == ExactPoint(QQ(0), QQ(0)) and h2 == 1
    # boundary action: 1 -> -1, 0 -> infinity
    assert m.apply_boundary(ExactPoint(QQ(1), QQ(0))) == ExactPoint(QQ(-1), QQ(0))
    assert m.apply_boundary(ExactPoint(QQ(0), QQ(0))) == "inf"
    assert m.apply_boundary("inf") == ExactPoint(QQ(0), QQ(0))


def test_ideal_machinery():
    o = make_order(-15)
    frak_p = Ideal.from_gens([o.elem(2), o.omega()], o)
    assert frak_p.norm() == 2
    assert not frak_p.is_principal()
    # p * conj(p) = (2) is principal
    assert frak_p.mul(frak_p.conj()).is_principal()
    # conjugate prime is in the inverse class; h = 2 so classes agree
    assert cusps_equivalent((o.omega(), o.elem(2)), (o.omega().conj(), o.elem(2)))
    # principal cusps: infinity ~ 0
    assert cusps_equivalent((o.one(), o.zero()), (o.zero(), o.one()))
    assert not cusps_equivalent((o.omega(), o.elem(2)), (o.one(), o.zero()))


def test_ideals_of_norm():
    o = make_order(-15)
    assert len(ideals_of_norm(o, 1)) == 1
    two = ideals_of_norm(o, 2)
    assert len(two) == 2  # split prime
    o7 = make_order(-7)
    assert len(ideals_of_norm(o7, 2)) == 2
    for ideal in ideals_of_norm(make_order(-20), 6):
        assert ideal.norm() == 6


def test_hnf_rows_shape():
    (d1, t), (z, d2) = hnf_rows([(2, 0), (0, 2), (1, 1), (-5, 1)])
    assert z == 0 and d1 * d2 == 2
