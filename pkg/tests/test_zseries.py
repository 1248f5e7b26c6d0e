from gwquintic.rat import rat
from gwquintic.series import Series, VarTable
from gwquintic.zseries import LaurentZ


def setup():
    t = VarTable([("x", 1, 4, True)], 4)
    return t, Series.var(t, "x"), Series.one(t), Series.zero(t)


def test_ring_ops_and_window():
    t, x, one, zero = setup()
    a = LaurentZ.term(1, 3, zero, (-1,), x)
    b = LaurentZ.term(1, 3, zero, (2,), one)
    c = a * b
    assert (c.coeff((1,)) - x).is_zero()
    overflow = b * b * b  # power 6 beyond the window
    assert overflow.is_zero() and overflow.truncated


def test_shift_scale_power():
    t, x, one, zero = setup()
    a = LaurentZ.term(1, 6, zero, (-1,), one) + LaurentZ.term(1, 6, zero, (0,), x)
    assert (a.shift(0, 2).coeff((1,)) - one).is_zero()
    assert ((a ** 2).coeff((-2,)) - one).is_zero()
    assert ((a ** 2).coeff((-1,)) - x.scale(2)).is_zero()
    assert (a.scale(rat(3)).coeff((0,)) - x.scale(3)).is_zero()


def test_sign_flip_and_multislot():
    t, x, one, zero = setup()
    a = LaurentZ.term(2, 4, zero, (-1, -2), x)
    flipped = a.substitute_z_sign()
    assert (flipped.coeff((-1, -2)) + x).is_zero()
    b = LaurentZ.term(2, 4, zero, (0, 1), one)
    assert ((a * b).coeff((-1, -1)) - x).is_zero()
