import pytest

from gwquintic.errors import PreconditionError
from gwquintic.rat import rat
from gwquintic.symexpr import SymTable, commutator, mat_eq, mat_mul


def chart():
    st = SymTable()
    st.add("tP")
    st.add("tQ")
    st.add("s", "unit")
    st.add("E", "gauge")
    st.add_function_family("f", 4)
    st.add_derivation("dP")
    st.add_derivation("dQ")
    st.set_rule("dP", "tP", st.one())
    st.set_rule("dQ", "tQ", st.one())
    st.set_rule("dP", "s", st.one())
    st.set_rule("dP", "E", st.sym("E"))
    for k in range(4):
        st.set_rule("dQ", f"f^({k})", st.sym(f"f^({k + 1})"))
    return st


def test_product_rule_cancellation():
    st = chart()
    tQ = st.sym("tQ")
    expr = tQ * st.sym("f^(2)") - st.sym("f^(1)")
    assert expr.derive("dQ") == tQ * st.sym("f^(3)")


def test_group_like_exponentials():
    st = chart()
    e = st.sym("E")
    assert e * st.sym("E", -1) == st.one()
    assert (e ** 2).derive("dP") == (e ** 2).scale(2)


def test_unit_inverse_derivative():
    st = chart()
    sinv = st.sym("s", -1)
    assert sinv.derive("dP") == -st.sym("s", -2)


def test_poly_negative_power_rejected():
    st = chart()
    with pytest.raises(PreconditionError):
        st.sym("tQ", -1)
    with pytest.raises(PreconditionError):
        (st.sym("tQ") + st.one()).invert()


def test_apply_map_shift():
    st = chart()
    tQ = st.sym("tQ")
    shifted = (tQ ** 3).apply_map({"tQ": tQ + st.one()})
    assert shifted == tQ ** 3 + (tQ ** 2).scale(3) + tQ.scale(3) + st.one()


def test_conjugation_involution():
    st = SymTable()
    st.add("a")
    st.add("ab")
    st.set_conjugate_pair("a", "ab")
    x = st.sym("a") * rat(2) + st.sym("ab") * st.sym("a")
    assert x.conj().conj() == x
    assert x.conj() == st.sym("ab") * rat(2) + st.sym("a") * st.sym("ab")


def test_subs_zero():
    st = chart()
    x = st.sym("tP") * st.sym("tQ") + st.sym("tQ")
    assert x.subs_zero(["tP"]) == st.sym("tQ")


def test_matrix_helpers():
    st = chart()
    one, zero = st.one(), st.zero()
    a = [[one, st.sym("tP")], [zero, one]]
    b = [[one, -st.sym("tP")], [zero, one]]
    assert mat_eq(mat_mul(a, b), [[one, zero], [zero, one]])
    assert all(x.is_zero() for row in commutator(a, a) for x in row)
