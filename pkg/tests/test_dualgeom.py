import pytest

from gwquintic import dualgeom as dg
from gwquintic.errors import ResonantParameter
from gwquintic.rat import rat
from gwquintic.symexpr import mat_eq, mat_is_zero


@pytest.fixture(scope="module")
def pencil():
    return dg.PencilChart.build()


def test_intersection_entries(pencil):
    g = dg.intersection_form(pencil)
    assert g[0][3] == pencil.tP()
    assert g[2][3] == -pencil.sym("tR")
    assert g[0][0].is_zero()


def test_degree_matrix_relation(pencil):
    assert mat_is_zero(dg.r_relation_residual(pencil))
    assert mat_is_zero(dg.v_antisymmetry_residual(pencil))


def test_christoffel_components(pencil):
    gamma = dg.christoffel(pencil)
    assert gamma[0][0][0] == pencil.sym("s", -1).scale(-2)
    assert gamma[3][0][0] == pencil.sym("tS") * pencil.sym("s", -2) * rat(2)
    assert gamma[3][1][2] == pencil.sym("s", -1)
    assert gamma[1][2][2].is_zero()
    exp = dg.expected_christoffel(pencil)
    for a in range(4):
        for b in range(4):
            for c in range(4):
                assert (gamma[a][b][c] - exp[a][b][c]).is_zero()


def test_christoffel_relations(pencil):
    assert dg.gamma_lowered_residuals(pencil) == []
    assert dg.gamma_product_residuals(pencil) == []


def test_period_system(pencil):
    x = dg.general_period(pencil)
    assert dg.period_system_residuals(pencil, x) == []
    # the inverse-power coordinate solves the doubled first equation alone
    p1 = pencil.sym("s", -1)
    gamma = dg.christoffel(pencil)
    grad = [pencil.d(i, p1) for i in range(4)]
    res = pencil.d(0, grad[0])
    for c in range(4):
        res = res - gamma[c][0][0] * grad[c]
    assert res.is_zero()


def test_dual_metric_and_tau(pencil):
    dm = dg.dual_metric(pencil)
    assert mat_eq(dm, dg.expected_dual_metric(pencil.table))
    assert dm[0][3] == pencil.table.const(-1)
    assert dg.tau_identity_residual(pencil).is_zero()


def test_dual_product():
    ch0 = dg.Lambda0Chart.build()
    cmat = ch0.c_matrices()
    assert all(r.is_zero() for r in dg.euler_inverse_residual(ch0, cmat))
    einv = dg.euler_inverse(ch0)
    assert einv[2] == ch0.sym("tR") * ch0.sym("tP", -2)
    assert dg.star_unit_residuals(ch0, cmat) == []
    assert dg.star_associativity_residuals(ch0, cmat) == []
    sm = dg.star_matrices(ch0, cmat)
    # the last basis field star anything lands on the last component over tP
    assert sm[3][0][3] == ch0.sym("tP", -1)
    assert all(sm[3][0][k].is_zero() for k in range(3))
    # unit action reproduces the second basis field
    e = dg.euler_field(ch0)
    v = dg.star_product(ch0, cmat, e, dg.basis_vector(ch0, 1))
    assert v[1] == ch0.table.one() and v[0].is_zero()


def test_dual_energy(pencil):
    ch0 = dg.Lambda0Chart.build()
    assert dg.dual_energy_residual(ch0).is_zero()


def test_dual_potential_ledger():
    chd = dg.DualChart.build()
    h = dg.dual_potential_hessian(chd)
    assert h[3][0] == chd.sym("logp1")
    assert h[2][1] == -chd.sym("logp1")
    assert h[3][3].is_zero()
    assert mat_eq(h, dg.expected_dual_hessian(chd))
    assert dg.dual_homogeneity_residual(chd).is_zero()
    assert dg.dual_wdvv_residuals(chd) == []


def test_resonant_rejected():
    with pytest.raises(ResonantParameter):
        dg.TwistedChart.build(rat(2))


@pytest.mark.parametrize("nu", [rat(1, 3), rat(-2, 5), rat(5, 7)])
def test_twisted_periods(nu):
    ch = dg.TwistedChart.build(nu)
    ps = dg.twisted_periods(ch)
    for p in ps:
        assert dg.twisted_system_residuals(ch, p) == []
    assert dg.ladder_residuals(ch) == []
    assert dg.inverse_chart_residuals(ch) == []
    assert dg.hessian_form_residuals(ch) == []
    assert dg.laplace_residuals(ch) == []


def test_ladder_example():
    nu = rat(1, 3)
    ch = dg.TwistedChart.build(nu)
    p = dg.twisted_periods(ch)
    pm1 = dg.twisted_periods(ch, shift=-1)
    assert ch.d(0, p[0]) == pm1[0] * (nu - 1)
    assert ch.d(0, p[3]) == pm1[3] * (nu + 1)


def test_zero_parameter_limit(pencil):
    """With the deformation parameter set to zero, the coefficient pattern
    collapses to the undeformed coordinates."""
    nu = rat(0)
    s = pencil.sym("s")
    tQ, tR, tS = (pencil.sym(n) for n in ("tQ", "tR", "tS"))
    f0, f1 = pencil.f0(0), pencil.f0(1)
    p3 = tR + pencil.sym("s", -1) * f1 * nu
    p4 = (s * tS + tQ * tR * (nu + 1)
          + pencil.sym("s", -1) * (tQ * f1 - f0.scale(2)) * ((nu + 1) * nu))
    expect = dg.dual_flat_coordinates(pencil)
    assert p3 == expect[2]
    assert p4 == expect[3]
