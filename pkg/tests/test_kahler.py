import pytest

from gwquintic import kahler as kh
from gwquintic.rat import rat
from gwquintic.symexpr import mat_eq, mat_is_zero


@pytest.fixture(scope="module")
def tch():
    return kh.TChart.build()


@pytest.fixture(scope="module")
def hk():
    return kh.HKChart.build()


def test_frame_columns(tch):
    assert kh.frame_consistency_residuals(tch) == []


def test_omega_entries(tch):
    om = kh.omega_coordinates(tch)
    e2 = tch.sym("epP", 2)
    assert om[1][2] == -e2
    assert om[0][2].is_zero()
    assert om[0][3] == e2
    assert om[0][1] == e2 * tch.sym("tR") * rat(2)
    assert mat_eq(om, kh.expected_omega(tch))


def test_omega_closed_and_darboux(tch):
    assert kh.d_omega_residuals(tch) == []
    assert kh.darboux_residuals(tch) == []


def test_tau_coordinate_rows(tch):
    tau = kh.tau_on_coordinates(tch, prefactored=False)
    row_r, row_s = kh.expected_tau_simple_rows(tch)
    assert tau[2] == row_r
    assert tau[3] == row_s


def test_hermitian_ledger(tch):
    h = kh.hermitian_matrix(tch)
    assert mat_eq(h, kh.expected_hermitian(tch))
    epp = tch.sym("epP") * tch.sym("epPb")
    assert h[0][3] == epp          # the clean corner entry
    assert h[2][2].is_zero()
    assert h[2][3].is_zero()
    assert h[3][3].is_zero()


def test_hk_metric_routes(hk):
    k0, h = kh.hk_metric(hk)
    assert mat_eq(h, kh.expected_hk_metric(hk))
    assert mat_eq(h, kh.hk_metric_from_form(hk))
    assert kh.hk_metric_inverse_check(hk)
    # the mixed corner derivative of the potential difference is a constant
    assert h[0][3] == hk.table.one()
    assert h[2][2].is_zero()


def test_connection_and_parallel(hk):
    assert mat_eq(kh.connection_matrix(hk, "u"), kh.expected_connection_u(hk))
    assert mat_eq(kh.connection_matrix(hk, "v"), kh.expected_connection_v(hk))
    for y in kh.HK:
        assert mat_is_zero(kh.nabla_omega_residual(hk, y))
    # the metric is independent of the last two coordinates
    _, h = kh.hk_metric(hk)
    for y in ("w", "x"):
        assert all(hk.d(y, h[a][b]).is_zero()
                   for a in range(4) for b in range(4))
    assert mat_is_zero(kh.darboux_from_potential_residual(hk))


def test_hk_products(hk):
    cs = kh.hk_c_matrices(hk)
    want = kh.expected_hk_c(hk)
    for i in range(4):
        assert mat_eq(cs[i], want[i])


def test_tau_structure(hk):
    n, bad = kh.tau_hk_structure_residual(hk)
    assert bad == []
    # the block entries are differences of barred and unbarred functions
    u1, v = hk.sym("u", -1), hk.sym("v")
    alpha = v * u1 * hk.f0(2) - hk.f0(1)
    assert n[0][2] == alpha - alpha.conj()
    c = -hk.f0(2)
    assert n[1][2] == c - c.conj()
    assert mat_is_zero(kh.tau_square_residual(hk))


def test_compatibility(hk):
    res = kh.compatibility_residuals(hk)
    assert all(v[2] for v in res.values())
    assert mat_is_zero(res[("w", "x")][0])
    lhs = res[("u", "x")][0]
    assert (lhs[0][3] + hk.sym("u", -2)).is_zero()
    # the (u, v) pair carries the third and fourth derivative entries
    lhs_uv = res[("u", "v")][0]
    assert not mat_is_zero(lhs_uv)
    assert (lhs_uv[0][1] + hk.sym("u", -2)).is_zero()


def test_cbar_pattern(hk):
    pat = kh.cbar_commutator_pattern(hk)
    names = {(a, b) for a, b, _ in pat}
    assert names == {("u", "ubar"), ("u", "vbar"), ("v", "ubar"),
                     ("v", "vbar")}
    vv = next(c for a, b, c in pat if (a, b) == ("v", "vbar"))
    u1, ub1 = hk.sym("u", -1), hk.sym("ub", -1)
    assert (vv[0][2] - (hk.f0b(3) - hk.f0(3)) * u1 * ub1).is_zero()
    cb = kh.cbar_matrices(hk)
    assert (cb[3][0][3] - ub1).is_zero()
    assert all(cb[3][a][b].is_zero() for a in range(4) for b in range(4)
               if (a, b) != (0, 3))


def test_monodromy():
    ch = kh.MonodromyChart.build()
    t = kh.monodromy_transition(ch)
    e = kh.exp_nilpotent()
    assert all(t[i][j] == e[i][j] for i in range(4) for j in range(4))
    # rows ordered (P, Q, R, S); the reversed-basis corner entries
    assert e[0][2] == rat(5, 2)
    assert e[0][3] == rat(-5, 6)
    assert kh.nilpotency_order() == 4
    # the nilpotent matrix is minus the degree-one cup action
    n = kh.nilpotent_matrix()
    cup = kh.cup_matrix()
    assert all(n[i][j] == -cup[i][j] for i in range(4) for j in range(4))
