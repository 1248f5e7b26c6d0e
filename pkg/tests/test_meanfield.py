import pytest

from gwquintic import meanfield as mf
from gwquintic.rat import rat
from gwquintic.series import compare_to_depth


@pytest.fixture(scope="module")
def op(small_engine):
    return small_engine.order_params()


@pytest.fixture(scope="module")
def chart(small_engine):
    return small_engine.chart()


def test_u_s_triangle_rows(op):
    us = op.u_S
    # degree-by-degree coefficient triangles, factorials included
    assert us.coeff({"t0P": 1}) == rat(1)
    assert us.coeff({"t0P": 1, "t1P": 1}) == rat(1)
    assert us.coeff({"t0P": 2, "t2P": 1}) == rat(1, 2)
    assert us.coeff({"t0P": 1, "t1P": 2}) == rat(1)
    assert us.coeff({"t0P": 3, "t3P": 1}) == rat(1, 6)
    assert us.coeff({"t0P": 2, "t2P": 1, "t1P": 1}) == rat(3, 2)
    assert us.coeff({"t0P": 1, "t1P": 3}) == rat(1)
    assert us.coeff({"t0P": 4, "t4P": 1}) == rat(1, 24)
    assert us.coeff({"t0P": 3, "t3P": 1, "t1P": 1}) == rat(4, 6)
    assert us.coeff({"t0P": 3, "t2P": 2}) == rat(1, 2)
    assert us.coeff({"t0P": 2, "t2P": 1, "t1P": 2}) == rat(3)
    assert us.coeff({"t0P": 1, "t1P": 4}) == rat(1)


def test_u_s1_triangle_rows(op):
    u1 = op.u_S1
    assert u1.coeff({}) == rat(1)
    assert u1.coeff({"t1P": 1}) == rat(1)
    assert u1.coeff({"t0P": 1, "t2P": 1}) == rat(1)   # 2 * t0P * t2P / 2!
    assert u1.coeff({"t1P": 2}) == rat(1)
    assert u1.coeff({"t0P": 2, "t3P": 1}) == rat(1, 2)  # 3 * t0P^2 * t3P / 3!
    assert u1.coeff({"t0P": 1, "t2P": 1, "t1P": 1}) == rat(3)  # 6 / 2!
    assert u1.coeff({"t1P": 3}) == rat(1)


def test_u_r_leading_terms(op):
    ur = op.u_R
    assert ur.coeff({"t0Q": 1}) == rat(1)
    assert ur.coeff({"t0Q": 1, "t1P": 1}) == rat(1)
    assert ur.coeff({"t1Q": 1, "t0P": 1}) == rat(1)
    assert ur.coeff({"t2Q": 1, "t0P": 2}) == rat(1, 2)
    assert ur.coeff({"t1Q": 1, "t0P": 1, "t1P": 1}) == rat(2)


def test_triple_routes_agree(op, chart):
    assert mf.lagrange_u_s(chart) == op.u_S
    assert mf.partition_sum_u_s(chart) == op.u_S
    assert mf.lagrange_u_r(chart) == op.u_R
    assert mf.d_operator(chart, op.u_S) == op.u_R


def test_flow_jet_formula(op, chart):
    # derivative with respect to a descendant level takes jet form
    for n in (1, 2):
        lhs = op.u_S.derive(f"t{n}P")
        rhs = op.u_S1 * op.us_pow(n).scale(rat(1, [1, 1, 2][n]))
        eq, depth, _ = compare_to_depth(lhs, rhs, chart.dt)
        assert eq and depth >= chart.dt - 1


def test_partial_t1p_leading(op):
    d = op.u_S.derive("t1P")
    assert d.coeff({"t0P": 1}) == rat(1)
    assert d.coeff({"t0P": 1, "t1P": 1}) == rat(2)


def test_small_phase_restriction_of_params(op, chart):
    small = chart.small_phase_names()
    assert op.u_S.restrict_zero(small) == chart.t(0, "P")
    assert op.u_R.restrict_zero(small) == chart.t(0, "Q")
    assert op.u_Q.restrict_zero(small) == chart.t(0, "R")
    assert op.u_P.restrict_zero(small) == chart.t(0, "S")


def test_jets_lead_with_their_couplings(op, chart):
    # the zeroth jets restrict to the small-phase coordinates exactly; the
    # higher jets start with the matching coupling (the first space jet
    # carries the unit offset that the level-one shift absorbs)
    small = chart.small_phase_names()
    dual = {"S": "P", "R": "Q", "Q": "R", "P": "S"}
    for sector in ("S", "R", "Q", "P"):
        assert (op.jet(sector, 0).restrict_zero(small)
                == chart.t(0, dual[sector]))
    for sector in ("S", "R", "Q", "P"):
        kmax = chart.ndesc if sector in ("S", "R") else 2
        for k in range(1, kmax + 1):
            jet = op.jet(sector, k)
            offset = rat(1) if (sector, k) == ("S", 1) else rat(0)
            assert jet.constant_term() == offset
            # the degree-zero instanton sector: the linear part is the
            # matching coupling (positive q degrees carry corrections)
            deg1 = (jet.truncate_counted(1) - jet.constant_term()
                    ).restrict_zero(["q"])
            assert deg1 == chart.t(k, dual[sector])


def test_closed_jets_match_derivatives(op):
    for k in (1, 2, 3, 4):
        direct = op.u_S
        for _ in range(k):
            direct = direct.derive("t0P")
        eq, _, _ = compare_to_depth(op.jet_s(k), direct)
        assert eq
    for k in (1, 2):
        direct = op.u_R
        for _ in range(k):
            direct = direct.derive("t0P")
        eq, _, _ = compare_to_depth(op.jet_r(k), direct)
        assert eq


def test_lg_criticality(op):
    grads = mf.lg_gradients(op)
    assert all(v.is_zero() for v in grads.values())


def test_lg_small_phase_collapse(small_engine):
    # with only the space variable on, the first equation collapses
    chart = small_engine.chart()
    op = small_engine.order_params()
    small = chart.small_phase_names()
    assert op.sums("P", 0).restrict_zero(small) == chart.t(0, "P")


def test_renormalized_couplings(op, chart):
    ren = mf.renormalized_couplings(op)
    assert ren[("P", 0)] == op.u_S
    assert ren[("Q", 0)] == op.u_R
    small = chart.small_phase_names()
    for s in mf.SECTORS:
        for n in range(chart.ndesc + 1):
            assert (ren[(s, n)].restrict_zero(small)
                    == chart.t(n, s).restrict_zero(small))


def test_free_energy_identities(small_engine):
    chart = small_engine.chart()
    op = small_engine.order_params()
    f = small_engine.free_energy0()
    small = chart.small_phase_names()
    tP, tQ, tR, tS = (chart.t(0, a) for a in mf.SECTORS)
    expect = (tP * tP * tS).scale(rat(1, 2)) + tP * tQ * tR \
        + small_engine.f0_potential().eval(tQ)
    eq, depth, _ = compare_to_depth(f.restrict_zero(small), expect, chart.dt)
    assert eq and depth == chart.dt
    eq, depth, _ = compare_to_depth(mf.string_residual(chart, f),
                                    chart.zero(), chart.dt)
    assert eq
    eq, depth, _ = compare_to_depth(mf.dilaton_residual(chart, f),
                                    chart.zero(), chart.dt)
    assert eq
    assert mf.grading_residual(chart, f).is_zero()
    # mixed second derivative restricts to the space variable
    h = f.derive("t0P").derive("t0S")
    eq, _, _ = compare_to_depth(h.restrict_zero(small), tP, chart.dt)
    assert eq


def test_trr_samples(small_engine):
    chart = small_engine.chart()
    f = small_engine.free_energy0()
    for triple in (((1, "P"), (0, "Q"), (0, "R")),
                   ((1, "Q"), (1, "P"), (0, "S")),
                   ((2, "R"), (0, "P"), (1, "Q")),
                   ((1, "S"), (2, "P"), (0, "P")),
                   ((3, "P"), (1, "R"), (0, "Q"))):
        r = mf.trr_residual(chart, f, *triple)
        eq, _, _ = compare_to_depth(r, chart.zero(), chart.dt)
        assert eq


def test_hierarchy_flows(small_engine):
    op = small_engine.order_params()
    flows = mf.hierarchy_flow_residuals(op, window=small_engine.cfg.kz)
    assert all(r[1] for rows in flows.values() for r in rows)
    # vanishing flows stay vanishing
    zero_keys = [("S", "Q"), ("S", "R"), ("S", "S"), ("R", "R"), ("R", "S"),
                 ("Q", "S")]
    for key in zero_keys:
        lhs = mf.loop_apply(op.chart, key[1], op.u[key[0]],
                            small_engine.cfg.kz)
        assert all(c.is_zero() for c in lhs.terms.values())


def test_one_point_forms(small_engine):
    op = small_engine.order_params()
    f = small_engine.free_energy0()
    res = mf.one_point_residuals(op, f, window=small_engine.cfg.kz)
    assert all(r[1] for rows in res.values() for r in rows)


def test_two_point_pairing_big(small_engine):
    op = small_engine.order_params()
    assert mf.two_point_pairing_big_residuals(op, small_engine.cfg.kz) == []


def test_constitutive_samples(small_engine):
    op = small_engine.order_params()
    f = small_engine.free_energy0()
    samples = [(0, "P", 0, "S"), (1, "P", 0, "Q"), (0, "Q", 1, "R"),
               (2, "P", 1, "P")]
    rows = mf.constitutive_residuals(op, f, small_engine.cfg.kz, samples)
    assert all(r[1] for r in rows)


def test_flow_commutativity(small_engine):
    op = small_engine.order_params()
    pairs = [((0, "P"), (1, "Q")), ((1, "P"), (2, "P")),
             ((0, "Q"), (0, "R")), ((1, "R"), (0, "S"))]
    rows = mf.flow_commutativity_residuals(op, pairs)
    assert all(r[3] for r in rows)
