from gwquintic import smallphase as sp
from gwquintic.rat import rat
from gwquintic.symexpr import mat_eq, mat_is_zero, mat_mul


def chart():
    return sp.SmallChart.build()


def test_three_point_values():
    ch = chart()
    f = sp.free_energy_small(ch)
    d3 = sp.third_derivatives(ch)
    # the three nonzero triple intersections, read off at the cubic order
    pps = d3[0][0][3]
    pqr = d3[0][1][2]
    qqq = d3[1][1][1].subs_zero(["tQ"])  # constant part of f0'''
    assert pps == ch.table.one()
    assert pqr == ch.table.one()
    assert qqq == ch.f0(3)


def test_euler_annihilates():
    assert sp.euler_residual(chart()).is_zero()


def test_hessian_matrix():
    ch = chart()
    assert mat_eq(sp.hessian_small(ch), sp.expected_hessian(ch))


def test_entropy_value():
    ch = chart()
    tP, tQ, tR, tS = (ch.sym(n) for n in ("tP", "tQ", "tR", "tS"))
    want = (tP * tP * tS + (tP * tQ * tR).scale(2)
            + tQ * ch.f0(1) - ch.f0(0))
    assert sp.entropy_small(ch) == want


def test_quantum_products():
    ch = chart()
    cps = [sp.quantum_product(ch, i) for i in range(4)]
    ident = [[ch.table.one() if i == j else ch.table.zero() for j in range(4)]
             for i in range(4)]
    assert mat_eq(cps[0], ident)
    assert cps[1][1][2] == ch.f0(3)
    assert mat_is_zero(mat_mul(cps[3], cps[3]))
    for i in range(4):
        for j in range(4):
            assert mat_eq(mat_mul(cps[i], cps[j]), mat_mul(cps[j], cps[i]))


def test_wdvv_full_sweep():
    assert sp.wdvv_check(chart()) == []


def test_s_matrix_leading_parts():
    ch = chart()
    deg = 4
    s = sp.s_matrix(ch, deg + 3, deg)
    # z^0 part is the constant pairing
    for i in range(4):
        for j in range(4):
            c = s[i][j].coeff((0,))
            want = ch.table.const(sp.eta_entry(i, j))
            assert (c - want).is_zero()
    # z^-1 part is the second-derivative matrix
    hess = sp.hessian_small(ch)
    for i in range(4):
        for j in range(4):
            assert (s[i][j].coeff((-1,)) - hess[i][j]).is_zero()


def test_s_matrix_examples():
    ch = chart()
    deg = 4
    s = sp.s_matrix(ch, deg + 3, deg)
    e = sp.exp_tp_over_z(ch, deg + 3, deg)
    assert (s[3][0] - e).is_zero()       # bottom-left entry is the pure phase
    assert s[2][2].is_zero()             # middle entries vanish
    assert s[3][1].is_zero()


def test_qde_and_orthogonality():
    ch = chart()
    assert sp.qde_check(ch, 7, 4) == []
    assert sp.orthogonality_check(ch, 7, 4) == []


def test_orthogonality_ps_entry():
    ch = chart()
    deg = 4
    wide = 2 * (deg + 3)
    s = sp.s_matrix(ch, wide, deg)
    sneg = [[s[i][j].substitute_z_sign() for j in range(4)] for i in range(4)]
    acc = None
    for d in range(4):
        e = sp.ETA_PAIR[d]
        term = s[d][0] * sneg[e][3]
        acc = term if acc is None else acc + term
    got = acc.coeff((0,))
    assert (sp._filter_tp_degree(ch, got - ch.table.one(), deg)).is_zero()
    for p in acc.powers():
        if p != (0,) and abs(p[0]) <= deg:
            assert sp._filter_tp_degree(ch, acc.coeff(p), deg).is_zero()


def test_two_point_forms():
    ch = chart()
    deg, win = 4, 7
    v = sp.two_point_small(ch, win, deg)
    # the (Q, R) entry is the double expansion, and (P, R) factorizes
    d = sp.double_expansion_exp(ch, win, deg)
    assert (v[1][2] - d).is_zero()
    tQ = ch.sym("tQ")
    got = v[0][2].coeff((-1, -1))
    assert (got - tQ).is_zero()
    assert sp.two_point_symmetry_check(ch, win, deg)
    assert sp.two_point_pairing_check(ch, win, deg) == []


def test_expansion_mode_substitution():
    from gwquintic.mirror import genus0_potential, mirror_map, pf_solve
    ch = chart()
    basis = pf_solve(3)
    pot = genus0_potential(basis, mirror_map(basis))
    table = sp.mirror_series_chart(5, 3)
    cq = sp.quantum_product(ch, 1)
    f3 = sp.substitute_potential(ch, cq[1][2], table, pot)
    assert f3.coeff({}) == rat(5)
    for d in (1, 2, 3):
        assert f3.coeff({"q": d}) == rat(d) ** 3 * pot.a[d]
    # a symbolic identity remains an identity after specialization
    res = sp.substitute_potential(ch, sp.euler_residual(ch), table, pot)
    assert res.is_zero()
    hqq = sp.substitute_potential(ch, sp.hessian_small(ch)[1][1], table, pot)
    assert hqq.coeff({"q": 1}) == rat(2875)


def test_deformed_coordinates():
    ch = chart()
    assert sp.deformed_coordinates_match_s_columns(ch, 7, 4)
