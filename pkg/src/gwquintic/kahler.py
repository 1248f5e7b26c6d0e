"""Flat frame, holomorphic symplectic form, real structure, pseudo-Hermitian
metric, compatibility commutators, and monodromy.

Two charts: the flat-coordinate chart (with the group-like exponential of
the first coordinate and a barred twin of everything), and the adapted
chart (u, v, w, x) in which the symplectic form takes Darboux shape and the
metric comes from one holomorphic function.

Convention notes, fixed here once:

* the frame comes in two normalizations differing by the exponential
  prefactor; the real structure fixes the prefactor-free sections, which
  reproduces the transition-matrix form (the prefactored convention differs
  by the gauge ratio and yields the Hermitian-metric ledger).  Both are
  exposed; every convention-insensitive quantity (the involution square,
  the conjugated multiplication matrices and their commutators) is
  identical either way.
* the imaginary unit is carried as an overall convention: the metric and
  the potential are handled with i stripped (coefficients stay rational),
  which cancels in every identity checked here.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PreconditionError
from .rat import ONE, rat
from .symexpr import (SymExpr, SymTable, commutator, mat_eq, mat_is_zero,
                      mat_mul, mat_sub)

F0_ORDER_MAX = 8
IDX = ("P", "Q", "R", "S")
ETA_PAIR = (3, 2, 1, 0)


def unitriangular_inverse_upper(table: SymTable, m):
    """Invert an upper-triangular matrix with unit diagonal."""
    n = len(m)
    z = table.zero()
    inv = [[table.one() if i == j else z for j in range(n)] for i in range(n)]
    for i in range(n - 1, -1, -1):
        for j in range(i + 1, n):
            acc = z
            for k in range(i + 1, j + 1):
                acc = acc + m[i][k] * inv[k][j]
            inv[i][j] = -acc
    return inv


def triangular_inverse_upper(table: SymTable, m):
    """Invert an upper-triangular matrix with invertible monomial diagonal."""
    n = len(m)
    z = table.zero()
    inv = [[z for _ in range(n)] for _ in range(n)]
    for i in range(n - 1, -1, -1):
        inv[i][i] = m[i][i].invert()
        for j in range(i + 1, n):
            acc = z
            for k in range(i + 1, j + 1):
                acc = acc + m[i][k] * inv[k][j]
            inv[i][j] = -(m[i][i].invert() * acc)
    return inv


# -- flat-coordinate chart ------------------------------------------------------


@dataclass
class TChart:
    table: SymTable

    @classmethod
    def build(cls) -> "TChart":
        st = SymTable()
        st.add("epP", "gauge")
        st.add("epPb", "gauge")
        for n in ("tQ", "tR", "tS", "tQb", "tRb", "tSb"):
            st.add(n)
        st.add_function_family("f0", F0_ORDER_MAX)
        st.add_function_family("f0b", F0_ORDER_MAX)
        for d in ("dP", "dQ", "dR", "dS", "dPb", "dQb", "dRb", "dSb"):
            st.add_derivation(d)
        st.set_rule("dP", "epP", st.sym("epP"))
        st.set_rule("dPb", "epPb", st.sym("epPb"))
        st.set_rule("dQ", "tQ", st.one())
        st.set_rule("dR", "tR", st.one())
        st.set_rule("dS", "tS", st.one())
        st.set_rule("dQb", "tQb", st.one())
        st.set_rule("dRb", "tRb", st.one())
        st.set_rule("dSb", "tSb", st.one())
        for k in range(F0_ORDER_MAX):
            st.set_rule("dQ", f"f0^({k})", st.sym(f"f0^({k + 1})"))
            st.set_rule("dQb", f"f0b^({k})", st.sym(f"f0b^({k + 1})"))
        st.set_conjugate_pair("epP", "epPb")
        st.set_conjugate_pair("tQ", "tQb")
        st.set_conjugate_pair("tR", "tRb")
        st.set_conjugate_pair("tS", "tSb")
        for k in range(F0_ORDER_MAX + 1):
            st.set_conjugate_pair(f"f0^({k})", f"f0b^({k})")
        return cls(table=st)

    def sym(self, n: str, p: int = 1) -> SymExpr:
        return self.table.sym(n, p)

    def f0(self, k: int) -> SymExpr:
        return self.table.sym(f"f0^({k})")

    def d(self, i: int, e: SymExpr) -> SymExpr:
        return e.derive("d" + IDX[i])


def frame_matrix(ch: TChart):
    """Rows: the prefactor-free sections; columns: coordinate fields."""
    st = ch.table
    tQ, tR, tS = ch.sym("tQ"), ch.sym("tR"), ch.sym("tS")
    f0, f1, f2 = ch.f0(0), ch.f0(1), ch.f0(2)
    z, one = st.zero(), st.one()
    return [
        [one, -tQ, tQ * f2 - f1 - tR, -(tQ * f1 - f0.scale(2) + tS - tQ * tR)],
        [z, one, -f2, f1 - tR],
        [z, z, one, -tQ],
        [z, z, z, one],
    ]


def s_matrix_at_minus_one(ch: TChart):
    """The one-slot pairing matrix evaluated at z = -1 with the group-like
    exponential; entry [a][b] pairs row a with column b."""
    st = ch.table
    e = ch.sym("epP", -1)
    tQ, tR, tS = ch.sym("tQ"), ch.sym("tR"), ch.sym("tS")
    f0, f1, f2 = ch.f0(0), ch.f0(1), ch.f0(2)
    z = st.zero()
    s = [[z] * 4 for _ in range(4)]
    s[0][0] = e * (-tS + tQ * tR - (tQ * f1 - f0.scale(2)))
    s[1][0] = e * (-tR + tQ * f2 - f1)
    s[2][0] = e * (-tQ)
    s[3][0] = e
    s[0][1] = e * (-tR + f1)
    s[1][1] = e * (-f2)
    s[2][1] = e
    s[0][2] = e * (-tQ)
    s[1][2] = e
    s[0][3] = e
    return s


def frame_consistency_residuals(ch: TChart):
    """Prefactored sections against the z = -1 pairing columns."""
    e = ch.sym("epP", -1)
    m = frame_matrix(ch)
    s = s_matrix_at_minus_one(ch)
    bad = []
    for a in range(4):
        for g in range(4):
            want = s[ETA_PAIR[g]][a]
            have = e * m[a][g]
            if not (want - have).is_zero():
                bad.append((a, g))
    return bad


def omega_frame_pairing(ch: TChart):
    """Values of the two-form on the prefactor-free sections."""
    e2 = ch.sym("epP", 2)
    z = ch.table.zero()
    out = [[z] * 4 for _ in range(4)]
    out[0][3] = e2
    out[3][0] = -e2
    out[1][2] = -e2
    out[2][1] = e2
    return out


def omega_coordinates(ch: TChart):
    """Matrix of the two-form on coordinate fields."""
    m = frame_matrix(ch)
    a = unitriangular_inverse_upper(ch.table, m)  # coordinate fields in sections
    pair = omega_frame_pairing(ch)
    out = [[ch.table.zero()] * 4 for _ in range(4)]
    for al in range(4):
        for be in range(4):
            acc = ch.table.zero()
            for mu in range(4):
                for nu in range(4):
                    acc = acc + a[al][mu] * a[be][nu] * pair[mu][nu]
            out[al][be] = acc
    return out


def expected_omega(ch: TChart):
    e2 = ch.sym("epP", 2)
    tR = ch.sym("tR")
    z = ch.table.zero()
    return [[z, e2 * tR.scale(2), z, e2],
            [-(e2 * tR.scale(2)), z, -e2, z],
            [z, e2, z, z],
            [-e2, z, z, z]]


def d_omega_residuals(ch: TChart):
    om = omega_coordinates(ch)
    bad = []
    for a in range(4):
        for b in range(4):
            for c in range(4):
                acc = ch.d(a, om[b][c]) + ch.d(b, om[c][a]) + ch.d(c, om[a][b])
                if not acc.is_zero():
                    bad.append((a, b, c))
    return bad


def darboux_residuals(ch: TChart):
    """The form against d(adapted coordinates) wedged pairwise."""
    e = ch.sym("epP")
    tQ, tR, tS = ch.sym("tQ"), ch.sym("tR"), ch.sym("tS")
    u = e
    v = e * tQ
    w = e * tR
    x = e * (tS + tQ * tR)

    def wedge(f, g):
        df = [ch.d(a, f) for a in range(4)]
        dg = [ch.d(a, g) for a in range(4)]
        return [[df[a] * dg[b] - df[b] * dg[a] for b in range(4)]
                for a in range(4)]

    om = omega_coordinates(ch)
    cand = wedge(w, v)  # dw ^ dv = -dv ^ dw
    dux = wedge(u, x)
    total = [[cand[a][b] + dux[a][b] for b in range(4)] for a in range(4)]
    return [] if mat_eq(om, total) else [(a, b) for a in range(4)
                                         for b in range(4)
                                         if not (om[a][b] - total[a][b]).is_zero()]


def period_vector_residuals(ch: TChart):
    """Expansion of the first coordinate field in the sections, evaluated
    where the other polynomial coordinates vanish: the coefficients are the
    classical period combinations of the potential."""
    m = frame_matrix(ch)
    a = unitriangular_inverse_upper(ch.table, m)
    tQ = ch.sym("tQ")
    want = [ch.table.one(), tQ, ch.f0(1), tQ * ch.f0(1) - ch.f0(0).scale(2)]
    bad = []
    for mu in range(4):
        got = a[0][mu].subs_zero(["tR", "tS"])
        if not (got - want[mu]).is_zero():
            bad.append(mu)
    return bad


def tau_on_coordinates(ch: TChart, prefactored: bool):
    """Matrix T[a][b]: the image of the a-th coordinate field has component
    T[a][b] on the b-th.  prefactored=False fixes the prefactor-free
    sections; True fixes the exponential-weighted ones (extra gauge ratio).
    """
    m = frame_matrix(ch)
    a = unitriangular_inverse_upper(ch.table, m)
    out = [[ch.table.zero()] * 4 for _ in range(4)]
    for al in range(4):
        for be in range(4):
            acc = ch.table.zero()
            for mu in range(4):
                acc = acc + a[al][mu].conj() * m[mu][be]
            out[al][be] = acc
    if prefactored:
        ratio = ch.sym("epPb") * ch.sym("epP", -1)
        out = [[ratio * x for x in row] for row in out]
    return out


def expected_tau_simple_rows(ch: TChart):
    """The two clean rows of the involution on coordinate fields."""
    tQ, tQb = ch.sym("tQ"), ch.sym("tQb")
    z, one = ch.table.zero(), ch.table.one()
    row_s = [z, z, z, one]
    row_r = [z, z, one, tQb - tQ]
    return row_r, row_s


def hermitian_matrix(ch: TChart):
    """Pairing h with the imaginary unit stripped: entry (a, b) is the form
    evaluated on the a-th field and the involution of the b-th."""
    om = omega_coordinates(ch)
    tau = tau_on_coordinates(ch, prefactored=True)
    out = [[ch.table.zero()] * 4 for _ in range(4)]
    for a in range(4):
        for b in range(4):
            acc = ch.table.zero()
            for c in range(4):
                acc = acc + om[a][c] * tau[b][c]
            out[a][b] = acc
    return out


def expected_hermitian(ch: TChart):
    """Upper entries per the printed ledger; the lower triangle is forced by
    the pseudo-Hermitian property (negated conjugate, with the imaginary
    unit stripped)."""
    epp = ch.sym("epP") * ch.sym("epPb")
    tQ, tR, tS = ch.sym("tQ"), ch.sym("tR"), ch.sym("tS")
    tQb, tSb = ch.sym("tQb"), ch.sym("tSb")
    tRb = ch.sym("tRb")
    f0, f1, f2 = ch.f0(0), ch.f0(1), ch.f0(2)
    f0b, f1b, f2b = (ch.table.sym(f"f0b^({k})") for k in (0, 1, 2))
    z = ch.table.zero()
    dq = tQ - tQb
    hpp = epp * (-(dq * (f1 + f1b)) + (f0 - f0b).scale(2) - (tS - tSb)
                 - dq * (tR + tRb))
    hpq = epp * (-(dq * f2b) + (f1 - f1b) + (tR + tRb))
    hpr = epp * (-dq)
    hqq = epp * (f2 - f2b)
    out = [[hpp, hpq, hpr, epp],
           [z, hqq, -epp, z],
           [z, z, z, z],
           [z, z, z, z]]
    for a in range(4):
        for b in range(a):
            out[a][b] = -(out[b][a].conj())
    return out


# -- adapted chart ----------------------------------------------------------------


@dataclass
class HKChart:
    table: SymTable

    @classmethod
    def build(cls) -> "HKChart":
        st = SymTable()
        st.add("u", "unit")
        st.add("ub", "unit")
        for n in ("v", "w", "x", "vb", "wb", "xb"):
            st.add(n)
        st.add_function_family("f0", F0_ORDER_MAX)
        st.add_function_family("f0b", F0_ORDER_MAX)
        for d in ("du", "dv", "dw", "dx", "dub", "dvb", "dwb", "dxb"):
            st.add_derivation(d)
        st.set_rule("du", "u", st.one())
        st.set_rule("dv", "v", st.one())
        st.set_rule("dw", "w", st.one())
        st.set_rule("dx", "x", st.one())
        st.set_rule("dub", "ub", st.one())
        st.set_rule("dvb", "vb", st.one())
        st.set_rule("dwb", "wb", st.one())
        st.set_rule("dxb", "xb", st.one())
        for k in range(F0_ORDER_MAX):
            fk1 = st.sym(f"f0^({k + 1})")
            st.set_rule("dv", f"f0^({k})", fk1 * st.sym("u", -1))
            st.set_rule("du", f"f0^({k})",
                        fk1 * st.sym("v") * st.sym("u", -2) * rat(-1))
            fbk1 = st.sym(f"f0b^({k + 1})")
            st.set_rule("dvb", f"f0b^({k})", fbk1 * st.sym("ub", -1))
            st.set_rule("dub", f"f0b^({k})",
                        fbk1 * st.sym("vb") * st.sym("ub", -2) * rat(-1))
        st.set_conjugate_pair("u", "ub")
        st.set_conjugate_pair("v", "vb")
        st.set_conjugate_pair("w", "wb")
        st.set_conjugate_pair("x", "xb")
        for k in range(F0_ORDER_MAX + 1):
            st.set_conjugate_pair(f"f0^({k})", f"f0b^({k})")
        return cls(table=st)

    def sym(self, n: str, p: int = 1) -> SymExpr:
        return self.table.sym(n, p)

    def f0(self, k: int) -> SymExpr:
        return self.table.sym(f"f0^({k})")

    def f0b(self, k: int) -> SymExpr:
        return self.table.sym(f"f0b^({k})")

    def d(self, name: str, e: SymExpr) -> SymExpr:
        return e.derive("d" + name)


HK = ("u", "v", "w", "x")


def hk_potential(ch: HKChart) -> SymExpr:
    u, v, w, x = (ch.sym(n) for n in HK)
    return -(u * u * ch.f0(0)) + u * x - v * w


def hk_potential_bar(ch: HKChart) -> SymExpr:
    return hk_potential(ch).conj()


def coordinate_fields_in_t_basis(ch: HKChart):
    """T[y][a]: the y-th adapted field written on the flat fields."""
    u1 = ch.sym("u", -1)
    u2 = ch.sym("u", -2)
    u3 = ch.sym("u", -3)
    v, w, x = ch.sym("v"), ch.sym("w"), ch.sym("x")
    z = ch.table.zero()
    return [
        [u1, -(v * u2), -(w * u2), -(x * u2 - v * w * u3 * rat(2))],
        [z, u1, z, -(w * u2)],
        [z, z, u1, -(v * u2)],
        [z, z, z, u1],
    ]


def t_fields_in_coordinates(ch: HKChart):
    """S[a][y]: the flat fields written on the adapted ones."""
    u, v, w, x = (ch.sym(n) for n in HK)
    z = ch.table.zero()
    return [
        [u, v, w, x],
        [z, u, z, w],
        [z, z, u, v],
        [z, z, z, u],
    ]


def c_matrices_t(ch: HKChart):
    """Structure constants of the flat-coordinate product, in this ring."""
    z, one = ch.table.zero(), ch.table.one()
    f3 = ch.f0(3)

    def mat(rows):
        return rows

    c_p = [[one if i == j else z for j in range(4)] for i in range(4)]
    c_q = mat([[z, one, z, z], [z, z, f3, z], [z, z, z, one], [z, z, z, z]])
    c_r = mat([[z, z, one, z], [z, z, z, one], [z, z, z, z], [z, z, z, z]])
    c_s = mat([[z, z, z, one], [z, z, z, z], [z, z, z, z], [z, z, z, z]])
    return [c_p, c_q, c_r, c_s]


def hk_c_matrices(ch: HKChart):
    """C[y]: matrix of multiplication by the y-th adapted field."""
    t_in = coordinate_fields_in_t_basis(ch)
    s_out = t_fields_in_coordinates(ch)
    cts = c_matrices_t(ch)
    out = []
    for y in range(4):
        rows = []
        for zf in range(4):
            # product of fields y and zf, through the flat basis
            acc_t = [ch.table.zero()] * 4
            for a in range(4):
                if t_in[y][a].is_zero():
                    continue
                for b in range(4):
                    if t_in[zf][b].is_zero():
                        continue
                    coef = t_in[y][a] * t_in[zf][b]
                    for c in range(4):
                        if not cts[a][b][c].is_zero():
                            acc_t[c] = acc_t[c] + coef * cts[a][b][c]
            comp = [ch.table.zero()] * 4
            for c in range(4):
                if acc_t[c].is_zero():
                    continue
                for yy in range(4):
                    comp[yy] = comp[yy] + acc_t[c] * s_out[c][yy]
            rows.append(comp)
        out.append([[rows[zf][yy] for yy in range(4)] for zf in range(4)])
    return out


def expected_hk_c(ch: HKChart):
    u1 = ch.sym("u", -1)
    u2 = ch.sym("u", -2)
    u3 = ch.sym("u", -3)
    u4 = ch.sym("u", -4)
    v, w, x = ch.sym("v"), ch.sym("w"), ch.sym("x")
    f3 = ch.f0(3)
    z = ch.table.zero()
    cu = [[u1, -(v * u2), -(w * u2) + v * v * u3 * f3,
           v ** 3 * u4 * f3 - x * u2 + v * w * u3 * rat(2)],
          [z, u1, -(v * u2 * f3), -(w * u2) - v * v * u3 * f3],
          [z, z, u1, -(v * u2)],
          [z, z, z, u1]]
    cv = [[z, u1, -(v * u2 * f3), -(w * u2) - v * v * u3 * f3],
          [z, z, u1 * f3, v * u2 * f3],
          [z, z, z, u1],
          [z, z, z, z]]
    cw = [[z, z, u1, -(v * u2)],
          [z, z, z, u1],
          [z, z, z, z],
          [z, z, z, z]]
    cx = [[z, z, z, u1],
          [z, z, z, z],
          [z, z, z, z],
          [z, z, z, z]]
    return [cu, cv, cw, cx]


def hk_metric(ch: HKChart):
    """Hessian-in-mixed-derivatives of the potential difference (i stripped)."""
    F = hk_potential(ch)
    Fb = F.conj()
    fu = ch.d("u", F)
    fv = ch.d("v", F)
    fub = ch.d("ub", Fb)
    fvb = ch.d("vb", Fb)
    k0 = (ch.sym("u") * fub + ch.sym("v") * fvb - ch.sym("ub") * fu
          - ch.sym("vb") * fv)
    holo = HK
    anti = ("ub", "vb", "wb", "xb")
    h = [[ch.d(anti[b], ch.d(holo[a], k0)) for b in range(4)] for a in range(4)]
    return k0, h


def expected_hk_metric(ch: HKChart):
    F = hk_potential(ch)
    Fb = F.conj()
    fuu = ch.d("u", ch.d("u", F))
    fuv = ch.d("v", ch.d("u", F))
    fvv = ch.d("v", ch.d("v", F))
    fuub = fuu.conj()
    fuvb = fuv.conj()
    fvvb = fvv.conj()
    z, one = ch.table.zero(), ch.table.one()
    return [[fuub - fuu, fuvb - fuv, z, one],
            [fuvb - fuv, fvvb - fvv, -one, z],
            [z, one, z, z],
            [-one, z, z, z]]


def hk_metric_inverse(ch: HKChart):
    F = hk_potential(ch)
    fuu = ch.d("u", ch.d("u", F))
    fuv = ch.d("v", ch.d("u", F))
    fvv = ch.d("v", ch.d("v", F))
    duu = fuu.conj() - fuu
    duv = fuv.conj() - fuv
    dvv = fvv.conj() - fvv
    z, one = ch.table.zero(), ch.table.one()
    return [[z, z, z, -one],
            [z, z, one, z],
            [z, -one, dvv, -duv],
            [one, z, -duv, duu]]


def hk_metric_from_form(ch: HKChart):
    """The metric via the form and the prefactored involution; must agree
    with the potential-Hessian route."""
    om = omega_hk_matrix(ch)
    ratio = ch.sym("ub") * ch.sym("u", -1)
    tau = tau_hk(ch)
    taus = [[ratio * e for e in row] for row in tau]
    out = [[ch.table.zero()] * 4 for _ in range(4)]
    for a in range(4):
        for b in range(4):
            acc = ch.table.zero()
            for c in range(4):
                acc = acc + om[a][c] * taus[b][c]
            out[a][b] = acc
    return out


def hk_metric_inverse_check(ch: HKChart):
    _, h = hk_metric(ch)
    hinv = hk_metric_inverse(ch)
    prod = mat_mul(h, hinv)
    ident = [[ch.table.one() if i == j else ch.table.zero() for j in range(4)]
             for i in range(4)]
    return mat_eq(prod, ident)


def connection_matrix(ch: HKChart, y: str):
    """Derivative of the metric times its inverse, in the y direction."""
    _, h = hk_metric(ch)
    dh = [[ch.d(y, h[a][b]) for b in range(4)] for a in range(4)]
    return mat_mul(dh, hk_metric_inverse(ch))


def expected_connection_u(ch: HKChart):
    F = hk_potential(ch)
    f3u = ch.d("u", ch.d("u", ch.d("u", F)))
    f3uv = ch.d("v", ch.d("u", ch.d("u", F)))
    f3vv = ch.d("v", ch.d("v", ch.d("u", F)))
    z = ch.table.zero()
    return [[z, z, -f3uv, f3u],
            [z, z, -f3vv, f3uv],
            [z, z, z, z],
            [z, z, z, z]]


def expected_connection_v(ch: HKChart):
    F = hk_potential(ch)
    f3uv = ch.d("v", ch.d("u", ch.d("u", F)))
    f3vv = ch.d("v", ch.d("v", ch.d("u", F)))
    f3v = ch.d("v", ch.d("v", ch.d("v", F)))
    z = ch.table.zero()
    return [[z, z, -f3vv, f3uv],
            [z, z, -f3v, f3vv],
            [z, z, z, z],
            [z, z, z, z]]


def omega_hk_matrix(ch: HKChart):
    z, one = ch.table.zero(), ch.table.one()
    return [[z, z, z, one],
            [z, z, -one, z],
            [z, one, z, z],
            [-one, z, z, z]]


def nabla_omega_residual(ch: HKChart, y: str):
    om = omega_hk_matrix(ch)
    dom = [[ch.d(y, om[a][b]) for b in range(4)] for a in range(4)]
    gam = connection_matrix(ch, y)
    gam_t = [[gam[b][a] for b in range(4)] for a in range(4)]
    return mat_sub(mat_sub(dom, mat_mul(gam, om)), mat_mul(om, gam_t))


def darboux_from_potential_residual(ch: HKChart):
    """The form as the wedge of coordinates with potential gradients."""
    F = hk_potential(ch)
    fu = ch.d("u", F)
    fv = ch.d("v", F)
    om = omega_hk_matrix(ch)

    def wedge(fa_name, gb):
        da = [ch.table.one() if n == fa_name else ch.table.zero() for n in HK]
        dg = [ch.d(n, gb) for n in HK]
        return [[da[a] * dg[b] - da[b] * dg[a] for b in range(4)]
                for a in range(4)]

    w1 = wedge("u", fu)
    w2 = wedge("v", fv)
    tot = [[w1[a][b] + w2[a][b] for b in range(4)] for a in range(4)]
    return mat_sub(om, tot)


def tau_hk(ch: HKChart):
    """Involution matrix on adapted fields from first principles."""
    t_in = coordinate_fields_in_t_basis(ch)   # adapted -> flat
    s_out = t_fields_in_coordinates(ch)       # flat -> adapted
    # sections on flat fields, mapped into this ring
    u1 = ch.sym("u", -1)
    u2 = ch.sym("u", -2)
    tQ = ch.sym("v") * u1
    tR = ch.sym("w") * u1
    tS = ch.sym("x") * u1 - ch.sym("v") * ch.sym("w") * u2
    f0, f1, f2 = ch.f0(0), ch.f0(1), ch.f0(2)
    z, one = ch.table.zero(), ch.table.one()
    m = [
        [one, -tQ, tQ * f2 - f1 - tR, -(tQ * f1 - f0.scale(2) + tS - tQ * tR)],
        [z, one, -f2, f1 - tR],
        [z, z, one, -tQ],
        [z, z, z, one],
    ]
    # sections in the adapted basis: sec[al][y]
    sec = mat_mul(m, s_out)
    # adapted fields in the section basis: solve sec-matrix
    secinv = _square_inverse(ch, sec)
    # conjugate the section-basis coefficients, then map sections back
    conj_coeffs = [[secinv[y][al].conj() for al in range(4)] for y in range(4)]
    return mat_mul(conj_coeffs, sec)


def _square_inverse(ch: HKChart, m):
    """Inverse of a matrix that is upper triangular with monomial diagonal."""
    for i in range(4):
        for j in range(i):
            if not m[i][j].is_zero():
                raise PreconditionError("matrix is not upper triangular")
    return triangular_inverse_upper(ch.table, m)


def tau_hk_structure_residual(ch: HKChart):
    """The involution as the gauge ratio times a unipotent upper block."""
    t = tau_hk(ch)
    ratio = ch.sym("u") * ch.sym("ub", -1)
    n = [[t[a][b] * ratio.invert() - (ch.table.one() if a == b else ch.table.zero())
          for b in range(4)] for a in range(4)]
    bad = []
    for a in range(4):
        for b in range(4):
            inside = a < 2 and b >= 2
            if not inside and not n[a][b].is_zero():
                bad.append((a, b, n[a][b]))
    return n, bad


def tau_square_residual(ch: HKChart):
    t = tau_hk(ch)
    tbar = [[x.conj() for x in row] for row in t]
    prod = mat_mul(t, tbar)
    ident = [[ch.table.one() if i == j else ch.table.zero() for j in range(4)]
             for i in range(4)]
    return mat_sub(prod, ident)


def cbar_matrices(ch: HKChart):
    t = tau_hk(ch)
    tbar = [[x.conj() for x in row] for row in t]
    cs = hk_c_matrices(ch)
    out = []
    for c in cs:
        cconj = [[x.conj() for x in row] for row in c]
        out.append(mat_mul(mat_mul(t, cconj), tbar))
    return out


def cbar_commutator_pattern(ch: HKChart):
    """Which pairs (holomorphic, conjugated) fail to commute."""
    cs = hk_c_matrices(ch)
    cbars = cbar_matrices(ch)
    nonzero = []
    for a in range(4):
        for b in range(4):
            com = commutator(cs[a], cbars[b])
            if not mat_is_zero(com):
                nonzero.append((HK[a], HK[b] + "bar", com))
    return nonzero


def compatibility_residuals(ch: HKChart):
    """Covariant-derivative commutators of the multiplication matrices."""
    cs = hk_c_matrices(ch)
    gammas = {"u": connection_matrix(ch, "u"), "v": connection_matrix(ch, "v"),
              "w": [[ch.table.zero()] * 4 for _ in range(4)],
              "x": [[ch.table.zero()] * 4 for _ in range(4)]}

    def bracket(y: str, czm):
        dcz = [[ch.d(y, czm[a][b]) for b in range(4)] for a in range(4)]
        g = gammas[y]
        return mat_sub(mat_add_(dcz, mat_mul(g, czm)), mat_mul(czm, g))

    results = {}
    for i in range(4):
        for j in range(i + 1, 4):
            lhs = bracket(HK[i], cs[j])
            rhs = bracket(HK[j], cs[i])
            results[(HK[i], HK[j])] = (lhs, rhs, mat_eq(lhs, rhs))
    return results


def mat_add_(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


# -- monodromy --------------------------------------------------------------------


@dataclass
class MonodromyChart:
    table: SymTable

    @classmethod
    def build(cls) -> "MonodromyChart":
        st = SymTable()
        for n in ("tQ", "tR", "tS"):
            st.add(n)
        st.add_function_family("g", F0_ORDER_MAX)  # shift-invariant part
        st.add_derivation("dQ")
        st.set_rule("dQ", "tQ", st.one())
        for k in range(F0_ORDER_MAX):
            st.set_rule("dQ", f"g^({k})", st.sym(f"g^({k + 1})"))
        return cls(table=st)

    def sym(self, n: str) -> SymExpr:
        return self.table.sym(n)

    def f0(self, k: int) -> SymExpr:
        """Cubic normalization plus the invariant part, differentiated k times."""
        tQ = self.sym("tQ")
        cubic = [
            (tQ ** 3).scale(rat(5, 6)),
            (tQ ** 2).scale(rat(5, 2)),
            tQ.scale(5),
            self.table.const(5),
        ]
        base = cubic[k] if k < 4 else self.table.zero()
        return base + self.table.sym(f"g^({k})")


def monodromy_frame(ch: MonodromyChart):
    tQ, tR, tS = ch.sym("tQ"), ch.sym("tR"), ch.sym("tS")
    f0, f1, f2 = ch.f0(0), ch.f0(1), ch.f0(2)
    z, one = ch.table.zero(), ch.table.one()
    return [
        [one, -tQ, tQ * f2 - f1 - tR, -(tQ * f1 - f0.scale(2) + tS - tQ * tR)],
        [z, one, -f2, f1 - tR],
        [z, z, one, -tQ],
        [z, z, z, one],
    ]


def monodromy_transition(ch: MonodromyChart):
    """Transition matrix of the frame under a unit shift of the second
    coordinate; must be constant and rational."""
    m = monodromy_frame(ch)
    shift = {"tQ": ch.sym("tQ") + ch.table.one()}
    msh = [[e.apply_map(shift) for e in row] for row in m]
    minv = unitriangular_inverse_upper(ch.table, m)
    t = mat_mul(msh, minv)
    for row in t:
        for e in row:
            for mono, _ in e.terms.items():
                if mono:
                    raise PreconditionError("transition is not constant")
    return [[_const_of(e) for e in row] for row in t]


def _const_of(e: SymExpr):
    return e.terms.get((), rat(0))


def cup_matrix():
    """Action of the degree-one class on the basis, ordered (P, Q, R, S)."""
    z = rat(0)
    return [[z, ONE, z, z],
            [z, z, rat(5), z],
            [z, z, z, ONE],
            [z, z, z, z]]


def nilpotent_matrix():
    return [[-x for x in row] for row in cup_matrix()]


def exp_nilpotent():
    n = nilpotent_matrix()
    acc = [[ONE if i == j else rat(0) for j in range(4)] for i in range(4)]
    power = [row[:] for row in acc]
    fact = 1
    for k in range(1, 5):
        power = [[sum(power[i][m] * n[m][j] for m in range(4)) for j in range(4)]
                 for i in range(4)]
        fact *= k
        acc = [[acc[i][j] + power[i][j] / rat(fact) for j in range(4)]
               for i in range(4)]
    return acc


def nilpotency_order() -> int:
    n = nilpotent_matrix()
    power = [[ONE if i == j else rat(0) for j in range(4)] for i in range(4)]
    for k in range(1, 6):
        power = [[sum(power[i][m] * n[m][j] for m in range(4)) for j in range(4)]
                 for i in range(4)]
        if all(x == 0 for row in power for x in row):
            return k
    return -1
