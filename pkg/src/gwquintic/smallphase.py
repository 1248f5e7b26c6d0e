"""The four-coordinate chart and its quantum structure.

Everything here keeps the genus-zero potential symbolic: f0 and its
derivatives are opaque function symbols of the second coordinate, so the
identity checks hold for an arbitrary potential, which is stronger than any
single instanton table.  The coordinates are (tP, tQ, tR, tS) with the
constant antidiagonal pairing; the descendant pairing matrix lives in a
Laurent z slot, with exp(tP/z) expanded as a truncated series in tP.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rat import ONE, ZERO, rat, factorial
from .symexpr import SymExpr, SymTable
from .zseries import LaurentZ

ALPHA = ("P", "Q", "R", "S")
ETA_PAIR = (3, 2, 1, 0)  # eta contracts index i with ETA_PAIR[i]
F0_ORDER_MAX = 8


def eta_entry(i: int, j: int):
    return ONE if j == ETA_PAIR[i] else ZERO


@dataclass
class SmallChart:
    table: SymTable

    @classmethod
    def build(cls) -> "SmallChart":
        st = SymTable()
        for n in ("tP", "tQ", "tR", "tS"):
            st.add(n)
        st.add_function_family("f0", F0_ORDER_MAX)
        for a in ALPHA:
            st.add_derivation("d" + a)
        st.set_rule("dP", "tP", st.one())
        st.set_rule("dQ", "tQ", st.one())
        st.set_rule("dR", "tR", st.one())
        st.set_rule("dS", "tS", st.one())
        for k in range(F0_ORDER_MAX):
            st.set_rule("dQ", f"f0^({k})", st.sym(f"f0^({k + 1})"))
        return cls(table=st)

    def sym(self, name: str, power: int = 1) -> SymExpr:
        return self.table.sym(name, power)

    def f0(self, k: int = 0) -> SymExpr:
        return self.table.sym(f"f0^({k})")

    def coord(self, i: int) -> SymExpr:
        return self.sym("t" + ALPHA[i])

    def d(self, i: int, expr: SymExpr) -> SymExpr:
        return expr.derive("d" + ALPHA[i])


def mirror_series_chart(dt: int, dq: int) -> "VarTable":
    from .series import VarTable

    descriptors = [("tP", -1, dt, True), ("tQ", 0, dt, True),
                   ("tR", 1, dt, True), ("tS", 2, dt, True),
                   ("q", 0, dq, False)]
    return VarTable(descriptors, dt)


def substitute_potential(ch: SmallChart, expr: SymExpr, table, potential):
    """Opt-in expansion mode: map a symbolic identity into the truncated
    series ring, with the function symbols evaluated on a concrete
    potential at the second coordinate.

    The symbolic route is the stronger verification (identities hold for an
    arbitrary potential); this bridge exists to specialize results to the
    actual degree coefficients.
    """
    from .series import Series

    tq = Series.var(table, "tQ")
    cache: dict[int, Series] = {}

    def fk(k: int) -> Series:
        if k not in cache:
            pot = potential.derivative(k) if k else potential
            cache[k] = pot.eval(tq)
        return cache[k]

    names = ch.table.names
    out = Series.zero(table)
    for mono, coeff in expr.terms.items():
        term = Series.const(table, coeff)
        for i, e in mono:
            name = names[i]
            if name.startswith("f0^("):
                base = fk(int(name[4:-1]))
            else:
                base = Series.var(table, name)
            if e < 0:
                base = base.invert()
                e = -e
            term = term * base ** e
        out = out + term
    return out


def free_energy_small(ch: SmallChart) -> SymExpr:
    tP, tQ, tR, tS = (ch.sym(n) for n in ("tP", "tQ", "tR", "tS"))
    return (tP * tP * tS).scale(rat(1, 2)) + tP * tQ * tR + ch.f0(0)


def gradient_small(ch: SmallChart) -> list[SymExpr]:
    f = free_energy_small(ch)
    return [ch.d(i, f) for i in range(4)]


def hessian_small(ch: SmallChart) -> list[list[SymExpr]]:
    f = free_energy_small(ch)
    return [[ch.d(i, ch.d(j, f)) for j in range(4)] for i in range(4)]


def expected_hessian(ch: SmallChart) -> list[list[SymExpr]]:
    tP, tQ, tR, tS = (ch.sym(n) for n in ("tP", "tQ", "tR", "tS"))
    z = ch.table.zero()
    return [[tS, tR, tQ, tP],
            [tR, ch.f0(2), tP, z],
            [tQ, tP, z, z],
            [tP, z, z, z]]


def entropy_small(ch: SmallChart) -> SymExpr:
    grad = gradient_small(ch)
    acc = ch.table.zero()
    for i in range(4):
        acc = acc + ch.coord(i) * grad[i]
    return acc - free_energy_small(ch)


def euler_residual(ch: SmallChart) -> SymExpr:
    """E = tP d/dtP - tR d/dtR - 2 tS d/dtS applied to the free energy."""
    f = free_energy_small(ch)
    return (ch.sym("tP") * ch.d(0, f) - ch.sym("tR") * ch.d(2, f)
            - ch.d(3, f) * ch.sym("tS").scale(2))


def third_derivatives(ch: SmallChart):
    f = free_energy_small(ch)
    d1 = [ch.d(i, f) for i in range(4)]
    d2 = [[ch.d(j, d1[i]) for j in range(4)] for i in range(4)]
    return [[[ch.d(k, d2[i][j]) for k in range(4)] for j in range(4)]
            for i in range(4)]


def quantum_product(ch: SmallChart, i: int) -> list[list[SymExpr]]:
    """Matrix of multiplication by the i-th coordinate field: rows = input
    basis vector, columns = output component; c[i][j][k] over j rows."""
    d3 = third_derivatives(ch)
    return [[d3[i][j][ETA_PAIR[k]] for k in range(4)] for j in range(4)]


def wdvv_check(ch: SmallChart) -> list[tuple]:
    """All component identities for associativity; returns failing tuples."""
    d3 = third_derivatives(ch)
    fails = []
    for a in range(4):
        for b in range(4):
            for c in range(4):
                for d in range(4):
                    lhs = ch.table.zero()
                    rhs = ch.table.zero()
                    for m in range(4):
                        n = ETA_PAIR[m]
                        lhs = lhs + d3[a][b][m] * d3[n][c][d]
                        rhs = rhs + d3[a][c][m] * d3[n][b][d]
                    if not (lhs - rhs).is_zero():
                        fails.append((a, b, c, d))
    return fails


# -- descendant pairing matrix (one z slot) ----------------------------------


def exp_tp_over_z(ch: SmallChart, window: int, deg: int, sign: int = 1) -> LaurentZ:
    """Truncated expansion of exp(tP/z) (sign=-1 gives exp(-tP/z))."""
    out = LaurentZ.zero(1, window, ch.table.zero())
    tP = ch.sym("tP")
    for k in range(deg + 1):
        c = rat(sign ** k, factorial(k))
        out = out + LaurentZ.term(1, window, ch.table.zero(), (-k,),
                                  (tP ** k).scale(c))
    return out


def s_matrix(ch: SmallChart, window: int, deg: int) -> list[list[LaurentZ]]:
    """Entries S[i][j] in one z slot; includes the constant pairing part."""
    zero = ch.table.zero()
    tQ, tR, tS = ch.sym("tQ"), ch.sym("tR"), ch.sym("tS")
    f0, f1, f2 = ch.f0(0), ch.f0(1), ch.f0(2)
    e = exp_tp_over_z(ch, window, deg)

    def zterm(p: int, coeff: SymExpr) -> LaurentZ:
        return LaurentZ.term(1, window, zero, (p,), coeff)

    zeroL = LaurentZ.zero(1, window, zero)
    s = [[zeroL for _ in range(4)] for _ in range(4)]
    s[0][0] = e * (zterm(-1, tS) + zterm(-2, tQ * tR)
                   + zterm(-3, tQ * f1 - f0.scale(2)))
    s[1][0] = e * (zterm(-1, tR) + zterm(-2, tQ * f2 - f1))
    s[2][0] = e * zterm(-1, tQ)
    s[3][0] = e
    s[0][1] = e * (zterm(-1, tR) + zterm(-2, f1))
    s[1][1] = e * zterm(-1, f2)
    s[2][1] = e
    s[0][2] = e * zterm(-1, tQ)
    s[1][2] = e
    s[0][3] = e
    return s


def _filter_tp_degree(ch: SmallChart, expr: SymExpr, deg: int) -> SymExpr:
    itp = ch.table.index["tP"]
    out = {m: c for m, c in expr.terms.items()
           if all(i != itp or e <= deg for i, e in m)}
    return SymExpr(ch.table, out)


def qde_check(ch: SmallChart, window: int, deg: int) -> list[tuple]:
    """z d/dt^a of each column equals the product matrix acting on it."""
    s = s_matrix(ch, window, deg)
    fails = []
    for a in range(4):
        ca = quantum_product(ch, a)
        for col in range(4):
            column = [s[row][col] for row in range(4)]
            for row in range(4):
                lhs = column[row].map_coefficients(
                    lambda c: c.derive("d" + ALPHA[a])).shift(0, 1)
                rhs = LaurentZ.zero(1, window, ch.table.zero())
                for k in range(4):
                    rhs = rhs + column[k].map_coefficients(lambda c, m=ca[row][k]: m * c)
                diff = lhs - rhs
                bad = [p for p in diff.terms
                       if not _filter_tp_degree(ch, diff.terms[p], deg - 1).is_zero()
                       and -window < p[0] <= window]
                if bad:
                    fails.append((a, row, col, bad[0]))
    return fails


def orthogonality_check(ch: SmallChart, window: int, deg: int) -> list[tuple]:
    """Pairing of the matrix at z with itself at -z returns the constant part."""
    wide = 2 * window
    s = s_matrix(ch, wide, deg)
    sneg = [[s[i][j].substitute_z_sign() for j in range(4)] for i in range(4)]
    fails = []
    for a in range(4):
        for b in range(4):
            acc = LaurentZ.zero(1, wide, ch.table.zero())
            for dd in range(4):
                ee = ETA_PAIR[dd]
                acc = acc + s[dd][a] * sneg[ee][b]
            acc = acc - LaurentZ.term(1, wide, ch.table.zero(), (0,),
                                      ch.table.const(eta_entry(a, b)))
            for p, cf in acc.terms.items():
                if abs(p[0]) > deg:
                    continue
                if not _filter_tp_degree(ch, cf, deg).is_zero():
                    fails.append((a, b, p))
                    break
    return fails


# -- genus-zero pairing at two z slots ---------------------------------------


def double_expansion_exp(ch: SmallChart, window: int, deg: int) -> LaurentZ:
    """sum_{m,n} tP^(m+n+1) / ((m+n+1) m! n!) z1^(-m-1) z2^(-n-1).

    This is the two-slot realization of (exp(tP/z1 + tP/z2) - 1)/(z1 + z2);
    the division never happens, the expansion is produced directly.
    """
    zero = ch.table.zero()
    out = LaurentZ.zero(2, window, zero)
    tP = ch.sym("tP")
    for m in range(deg):
        for n in range(deg - m):
            c = rat(1, (m + n + 1) * factorial(m) * factorial(n))
            out = out + LaurentZ.term(2, window, zero, (-m - 1, -n - 1),
                                      (tP ** (m + n + 1)).scale(c))
    return out


def two_point_small(ch: SmallChart, window: int, deg: int) -> list[list[LaurentZ]]:
    zero = ch.table.zero()
    tQ, tR, tS = ch.sym("tQ"), ch.sym("tR"), ch.sym("tS")
    f0, f1, f2 = ch.f0(0), ch.f0(1), ch.f0(2)

    def e_slot(slot: int) -> LaurentZ:
        out = LaurentZ.zero(2, window, zero)
        tP = ch.sym("tP")
        for k in range(deg + 1):
            p = [0, 0]
            p[slot] = -k
            out = out + LaurentZ.term(2, window, zero, tuple(p),
                                      (tP ** k).scale(rat(1, factorial(k))))
        return out

    def zt(p1: int, p2: int, coeff: SymExpr) -> LaurentZ:
        return LaurentZ.term(2, window, zero, (p1, p2), coeff)

    e12 = e_slot(0) * e_slot(1)
    zeroL = LaurentZ.zero(2, window, zero)
    v = [[zeroL for _ in range(4)] for _ in range(4)]
    v[0][0] = e12 * (zt(-1, -1, tS) + (zt(-2, -1, ONE) + zt(-1, -2, ONE)) * (tQ * tR)
                     + (zt(-3, -1, ONE) + zt(-2, -2, rat(-1)) + zt(-1, -3, ONE))
                     * (tQ * f1 - f0.scale(2))
                     + zt(-2, -2, ONE) * (tQ * (tQ * f2 - f1)))
    v[0][1] = e12 * (zt(-1, -1, tR) + zt(-2, -1, tQ * f2)
                     + (zt(-1, -2, ONE) - zt(-2, -1, ONE)) * f1)
    v[0][2] = e12 * zt(-1, -1, tQ)
    v[0][3] = double_expansion_exp(ch, window, deg)
    v[1][1] = e12 * zt(-1, -1, f2)
    v[1][2] = double_expansion_exp(ch, window, deg)
    for i in range(4):
        for j in range(i):
            v[i][j] = _swap_slots(v[j][i])
    return v


def _swap_slots(l: LaurentZ) -> LaurentZ:
    out = LaurentZ.zero(l.nslots, l.window, l.zero_coeff)
    for p, c in l.terms.items():
        out._add_term((p[1], p[0]) + p[2:], c)
    return out


def two_point_symmetry_check(ch: SmallChart, window: int, deg: int) -> bool:
    v = two_point_small(ch, window, deg)
    for i in range(4):
        for j in range(4):
            if not (v[i][j] - _swap_slots(v[j][i])).is_zero():
                return False
    return True


def two_point_pairing_check(ch: SmallChart, window: int, deg: int) -> list[tuple]:
    """(z1+z2) V + const pairing == contraction of the one-slot matrices."""
    wide = 2 * window
    v = two_point_small(ch, wide, deg)
    s = s_matrix(ch, wide, deg)

    def lift(l: LaurentZ, slot: int) -> LaurentZ:
        out = LaurentZ.zero(2, wide, ch.table.zero())
        for p, c in l.terms.items():
            q = [0, 0]
            q[slot] = p[0]
            out._add_term(tuple(q), c)
        return out

    fails = []
    for a in range(4):
        for b in range(4):
            lhs = v[a][b].shift(0, 1) + v[a][b].shift(1, 1)
            lhs = lhs + LaurentZ.term(2, wide, ch.table.zero(), (0, 0),
                                      ch.table.const(eta_entry(a, b)))
            rhs = LaurentZ.zero(2, wide, ch.table.zero())
            for dd in range(4):
                rhs = rhs + lift(s[dd][a], 0) * lift(s[ETA_PAIR[dd]][b], 1)
            diff = lhs - rhs
            for p, cf in diff.terms.items():
                if any(x < -deg - 3 or x > 1 for x in p):
                    continue
                if not _filter_tp_degree(ch, cf, deg).is_zero():
                    fails.append((a, b, p))
                    break
    return fails


# -- deformed coordinate closed forms (positive z powers) ---------------------


def deformed_coordinate_terms(ch: SmallChart):
    """For each index, the list of (z-power, coefficient) with an implicit
    exp(tP z) factor: x^a(z) = sum_k z^k * exp(tP z) * coeff_k, after the
    constant correction absorbed in the first entry.

    Index order follows the coordinates; the tails pair through the constant
    metric (the P entry is (exp(tP z) - 1)/z, stored as z^-1 with its
    correction noted by the caller).
    """
    tQ, tR, tS = ch.sym("tQ"), ch.sym("tR"), ch.sym("tS")
    f0, f1 = ch.f0(0), ch.f0(1)
    one = ch.table.one()
    return {
        "P": [(-1, one)],                         # plus the -1/z correction
        "Q": [(0, tQ)],
        "R": [(0, tR), (1, f1)],
        "S": [(0, tS), (1, tQ * tR), (2, tQ * f1 - f0.scale(2))],
    }


def deformed_coordinates_match_s_columns(ch: SmallChart, window: int, deg: int) -> bool:
    """d/dt^a of the generating objects reproduces the pairing-matrix entries.

    The generating object for index b, written in the 1/z variable, is
    G_b(z) = sum_k z^(-k) exp(tP/z) coeff_k with the same coefficients as
    deformed_coordinate_terms; its t^a-derivative must equal S[a][b].
    """
    terms = deformed_coordinate_terms(ch)
    s = s_matrix(ch, window, deg)
    zero = ch.table.zero()
    e = exp_tp_over_z(ch, window, deg)
    ok = True
    for bi, b in enumerate(ALPHA):
        # the tail attached to coordinate b generates the descendants of its
        # metric dual, so its derivatives fill that column
        col = ETA_PAIR[bi]
        g = LaurentZ.zero(1, window, zero)
        for p, c in terms[b]:
            g = g + e * LaurentZ.term(1, window, zero, (-p,), c)
        for ai in range(4):
            da = g.map_coefficients(lambda c: c.derive("d" + ALPHA[ai]))
            diff = da - s[ai][col]
            for p, cf in diff.terms.items():
                if -window < p[0] <= window and not _filter_tp_degree(
                        ch, cf, deg - 1).is_zero():
                    ok = False
    return ok
