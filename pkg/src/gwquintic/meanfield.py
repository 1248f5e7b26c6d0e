"""Order parameters, closed-form genus-zero free energy, and the flows.

The chart carries couplings t_n^A for A in (P, Q, R, S), n = 0..ndesc, the
degree marker q, and a genus counter lam used by the higher-genus layer.
The distinguished space variable is t0P; a prime always means d/dt0P.

Internally everything is computed with the total-degree cap raised by
``pad`` above the requested comparison depth, so that the jets and multiple
derivatives appearing in the identity checks stay trusted through the
reported depth (Series.prec does the bookkeeping).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import PreconditionError
from .mirror import Potential
from .rat import ONE, rat, factorial
from .series import Series, VarTable, compare_to_depth, fixed_point_solve
from .zseries import LaurentZ

SECTORS = ("P", "Q", "R", "S")


def coupling_weight(n: int, sector: str) -> int:
    return n + {"P": -1, "Q": 0, "R": 1, "S": 2}[sector]


@dataclass
class CouplingChart:
    dt: int
    ndesc: int
    dq: int
    gmax: int
    pad: int
    table: VarTable

    @classmethod
    def build(cls, dt: int, ndesc: int, dq: int, gmax: int = 0, pad: int = 2):
        cap = dt + pad
        descriptors = []
        for sector in SECTORS:
            for n in range(ndesc + 1):
                descriptors.append((f"t{n}{sector}", coupling_weight(n, sector),
                                    cap, True))
        descriptors.append(("q", 0, dq, False))
        descriptors.append(("lam", 0, 2 * gmax, False))
        return cls(dt=dt, ndesc=ndesc, dq=dq, gmax=gmax, pad=pad,
                   table=VarTable(descriptors, cap))

    def t(self, n: int, sector: str) -> Series:
        return Series.var(self.table, f"t{n}{sector}")

    def zero(self) -> Series:
        return Series.zero(self.table)

    def one(self) -> Series:
        return Series.one(self.table)

    def lam2(self, g: int) -> Series:
        return Series.monomial(self.table, {"lam": 2 * g}, ONE)

    def coupling_names(self):
        return [f"t{n}{s}" for s in SECTORS for n in range(self.ndesc + 1)]

    def small_phase_names(self):
        """Couplings that vanish on the small phase space (all n >= 1)."""
        return [f"t{n}{s}" for s in SECTORS for n in range(1, self.ndesc + 1)]


class OrderParams:
    """The four order parameters and their building blocks.

    sums(sector, k) is sum_{n>=k} t_n^sector u_S^(n-k) / (n-k)!; the x-jets
    of u_S and u_R are produced by closed-form recursions in these sums, so
    they keep full precision.
    """

    def __init__(self, chart: CouplingChart, f0: Potential):
        self.chart = chart
        self.f0 = f0
        table = chart.table
        nd = chart.ndesc

        def phi(u: Series) -> Series:
            acc = chart.zero()
            for n in range(nd + 1):
                acc = acc + chart.t(n, "P") * u ** n * rat(1, factorial(n))
            return acc

        self.u_S = fixed_point_solve(phi, table)
        self._us_pows = [chart.one()]
        for _ in range(chart.table.total_cap + 1):
            self._us_pows.append(self._us_pows[-1] * self.u_S)
        self._sums: dict[tuple[str, int], Series] = {}
        self.u_S1 = (chart.one() - self.sums("P", 1)).invert()

        self.u_R = self.u_S1 * self.sums("Q", 0)
        f0p = self._f0k(1)
        f0pp = self._f0k(2)
        g0p = self.u_R * f0pp - f0p
        self.u_Q = self.u_S1 * (self.sums("R", 0) + f0pp * self.sums("Q", 1)
                                + g0p * self.sums("P", 2))
        g0 = self.u_R * f0p - self._f0k(0).scale(2)
        self.u_P = self.u_S1 * (
            self.u_Q * (self.sums("Q", 1) + self.u_R * self.sums("P", 2))
            + self.u_R * self.sums("R", 1) + f0p * self.sums("Q", 2)
            + g0 * self.sums("P", 3) + self.sums("S", 0))
        self.u = {"P": self.u_P, "Q": self.u_Q, "R": self.u_R, "S": self.u_S}
        self._jet_s: dict[int, Series] = {0: self.u_S, 1: self.u_S1}
        self._jet_r: dict[int, Series] = {0: self.u_R}

    # -- building blocks --------------------------------------------------

    def us_pow(self, k: int) -> Series:
        return self._us_pows[k] if k < len(self._us_pows) else self.chart.zero()

    def sums(self, sector: str, k: int) -> Series:
        key = (sector, k)
        if key not in self._sums:
            acc = self.chart.zero()
            for n in range(k, self.chart.ndesc + 1):
                acc = acc + self.chart.t(n, sector) * self.us_pow(n - k).scale(
                    rat(1, factorial(n - k)))
            self._sums[key] = acc
        return self._sums[key]

    def _f0k(self, k: int) -> Series:
        return self.f0.derivative(k).eval(self.u_R) if k else self.f0.eval(self.u_R)

    def f0_at_ur(self, k: int = 0) -> Series:
        return self._f0k(k)

    def xder(self, s: Series) -> Series:
        return s.derive("t0P")

    def jet_s(self, k: int) -> Series:
        """k-th x-derivative of u_S, closed form in the sums."""
        if k in self._jet_s:
            return self._jet_s[k]
        u1 = self.u_S1
        g = lambda j: self.sums("P", j)
        if k == 2:
            out = u1 ** 3 * g(2)
        elif k == 3:
            out = (u1 ** 5 * g(2) ** 2).scale(3) + u1 ** 4 * g(3)
        elif k == 4:
            out = ((u1 ** 7 * g(2) ** 3).scale(15)
                   + (u1 ** 6 * g(2) * g(3)).scale(10) + u1 ** 5 * g(4))
        else:
            out = self.xder(self.jet_s(k - 1))
        self._jet_s[k] = out
        return out

    def jet_r(self, k: int) -> Series:
        """k-th x-derivative of u_R, closed form in the sums."""
        if k in self._jet_r:
            return self._jet_r[k]
        u1 = self.u_S1
        g = lambda j: self.sums("P", j)
        h = lambda j: self.sums("Q", j)
        if k == 1:
            out = u1 ** 3 * g(2) * h(0) + u1 ** 2 * h(1)
        elif k == 2:
            out = ((u1 ** 5 * g(2) ** 2 * h(0)).scale(3) + u1 ** 4 * g(3) * h(0)
                   + (u1 ** 4 * g(2) * h(1)).scale(3) + u1 ** 3 * h(2))
        else:
            out = self.xder(self.jet_r(k - 1))
        self._jet_r[k] = out
        return out

    def jet(self, sector: str, k: int) -> Series:
        if sector == "S":
            return self.jet_s(k)
        if sector == "R":
            return self.jet_r(k)
        out = self.u[sector]
        for _ in range(k):
            out = self.xder(out)
        return out


def solve_order_params(chart: CouplingChart, f0: Potential) -> OrderParams:
    return OrderParams(chart, f0)


# -- independent routes to u_S and u_R ---------------------------------------


def lagrange_u_s(chart: CouplingChart) -> Series:
    """Order-by-order inversion sum over ordered index tuples."""
    out = chart.zero()
    cap = chart.table.total_cap
    for k in range(1, cap + 1):
        for ps in itertools.product(range(min(chart.ndesc, k - 1) + 1), repeat=k):
            if sum(ps) != k - 1:
                continue
            term = chart.one().scale(rat(1, k))
            for p in ps:
                term = term * chart.t(p, "P").scale(rat(1, factorial(p)))
            out = out + term
    return out


def partition_sum_u_s(chart: CouplingChart) -> Series:
    """Partition-indexed sum; terms are monomials read off directly."""
    out = chart.zero()
    cap = chart.table.total_cap
    nd = chart.ndesc
    for total in range(cap):
        for part in _partitions_bounded(total, nd):
            msum = sum(part.values())
            e0 = total - msum + 1
            if e0 < 0 or e0 + msum > cap:
                continue
            coeff = rat(factorial(total), factorial(e0))
            expmap = {"t0P": e0}
            for i, m in part.items():
                coeff = coeff / rat(factorial(m) * factorial(i) ** m)
                expmap[f"t{i}P"] = m
            if e0 == 0:
                expmap.pop("t0P")
            out = out + Series.monomial(chart.table, expmap, coeff)
    return out


def _partitions_bounded(total: int, max_part: int):
    """Multiplicity maps {i: m_i} with sum i*m_i = total, 1 <= i <= max_part."""
    def rec(remaining: int, i: int):
        if remaining == 0:
            yield {}
            return
        if i < 1:
            return
        for m in range(remaining // i + 1):
            for rest in rec(remaining - m * i, i - 1):
                if m:
                    rest = dict(rest)
                    rest[i] = m
                yield rest
    yield from rec(total, max_part)


def lagrange_u_r(chart: CouplingChart) -> Series:
    """Same inversion sum with one index moved to the second sector."""
    out = chart.zero()
    cap = chart.table.total_cap
    for k in range(1, cap + 1):
        for ps in itertools.product(range(min(chart.ndesc, k - 1) + 1), repeat=k):
            if sum(ps) != k - 1:
                continue
            term = chart.t(ps[0], "Q").scale(rat(1, factorial(ps[0])))
            for p in ps[1:]:
                term = term * chart.t(p, "P").scale(rat(1, factorial(p)))
            out = out + term
    return out


def d_operator(chart: CouplingChart, s: Series) -> Series:
    """sum_n t_n^Q d/dt_n^P, which turns u_S into u_R."""
    acc = chart.zero()
    for n in range(chart.ndesc + 1):
        acc = acc + chart.t(n, "Q") * s.derive(f"t{n}P")
    return acc


# -- criticality of the potential ---------------------------------------------


def lg_gradients(op: OrderParams) -> dict[str, Series]:
    """The four gradient components of the big potential at the solved point."""
    ch = op.chart
    f0p = op.f0_at_ur(1)
    f0pp = op.f0_at_ur(2)
    g0 = op.u_R * f0p - op.f0_at_ur(0).scale(2)
    g0p = op.u_R * f0pp - f0p
    grad_p = op.sums("P", 0) - op.u_S
    grad_q = op.sums("Q", 0) + op.u_R * op.sums("P", 1) - op.u_R
    grad_r = (op.u_Q * (op.sums("P", 1) - ch.one()) + op.sums("R", 0)
              + f0pp * op.sums("Q", 1) + g0p * op.sums("P", 2))
    grad_s = (op.u_P * (op.sums("P", 1) - ch.one())
              + op.u_Q * (op.sums("Q", 1) + op.u_R * op.sums("P", 2))
              + op.u_R * op.sums("R", 1) + f0p * op.sums("Q", 2)
              + g0 * op.sums("P", 3) + op.sums("S", 0))
    return {"P": grad_p, "Q": grad_q, "R": grad_r, "S": grad_s}


# -- renormalized couplings ---------------------------------------------------


def renormalized_couplings(op: OrderParams) -> dict[tuple[str, int], Series]:
    ch = op.chart
    nd = ch.ndesc
    out = {}

    def tail(sector: str, base: int, extra: Series | None = None,
             extra_shift: int = 0) -> Series:
        acc = ch.zero()
        for l in range(nd + 1 - base):
            piece = ch.t(base + l, sector)
            if extra is not None and base + l + extra_shift <= nd:
                piece = piece + extra * ch.t(base + l + extra_shift, "P")
            acc = acc + piece * op.us_pow(l).scale(rat(1, factorial(l)))
        return acc

    for n in range(nd + 1):
        out[("P", n)] = tail("P", n)
        out[("Q", n)] = tail("Q", n, op.u_R, 1)
        out[("R", n)] = tail("R", n, op.u_Q, 1)
        acc = ch.zero()
        for l in range(nd + 1 - n):
            piece = ch.zero() + ch.t(n + l, "S")
            if n + l + 1 <= nd:
                piece = piece + op.u_R * ch.t(n + l + 1, "R")
                piece = piece + op.u_Q * ch.t(n + l + 1, "Q")
                piece = piece + op.u_P * ch.t(n + l + 1, "P")
            if n + l + 2 <= nd:
                piece = piece + op.u_Q * op.u_R * ch.t(n + l + 2, "P")
            acc = acc + piece * op.us_pow(l).scale(rat(1, factorial(l)))
        out[("S", n)] = acc
    return out


# -- genus-zero free energy ---------------------------------------------------


def t_shifted(chart: CouplingChart, m: int) -> Series:
    """t_m^P with the unit shift at level one."""
    out = chart.t(m, "P")
    if m == 1:
        out = out - chart.one()
    return out


def free_energy0(op: OrderParams) -> Series:
    ch = op.chart
    nd = ch.ndesc
    inv2 = op.u_S1.invert() ** 2
    out = op.f0_at_ur(0) * inv2
    for m in range(nd + 1):
        for n in range(nd + 1):
            c = rat(1, (m + n + 1) * factorial(m) * factorial(n))
            block = t_shifted(ch, m) * ch.t(n, "S") + ch.t(m, "Q") * ch.t(n, "R")
            out = out + op.us_pow(m + n + 1) * block.scale(c)
    return out


def string_residual(chart: CouplingChart, f: Series) -> Series:
    rhs = chart.t(0, "P") * chart.t(0, "S") + chart.t(0, "Q") * chart.t(0, "R")
    for s in SECTORS:
        for n in range(chart.ndesc):
            rhs = rhs + chart.t(n + 1, s) * f.derive(f"t{n}{s}")
    return f.derive("t0P") - rhs


def dilaton_residual(chart: CouplingChart, f: Series) -> Series:
    rhs = f.scale(-2)
    for s in SECTORS:
        for n in range(chart.ndesc + 1):
            rhs = rhs + chart.t(n, s) * f.derive(f"t{n}{s}")
    return f.derive("t1P") - rhs


ETA_DUAL = {"P": "S", "Q": "R", "R": "Q", "S": "P"}


def trr_residual(chart: CouplingChart, f: Series, a: tuple[int, str],
                 b: tuple[int, str], c: tuple[int, str]) -> Series:
    an, asec = a
    if an < 1:
        raise PreconditionError("first index must be positive")
    lhs = f.derive(f"t{an}{asec}").derive(f"t{b[0]}{b[1]}").derive(f"t{c[0]}{c[1]}")
    rhs = chart.zero()
    for mu in SECTORS:
        nu = ETA_DUAL[mu]
        rhs = rhs + (f.derive(f"t{an - 1}{asec}").derive(f"t0{mu}")
                     * f.derive(f"t0{nu}").derive(f"t{b[0]}{b[1]}").derive(
                         f"t{c[0]}{c[1]}"))
    return lhs - rhs


def grading_residual(chart: CouplingChart, f: Series) -> Series:
    return f.weighted_scale()


# -- loop operators and flows --------------------------------------------------


def loop_apply(chart: CouplingChart, sector: str, obj, window: int):
    """Prepend a z slot and apply sum_n z^{-n-1} d/dt_n^sector."""
    zero = chart.zero()
    if isinstance(obj, Series):
        obj = LaurentZ.term(0, window, zero, (), obj)
    out = LaurentZ.zero(obj.nslots + 1, window, zero)
    for n in range(chart.ndesc + 1):
        name = f"t{n}{sector}"
        for p, c in obj.terms.items():
            out._add_term((-n - 1,) + p, c.derive(name))
    return out


def exp_us_slot(op: OrderParams, nslots: int, slot: int, window: int,
                over_z: bool = True) -> LaurentZ:
    """exp(u_S / z_slot), including the constant 1."""
    ch = op.chart
    out = LaurentZ.zero(nslots, window, ch.zero())
    kmax = min(window, ch.table.total_cap)
    for k in range(kmax + 1):
        p = [0] * nslots
        p[slot] = -k
        out = out + LaurentZ.term(nslots, window, ch.zero(), tuple(p),
                                  op.us_pow(k).scale(rat(1, factorial(k))))
    return out


def flow_closed_forms(op: OrderParams, window: int) -> dict[tuple[str, str], LaurentZ]:
    """R[alpha][beta](z) whose x-derivative is the beta-flow of u_alpha.

    These are the one-slot pairing entries with the chart coordinates
    replaced by the order parameters.
    """
    ch = op.chart
    zero = ch.zero()
    e = exp_us_slot(op, 1, 0, window)

    def zt(p: int, coeff: Series) -> LaurentZ:
        return LaurentZ.term(1, window, zero, (p,), coeff)

    f0, f1, f2 = op.f0_at_ur(0), op.f0_at_ur(1), op.f0_at_ur(2)
    uP, uQ, uR = op.u_P, op.u_Q, op.u_R
    zeroL = LaurentZ.zero(1, window, zero)
    r: dict[tuple[str, str], LaurentZ] = {}
    r[("P", "P")] = e * (zt(-1, uP) + zt(-2, uQ * uR)
                         + zt(-3, uR * f1 - f0.scale(2)))
    r[("Q", "P")] = e * (zt(-1, uQ) + zt(-2, uR * f2 - f1))
    r[("R", "P")] = e * zt(-1, uR)
    r[("S", "P")] = e
    r[("P", "Q")] = e * (zt(-1, uQ) + zt(-2, f1))
    r[("Q", "Q")] = e * zt(-1, f2)
    r[("R", "Q")] = e
    r[("S", "Q")] = zeroL
    r[("P", "R")] = e * zt(-1, uR)
    r[("Q", "R")] = e
    r[("R", "R")] = zeroL
    r[("S", "R")] = zeroL
    r[("P", "S")] = e
    r[("Q", "S")] = zeroL
    r[("R", "S")] = zeroL
    r[("S", "S")] = zeroL
    return r


def hierarchy_flow_residuals(op: OrderParams, window: int):
    """For all sixteen (alpha, beta): loop flow of u_alpha minus (R)'.

    Returns {(alpha, beta): list of (z-power, equal, depth, firstdiff)}.
    """
    ch = op.chart
    closed = flow_closed_forms(op, window)
    out = {}
    for alpha in SECTORS:
        for beta in SECTORS:
            lhs = loop_apply(ch, beta, op.u[alpha], window)
            rhs = closed[(alpha, beta)].map_coefficients(lambda c: c.derive("t0P"))
            rows = []
            for n in range(ch.ndesc + 1):
                a = lhs.coeff((-n - 1,))
                b = rhs.coeff((-n - 1,))
                eq, depth, diff = compare_to_depth(a, b, ch.dt)
                rows.append((-n - 1, eq, depth, diff))
            out[(alpha, beta)] = rows
    return out


def flow_commutativity_residuals(op: OrderParams, pairs):
    """Mixed second derivatives of each order parameter agree for the pairs."""
    rows = []
    for (n1, s1), (n2, s2) in pairs:
        for gamma in SECTORS:
            a = op.u[gamma].derive(f"t{n1}{s1}").derive(f"t{n2}{s2}")
            b = op.u[gamma].derive(f"t{n2}{s2}").derive(f"t{n1}{s1}")
            eq, depth, diff = compare_to_depth(a, b, op.chart.dt)
            rows.append(((n1, s1), (n2, s2), gamma, eq, depth, diff))
    return rows


# -- one-point functions --------------------------------------------------------


def one_point_closed(op: OrderParams, sector: str, window: int) -> LaurentZ:
    """Closed forms for the loop image of the genus-zero free energy."""
    ch = op.chart
    nd = ch.ndesc
    zero = ch.zero()

    def tail(coupling: str, shifted: bool) -> LaurentZ:
        acc = LaurentZ.zero(1, window, zero)
        for m in range(nd + 1):
            base = t_shifted(ch, m) if shifted else ch.t(m, coupling)
            for n in range(ch.table.total_cap - m):
                c = rat(1, (m + n + 1) * factorial(m) * factorial(n))
                acc = acc + LaurentZ.term(1, window, zero, (-n - 1,),
                                          op.us_pow(m + n + 1) * base.scale(c))
        return acc

    e = exp_us_slot(op, 1, 0, window)
    if sector == "S":
        return tail("P", shifted=True)
    if sector == "R":
        return tail("Q", shifted=False)
    if sector == "Q":
        head = e * LaurentZ.term(1, window, zero, (-1,),
                                 op.f0_at_ur(1) * op.u_S1.invert())
        return head + tail("R", shifted=False)
    inv1 = op.u_S1.invert()
    inv2 = inv1 * inv1
    bracket1 = (op.u_Q * op.u_R * inv1
                - (op.u_R * op.f0_at_ur(2) - op.f0_at_ur(1)) * op.jet_r(1) * inv2)
    g0 = op.u_R * op.f0_at_ur(1) - op.f0_at_ur(0).scale(2)
    head = e * LaurentZ.term(1, window, zero, (-1,),
                             bracket1 + g0 * op.jet_s(2) * inv2 * inv1)
    head = head + e * LaurentZ.term(1, window, zero, (-2,), g0 * inv1)
    return head + tail("S", shifted=False)


def one_point_residuals(op: OrderParams, f0_big: Series, window: int):
    ch = op.chart
    out = {}
    for sector in SECTORS:
        lhs = loop_apply(ch, sector, f0_big, window)
        rhs = one_point_closed(op, sector, window)
        rows = []
        for n in range(ch.ndesc + 1):
            a = lhs.coeff((-n - 1,))
            b = rhs.coeff((-n - 1,))
            eq, depth, diff = compare_to_depth(a, b, ch.dt)
            rows.append((-n - 1, eq, depth, diff))
        out[sector] = rows
    return out


# -- two-point and n-point functions --------------------------------------------


def two_point_big(op: OrderParams, window: int) -> dict[tuple[str, str], LaurentZ]:
    """Closed forms with the coordinates replaced by order parameters."""
    ch = op.chart
    zero = ch.zero()
    e12 = exp_us_slot(op, 2, 0, window) * exp_us_slot(op, 2, 1, window)

    def zt(p1: int, p2: int, coeff) -> LaurentZ:
        c = coeff if isinstance(coeff, Series) else Series.const(ch.table, coeff)
        return LaurentZ.term(2, window, zero, (p1, p2), c)

    f0, f1, f2 = op.f0_at_ur(0), op.f0_at_ur(1), op.f0_at_ur(2)
    uP, uQ, uR = op.u_P, op.u_Q, op.u_R
    v: dict[tuple[str, str], LaurentZ] = {}
    v[("P", "P")] = e12 * (zt(-1, -1, uP)
                           + (zt(-2, -1, ONE) + zt(-1, -2, ONE)) * (uQ * uR)
                           + (zt(-3, -1, ONE) + zt(-2, -2, rat(-1)) + zt(-1, -3, ONE))
                           * (uR * f1 - f0.scale(2))
                           + zt(-2, -2, ONE) * (uR * (uR * f2 - f1)))
    v[("P", "Q")] = e12 * (zt(-1, -1, uQ) + zt(-2, -1, uR * f2)
                           + (zt(-1, -2, ONE) - zt(-2, -1, ONE)) * f1)
    v[("P", "R")] = e12 * zt(-1, -1, uR)
    v[("P", "S")] = double_expansion_us(op, window)
    v[("Q", "Q")] = e12 * zt(-1, -1, f2)
    v[("Q", "R")] = double_expansion_us(op, window)
    zeroL = LaurentZ.zero(2, window, zero)
    for key in (("Q", "S"), ("R", "R"), ("R", "S"), ("S", "S")):
        v[key] = zeroL
    for (a, b) in list(v.keys()):
        if (b, a) not in v:
            v[(b, a)] = _swap2(v[(a, b)])
    return v


def double_expansion_us(op: OrderParams, window: int) -> LaurentZ:
    """Two-slot expansion of (exp(u_S/z1 + u_S/z2) - 1)/(z1 + z2)."""
    ch = op.chart
    zero = ch.zero()
    out = LaurentZ.zero(2, window, zero)
    cap = ch.table.total_cap
    for m in range(min(window, cap)):
        for n in range(min(window, cap) - m):
            c = rat(1, (m + n + 1) * factorial(m) * factorial(n))
            out = out + LaurentZ.term(2, window, zero, (-m - 1, -n - 1),
                                      op.us_pow(m + n + 1).scale(c))
    return out


def _swap2(l: LaurentZ) -> LaurentZ:
    out = LaurentZ.zero(l.nslots, l.window, l.zero_coeff)
    for p, c in l.terms.items():
        out._add_term((p[1], p[0]) + p[2:], c)
    return out


def two_point_pairing_big_residuals(op: OrderParams, window: int):
    """The slot-sum of the two-point object rebuilds the one-slot pairing
    contraction minus the constant part, with coordinates at the solved
    point: the closed analogue of the descendant-pairing factorization."""
    ch = op.chart
    v = two_point_big(op, window)
    r = flow_closed_forms(op, window)
    zero = ch.zero()

    def lift(l: LaurentZ, slot: int) -> LaurentZ:
        out = LaurentZ.zero(2, window, zero)
        for p, c in l.terms.items():
            q = [0, 0]
            q[slot] = p[0]
            out._add_term(tuple(q), c)
        return out

    eta = {("P", "S"): ONE, ("Q", "R"): ONE, ("R", "Q"): ONE, ("S", "P"): ONE}
    bad = []
    for a in SECTORS:
        for b in SECTORS:
            lhs = v[(a, b)].shift(0, 1) + v[(a, b)].shift(1, 1)
            const = eta.get((a, b))
            if const is not None:
                lhs = lhs + LaurentZ.term(2, window, zero, (0, 0),
                                          Series.const(ch.table, const))
            rhs = LaurentZ.zero(2, window, zero)
            for d in SECTORS:
                e = ETA_DUAL[d]
                rhs = rhs + lift(r[(d, a)], 0) * lift(r[(e, b)], 1)
            diff = lhs - rhs
            for p, c in diff.terms.items():
                if any(x < -window or x > 1 for x in p):
                    continue
                t = c.truncate_counted(min(c.prec, ch.dt))
                if not t.is_zero():
                    bad.append((a, b, p))
                    break
    return bad


def constitutive_residuals(op: OrderParams, f0_big: Series, window: int, samples):
    """d2F/dt_a dt_b against the closed two-point coefficients."""
    ch = op.chart
    v = two_point_big(op, window)
    rows = []
    for (a, asec, b, bsec) in samples:
        lhs = f0_big.derive(f"t{a}{asec}").derive(f"t{b}{bsec}")
        rhs = v[(asec, bsec)].coeff((-a - 1, -b - 1))
        eq, depth, diff = compare_to_depth(lhs, rhs, ch.dt)
        rows.append(((a, asec, b, bsec), eq, depth, diff))
    return rows


def prod_exp_all_slots(op: OrderParams, nslots: int, window: int) -> LaurentZ:
    """prod_i exp(u_S/z_i)/z_i."""
    out = exp_us_slot(op, nslots, 0, window).shift(0, -1)
    for i in range(1, nslots):
        out = out * exp_us_slot(op, nslots, i, window).shift(i, -1)
    return out


def sum_inv_z(chart: CouplingChart, nslots: int, window: int) -> LaurentZ:
    out = LaurentZ.zero(nslots, window, chart.zero())
    for i in range(nslots):
        p = [0] * nslots
        p[i] = -1
        out = out + LaurentZ.term(nslots, window, chart.zero(), tuple(p),
                                  chart.one())
    return out


def npoint_loop(op: OrderParams, sectors: list[str], window: int) -> LaurentZ:
    """Repeated loop operators on the closed two-point function.

    sectors is the full insertion list; the last two are the base pair.
    """
    if len(sectors) < 2:
        raise PreconditionError("need at least two insertions")
    base = two_point_big(op, window)[(sectors[-2], sectors[-1])]
    out = base
    for s in reversed(sectors[:-2]):
        out = loop_apply(op.chart, s, out, window)
    return out


def bell_tail_qr(op: OrderParams, n_extra: int, window: int) -> LaurentZ:
    """Closed form for n_extra leading P insertions on the (Q, R) tail."""
    nslots = n_extra + 2
    ch = op.chart
    pe = prod_exp_all_slots(op, nslots, window)
    s = sum_inv_z(ch, nslots, window)
    acc = LaurentZ.zero(nslots, window, ch.zero())
    for part in _partitions_bounded(n_extra, n_extra):
        msum = sum(part.values())
        coeff = rat(factorial(n_extra))
        piece = ch.one()
        for j, m in part.items():
            coeff = coeff / rat(factorial(j) ** m * factorial(m))
            piece = piece * op.jet_s(j) ** m
        acc = acc + (s ** (msum - 1)).map_coefficients(
            lambda c, pc=piece.scale(coeff): c * pc)
    return pe * acc


def bell_tail_r(op: OrderParams, n_extra: int, window: int) -> LaurentZ:
    """Closed form for n_extra + 1 leading P insertions on the (R,) tail:
    the n_extra-fold x-derivative of u_R times the slot exponentials."""
    nslots = n_extra + 2
    ch = op.chart
    pe = prod_exp_all_slots(op, nslots, window)
    s = sum_inv_z(ch, nslots, window)
    acc = LaurentZ.zero(nslots, window, ch.zero())
    for l in range(n_extra + 1):
        for part in _partitions_bounded(n_extra - l, n_extra):
            msum = sum(part.values())
            coeff = rat(factorial(n_extra), factorial(l))
            piece = op.jet_r(l)
            for j, m in part.items():
                coeff = coeff / rat(factorial(j) ** m * factorial(m))
                piece = piece * op.jet_s(j) ** m
            acc = acc + (s ** msum).map_coefficients(
                lambda c, pc=piece.scale(coeff): c * pc)
    return pe * acc


def compact_form_residual(op: OrderParams, n_extra: int, window: int,
                          tail: str) -> LaurentZ:
    """(sum 1/z_i) * loop-route == d^n/dx^n of the product form (times u_R
    for the R tail); returns the difference."""
    ch = op.chart
    nslots = n_extra + 2
    if tail == "qr":
        loop = npoint_loop(op, ["P"] * n_extra + ["Q", "R"], window)
        inner = prod_exp_all_slots(op, nslots, window)
        for _ in range(n_extra):
            inner = inner.map_coefficients(lambda c: c.derive("t0P"))
        return sum_inv_z(ch, nslots, window) * loop - inner
    if tail == "r":
        loop = npoint_loop(op, ["P"] * (n_extra + 1) + ["R"], window)
        inner = prod_exp_all_slots(op, nslots, window).map_coefficients(
            lambda c: c * op.u_R)
        for _ in range(n_extra):
            inner = inner.map_coefficients(lambda c: c.derive("t0P"))
        return loop - inner
    raise PreconditionError(tail)


def three_point_closed(op: OrderParams, names: tuple[str, str, str],
                       window: int) -> LaurentZ:
    """The nonvanishing three-point closed forms (up to permutation)."""
    ch = op.chart
    pe = prod_exp_all_slots(op, 3, window)
    s = sum_inv_z(ch, 3, window)
    one = lambda c: pe.map_coefficients(lambda x: x * c)
    f1, f2, f3 = op.f0_at_ur(1), op.f0_at_ur(2), op.f0_at_ur(3)
    us1, ur = op.u_S1, op.u_R
    ur1 = op.jet_r(1)
    uq1 = op.xder(op.u_Q)
    key = tuple(names)
    if key == ("P", "Q", "R"):
        return one(us1)
    if key == ("Q", "Q", "Q"):
        return one(us1 * f3)
    if key == ("P", "P", "S"):
        return one(us1)
    if key == ("P", "P", "R"):
        return one(ur1) + (s * pe).map_coefficients(lambda c: c * (ur * us1))
    if key == ("P", "Q", "Q"):
        # slot 1 carries the loop variable applied to the (Q, Q) pair
        z1 = LaurentZ.term(3, window, ch.zero(), (-1, 0, 0), ch.one())
        z2 = LaurentZ.term(3, window, ch.zero(), (0, -1, 0), ch.one())
        z3 = LaurentZ.term(3, window, ch.zero(), (0, 0, -1), ch.one())
        return (one(ur1 * f3) + (z1 * pe).map_coefficients(
            lambda c: c * (ur * f3 * us1))
            + ((z2 + z3) * pe).map_coefficients(lambda c: c * (f2 * us1)))
    if key == ("P", "P", "Q"):
        z3 = LaurentZ.term(3, window, ch.zero(), (0, 0, -1), ch.one())
        z12 = (LaurentZ.term(3, window, ch.zero(), (-1, 0, 0), ch.one())
               + LaurentZ.term(3, window, ch.zero(), (0, -1, 0), ch.one()))
        z1sq = LaurentZ.term(3, window, ch.zero(), (-2, 0, 0), ch.one())
        z2sq = LaurentZ.term(3, window, ch.zero(), (0, -2, 0), ch.one())
        z3sq = LaurentZ.term(3, window, ch.zero(), (0, 0, -2), ch.one())
        z1z3 = LaurentZ.term(3, window, ch.zero(), (-1, 0, -1), ch.one())
        z2z3 = LaurentZ.term(3, window, ch.zero(), (0, -1, -1), ch.one())
        z1z2 = LaurentZ.term(3, window, ch.zero(), (-1, -1, 0), ch.one())
        out = one(uq1)
        out = out + ((z12 + z3) * pe).map_coefficients(lambda c: c * (op.u_Q * us1))
        out = out + ((z3sq - z1sq - z2sq) * pe).map_coefficients(
            lambda c: c * (us1 * f1))
        out = out + (z3 * pe).map_coefficients(lambda c: c * (ur1 * f2))
        out = out + ((z1z3 + z2z3 + z1sq + z2sq) * pe).map_coefficients(
            lambda c: c * (us1 * ur * f2))
        out = out + (z12 * pe).map_coefficients(lambda c: c * (ur * ur1 * f3))
        out = out + (z1z2 * pe).map_coefficients(lambda c: c * (ur * ur * us1 * f3))
        return out
    raise PreconditionError(f"no closed form stored for {names}")


def laurent_residual_depth(a: LaurentZ, b: LaurentZ, chart: CouplingChart,
                           zmin: int, depth: int):
    """Compare two Laurent objects on slots with powers in [zmin, 0),
    through the given counted degree.

    The caller must bound depth by cap minus the number of derivatives its
    least-precise route took: an entry that differentiated to the empty
    series leaves no precision marker behind.
    """
    diff = a - b
    worst = (True, depth, None)
    for p, c in diff.terms.items():
        if any(x < zmin or x > 0 for x in p):
            continue
        if not c.is_zero():
            trimmed = c.truncate_counted(min(c.prec, depth))
            if not trimmed.is_zero():
                return (False, min(c.prec, depth), (p, trimmed))
    return worst


def npoint_compare_depth(chart: CouplingChart, n_loops: int) -> int:
    return min(chart.dt, chart.table.total_cap - n_loops)
