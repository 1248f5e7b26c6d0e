"""Free energies above genus zero and the deformed flow system.

Each genus contributes a potential of the argument u_R times a power of the
first jet of u_S, plus at genus one a logarithm of that jet.  The genus-g
degree coefficients are not derivable here, so they default to deterministic
pseudo-random small rationals; every identity below is polynomial in them,
and the suites rerun the checks for several seeds.

The genus counter lam is an ordinary ring variable capped at 2*gmax; no
resummation is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .meanfield import OrderParams, SECTORS, free_energy0
from .mirror import Potential
from .rat import ZERO, bernoulli_numbers, factorial, rat
from .series import Series, compare_to_depth

EULER_NUMBER = -200  # quintic Euler characteristic


def degree_zero_constant(g: int):
    """The genus-g constant multiplying the (2g-2) power of the first jet."""
    if g < 2:
        raise ValueError("only defined for genus >= 2")
    bs = bernoulli_numbers(2 * g)
    b2g2 = abs(bs[2 * g - 2])
    b2g = abs(bs[2 * g])
    return rat(EULER_NUMBER) * b2g2 * b2g / rat(
        2 * factorial(2 * g - 2) * (2 * g - 2) * (2 * g))


def sample_coefficient(seed: int, g: int, d: int):
    """Deterministic small nonzero rational, independent of library RNGs."""
    h = (seed * 1000003 + g * 7919 + d * 104729) % 1000081
    num = h % 19 - 9
    if num == 0:
        num = 7
    den = (h // 19) % 6 + 1
    return rat(num, den)


def genus_potential(g: int, dq: int, seed: int) -> Potential:
    a = {d: sample_coefficient(seed, g, d) for d in range(1, dq + 1)}
    if g == 1:
        return Potential(genus=1, poly=[ZERO, rat(25, 12)], a=a)
    return Potential(genus=g, poly=[degree_zero_constant(g)], a=a)


@dataclass
class GenusData:
    op: OrderParams
    pots: dict[int, Potential]

    @classmethod
    def build(cls, op: OrderParams, seed: int) -> "GenusData":
        ch = op.chart
        pots = {g: genus_potential(g, ch.dq, seed) for g in range(1, ch.gmax + 1)}
        return cls(op=op, pots=pots)

    def us1_pow(self, k: int) -> Series:
        if k >= 0:
            return self.op.u_S1 ** k
        return self.op.u_S1.invert() ** (-k)

    def f_at(self, g: int, k: int) -> Series:
        pot = self.pots[g] if g >= 1 else self.op.f0
        return (pot.derivative(k) if k else pot).eval(self.op.u_R)

    def free_energy(self, g: int) -> Series:
        if g == 0:
            return free_energy0(self.op)
        out = self.us1_pow(2 * g - 2) * self.f_at(g, 0)
        if g == 1:
            out = out + self.op.u_S1.log().scale(rat(-25, 3))
        return out

    def log_jet_residual(self, g: int) -> Series:
        """x-derivative of the genus-g energy against its jet chain rule."""
        fg = self.free_energy(g)
        rhs = (self.us1_pow(2 * g - 3) * self.op.jet_s(2) * self.f_at(g, 0)
               ).scale(2 * g - 2)
        rhs = rhs + self.us1_pow(2 * g - 2) * self.f_at(g, 1) * self.op.jet_r(1)
        if g == 1:
            rhs = rhs + self.op.jet_s(2) * self.us1_pow(-1).scale(rat(-25, 3))
        return self.op.xder(fg) - rhs


def deformed_closed(gd: GenusData) -> dict[str, Series]:
    """Closed forms of the lam-deformed order parameters."""
    op = gd.op
    ch = op.chart
    us2, us3 = op.jet_s(2), op.jet_s(3)
    ur1, ur2 = op.jet_r(1), op.jet_r(2)
    u_p = op.u_P
    u_q = op.u_Q
    for g in range(1, ch.gmax + 1):
        lam = ch.lam2(g)
        fg0, fg1, fg2 = gd.f_at(g, 0), gd.f_at(g, 1), gd.f_at(g, 2)
        term_p = (gd.us1_pow(2 * g - 2) * fg2 * ur1 * ur1
                  + gd.us1_pow(2 * g - 2) * fg1 * ur2
                  + (gd.us1_pow(2 * g - 3) * us2 * ur1 * fg1).scale(4 * g - 4)
                  + (gd.us1_pow(2 * g - 3) * us3 * fg0).scale(2 * g - 2)
                  + (gd.us1_pow(2 * g - 4) * us2 * us2 * fg0).scale(
                      (2 * g - 2) * (2 * g - 3)))
        if g == 1:
            term_p = term_p + (us3 * gd.us1_pow(-1)
                               - us2 * us2 * gd.us1_pow(-2)).scale(rat(-25, 3))
        u_p = u_p + lam * term_p
        term_q = ((gd.us1_pow(2 * g - 2) * us2 * fg1).scale(2 * g - 1)
                  + gd.us1_pow(2 * g - 1) * ur1 * fg2)
        u_q = u_q + lam * term_q
    return {"P": u_p, "Q": u_q, "R": op.u_R, "S": op.u_S}


def deformed_definitional(gd: GenusData) -> dict[str, Series]:
    """lam expansion of the second derivative of the total free energy."""
    op = gd.op
    ch = op.chart
    out = {}
    energies = {g: gd.free_energy(g) for g in range(ch.gmax + 1)}
    for sector in SECTORS:
        acc = ch.zero()
        for g, fg in energies.items():
            acc = acc + ch.lam2(g) * fg.derive("t0P").derive(f"t0{sector}")
        out[sector] = acc
    return out


def deformed_residuals(gd: GenusData):
    closed = deformed_closed(gd)
    definitional = deformed_definitional(gd)
    rows = {}
    for sector in SECTORS:
        eq, depth, diff = compare_to_depth(definitional[sector], closed[sector],
                                           gd.op.chart.dt)
        rows[sector] = (eq, depth, diff)
    return rows


def _phi(gd: GenusData, order: int, weight: int = 0) -> Series:
    """sum_g (2g-1)^weight lam^(2g) us1^(2g) f_g^(order)(u_R), g >= 0."""
    ch = gd.op.chart
    acc = ch.zero()
    for g in range(ch.gmax + 1):
        c = rat((2 * g - 1) ** weight)
        acc = acc + ch.lam2(g) * gd.us1_pow(2 * g) * gd.f_at(g, order).scale(c)
    return acc


def allgenus_flow_rhs(gd: GenusData, target: str, sector: str, n: int) -> Series:
    """Bracket whose x-derivative is the flow; zero flows return zero."""
    op = gd.op
    ch = op.chart
    U = deformed_closed(gd) if not hasattr(gd, "_ucache") else gd._ucache
    gd._ucache = U

    def uspow(k: int) -> Series:
        return op.us_pow(k).scale(rat(1, factorial(k))) if k >= 0 else ch.zero()

    if target == "S":
        return uspow(n + 1) if sector == "P" else ch.zero()
    if target == "R":
        if sector == "P":
            return U["R"] * uspow(n)
        if sector == "Q":
            return uspow(n + 1)
        return ch.zero()
    if target == "Q":
        if sector == "S":
            return ch.zero()
        if sector == "R":
            return uspow(n + 1)
        if sector == "Q":
            return uspow(n) * _phi(gd, 2)
        return (U["Q"] * uspow(n) + uspow(n - 1) * U["R"] * _phi(gd, 2)
                + uspow(n - 1) * _phi(gd, 1, weight=1))
    if sector == "S":
        return uspow(n + 1)
    if sector == "R":
        return U["R"] * uspow(n)
    if sector == "Q":
        return U["Q"] * uspow(n) + uspow(n - 1) * _phi(gd, 1)
    # the (P, P) block
    x_part = op.u_R * op.f0_at_ur(1) - op.f0_at_ur(0).scale(2)
    for g in range(1, ch.gmax + 1):
        x_part = x_part + ch.lam2(g) * gd.us1_pow(2 * g) * (
            op.u_R * gd.f_at(g, 1) + gd.f_at(g, 0).scale(2 * g - 2))
    y_part = ch.zero()
    for g in range(1, ch.gmax + 1):
        y_part = y_part + ch.lam2(g) * (
            (gd.us1_pow(2 * g - 1) * gd.f_at(g, 1) * op.jet_r(1)).scale(2 * g)
            + (gd.us1_pow(2 * g - 2) * op.jet_s(2) * gd.f_at(g, 0)).scale(
                2 * g * (2 * g - 2)))
    lam1 = ch.lam2(1)
    out = (U["P"] * uspow(n) + U["R"] * U["Q"] * uspow(n - 1)
           + uspow(n - 2) * x_part
           - lam1 * (op.jet_s(2) * uspow(n - 1)).scale(rat(50, 3))
           - lam1 * (op.u_S1 * op.u_S1 * uspow(n - 2)).scale(rat(25, 3))
           + uspow(n - 1) * y_part)
    return out


def allgenus_flow_residuals(gd: GenusData):
    """Definitional flows against the primed closed brackets, all of them."""
    op = gd.op
    ch = op.chart
    u_def = deformed_definitional(gd)
    rows = []
    for target in SECTORS:
        for sector in SECTORS:
            for n in range(ch.ndesc + 1):
                lhs = u_def[target].derive(f"t{n}{sector}")
                rhs = allgenus_flow_rhs(gd, target, sector, n).derive("t0P")
                eq, depth, diff = compare_to_depth(lhs, rhs, ch.dt)
                rows.append(((target, sector, n), eq, depth, diff))
    return rows


def grading_residuals(gd: GenusData):
    rows = {}
    for g in range(gd.op.chart.gmax + 1):
        rows[g] = gd.free_energy(g).weighted_scale()
    return rows
