"""Hypergeometric period basis, mirror map, and degree-d rational curve counts.

The fourth-order operator theta^4 - 5^5 x (theta+1/5)(theta+2/5)(theta+3/5)(theta+4/5),
theta = x d/dx, has a basis of solutions with log x powers 0..3.  The basis
is produced in one pass by deforming the coefficient recurrence with a
nilpotent shift eps (Taylor order 3) and reading off the eps coefficients of
x^eps * sum A_d(eps) x^d.

Normalization: w0(0) = 1; w1/w0 = log x + O(x); w2 and w3 are scaled by 5 so
that w2/w0 = g'(tQ) and w3/w0 = tQ g'(tQ) - 2 g(tQ) hold for the cubic-plus-
exponential potential g with g'''(tQ) = 5 + O(Q), which pins the degree-d
coefficients N_d.  Both the w2 route and the w3 route must produce the same
N_d, which is asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PreconditionError
from .rat import ONE, ZERO, rat, factorial
from .series import Series, VarTable, fixed_point_solve

LOG_ORDER = 4  # log powers 0..3


def _x_table(dq: int) -> VarTable:
    return VarTable([("x", 0, dq, True)], dq)


def _q_table(dq: int) -> VarTable:
    return VarTable([("Q", 0, dq, True)], dq)


class LogSeries:
    """sum_j log(x)^j * (power series in x), j < LOG_ORDER."""

    __slots__ = ("parts",)

    def __init__(self, parts: list[Series]):
        self.parts = parts  # index = log power

    @classmethod
    def from_series(cls, s: Series) -> "LogSeries":
        table = s.table
        return cls([s] + [Series.zero(table) for _ in range(LOG_ORDER - 1)])

    def theta(self) -> "LogSeries":
        """x d/dx, with x d/dx log^j = j log^(j-1)."""
        table = self.parts[0].table
        x = Series.var(table, "x")
        out = []
        for j, p in enumerate(self.parts):
            t = x * p.derive("x")
            if j + 1 < LOG_ORDER:
                t = t + self.parts[j + 1].scale(j + 1)
            out.append(t)
        return LogSeries(out)

    def scale(self, q) -> "LogSeries":
        return LogSeries([p.scale(q) for p in self.parts])

    def mul_series(self, s: Series) -> "LogSeries":
        return LogSeries([p * s for p in self.parts])

    def __add__(self, other: "LogSeries") -> "LogSeries":
        return LogSeries([a + b for a, b in zip(self.parts, other.parts)])

    def __sub__(self, other: "LogSeries") -> "LogSeries":
        return LogSeries([a - b for a, b in zip(self.parts, other.parts)])

    def is_zero(self) -> bool:
        return all(p.is_zero() for p in self.parts)


@dataclass
class PFBasis:
    dq: int
    omegas: list[LogSeries]          # w0..w3, already normalized
    apart: list[Series]              # eps-coefficient series A^(0)..A^(3) in x

    def ratio_to_w0(self, k: int) -> list[Series]:
        """Coefficients of log^j in w_k / w0, j = 0..3."""
        inv = self.apart[0].invert()
        return [p * inv for p in self.omegas[k].parts]


def pf_operator(ls: LogSeries) -> LogSeries:
    """Apply theta^4 - 5^5 x prod_k(theta + k/5)."""
    table = ls.parts[0].table
    x = Series.var(table, "x")
    t4 = ls.theta().theta().theta().theta()
    acc = ls
    for k in (1, 2, 3, 4):
        acc = acc.theta() + acc.scale(rat(k, 5))
    return t4 - acc.mul_series(x.scale(5**5))


def pf_solve(dq: int) -> PFBasis:
    if dq < 1:
        raise PreconditionError("dq must be >= 1")
    xt = _x_table(dq)
    et = VarTable([("eps", 0, LOG_ORDER - 1, True)], LOG_ORDER - 1)
    eps = Series.var(et, "eps")

    a = Series.one(et)
    coeff_eps = [a]  # A_d(eps) for d = 0..dq
    for d in range(1, dq + 1):
        num = Series.const(et, 5)
        for k in (1, 2, 3, 4):
            num = num * (Series.const(et, 5 * (d - 1) + k) + eps.scale(5))
        den = (Series.const(et, d) + eps) ** 4
        a = a * num * den.invert()
        coeff_eps.append(a)

    # A^(i)(x) = sum_d [eps^i] A_d(eps) x^d
    apart = []
    for i in range(LOG_ORDER):
        s = Series.zero(xt)
        for d, ad in enumerate(coeff_eps):
            c = ad.coeff({"eps": i})
            if c != 0:
                s = s + Series.monomial(xt, {"x": d}, c)
        apart.append(s)

    # w_m = sum_{j<=m} log^j / j! * A^(m-j); w2, w3 carry the factor 5.
    def make(m: int, scale) -> LogSeries:
        parts = []
        for j in range(LOG_ORDER):
            if j <= m:
                parts.append(apart[m - j].scale(scale / rat(factorial(j))))
            else:
                parts.append(Series.zero(xt))
        return LogSeries(parts)

    omegas = [make(0, ONE), make(1, ONE), make(2, rat(5)), make(3, rat(5))]
    for w in omegas:
        if not pf_operator(w).is_zero():
            raise PreconditionError("period basis fails the defining ODE")
    return PFBasis(dq=dq, omegas=omegas, apart=apart)


@dataclass
class MirrorMap:
    dq: int
    tq_tail: Series   # w1/w0 - log x, a series in x with zero constant term
    x_of_q: Series    # inverse series in Q = e^{tQ}

    def roundtrip_ok(self) -> bool:
        """exp(tail(x(Q))) * x(Q) == Q, the log-free form of the inversion."""
        qt = self.x_of_q.table
        tail_at = self.x_of_q.compose_univariate(_univar_coeffs(self.tq_tail))
        lhs = tail_at.exp() * self.x_of_q
        return lhs == Series.var(qt, "Q")


def _univar_coeffs(s: Series) -> list:
    return [s.coeff({s.table.names[0]: d}) for d in range(s.table.total_cap + 1)]


def mirror_map(basis: PFBasis) -> MirrorMap:
    r = basis.ratio_to_w0(1)
    # w1/w0 = log x * 1 + tail(x)
    if r[1] != Series.one(r[1].table) or not r[2].is_zero() or not r[3].is_zero():
        raise PreconditionError("w1/w0 is not log x + series")
    tail = r[0]
    if tail.constant_term() != 0:
        raise PreconditionError("mirror map tail has a constant term")
    qt = _q_table(basis.dq)
    q = Series.var(qt, "Q")
    tail_coeffs = _univar_coeffs(tail)

    def phi(u: Series) -> Series:
        return q * u.compose_univariate(tail_coeffs).scale(-1).exp()

    x_of_q = fixed_point_solve(phi, qt)
    mm = MirrorMap(dq=basis.dq, tq_tail=tail, x_of_q=x_of_q)
    if not mm.roundtrip_ok():
        raise PreconditionError("mirror map inversion failed to round-trip")
    return mm


@dataclass
class Potential:
    """One genus's potential: polynomial part plus exponential degree terms.

    Evaluated at a series u (zero constant term) in a chart containing the
    degree marker q, the value is sum_k poly[k] u^k + sum_d a[d] q^d e^{d u}.
    """

    genus: int
    poly: list                      # poly[k] multiplies u^k
    a: dict[int, object] = field(default_factory=dict)

    def derivative(self, k: int = 1) -> "Potential":
        poly = list(self.poly)
        for _ in range(k):
            poly = [poly[i] * i for i in range(1, len(poly))] or [ZERO]
        a = {d: c * rat(d) ** k for d, c in self.a.items()}
        return Potential(genus=self.genus, poly=poly, a=a)

    def eval(self, u: Series, q_name: str = "q") -> Series:
        if u.constant_term() != 0:
            raise PreconditionError("potential argument needs zero constant term")
        out = u.compose_univariate(self.poly)
        if self.a:
            table = u.table
            expu = None
            for d in sorted(self.a):
                marker = Series.monomial(table, {q_name: d}, self.a[d])
                if marker.is_zero():
                    continue
                if expu is None:
                    expu = u.exp()
                out = out + marker * expu ** d
        return out


def genus0_potential(basis: PFBasis, mm: MirrorMap) -> Potential:
    """Degree-d coefficients from the period ratios, two independent routes."""
    dq = basis.dq
    r2 = basis.ratio_to_w0(2)
    r3 = basis.ratio_to_w0(3)
    r1t = mm.tq_tail
    # w2/w0 = 5/2 log^2 + 5 log r1 + (5 r2); instanton tail of g' in x:
    if r2[2] != Series.const(r2[2].table, rat(5, 2)) or r2[1] != r1t.scale(5):
        raise PreconditionError("w2 normalization drifted")
    psi_x = r2[0] - r1t * r1t.scale(rat(5, 2))

    xq = mm.x_of_q
    psi_q = xq.compose_univariate(_univar_coeffs(psi_x))
    big_n = {}
    for d in range(1, dq + 1):
        big_n[d] = psi_q.coeff({"Q": d}) / rat(d)

    # independent route through w3/w0 = tQ g' - 2 g
    if r3[3] != Series.const(r3[3].table, rat(5, 6)) or r3[2] != r1t.scale(rat(5, 2)):
        raise PreconditionError("w3 normalization drifted")
    phi_x = (r1t ** 3).scale(rat(5, 6)) + r1t * psi_x - r3[0]
    phi_q = xq.compose_univariate(_univar_coeffs(phi_x)).scale(rat(1, 2))
    for d in range(1, dq + 1):
        if phi_q.coeff({"Q": d}) != big_n[d]:
            raise PreconditionError(
                f"degree-{d} coefficient differs between the two period routes")

    # cubic consistency: (Q d/dQ)^2 psi = sum d^3 N_d Q^d
    qt = psi_q.table
    q = Series.var(qt, "Q")
    dd = q * (q * psi_q.derive("Q")).derive("Q")
    for d in range(1, dq + 1):
        if dd.coeff({"Q": d}) != rat(d) ** 3 * big_n[d]:
            raise PreconditionError(f"degree-{d} triple-derivative route differs")

    return Potential(genus=0, poly=[ZERO, ZERO, ZERO, rat(5, 6)], a=big_n)


def multiple_cover_invert(big_n: dict[int, object]) -> tuple[dict[int, object], bool]:
    """Reduced counts n_d with N_d = sum_{k|d} n_{d/k} / k^3; flags integrality."""
    n = {}
    for d in sorted(big_n):
        acc = big_n[d]
        for k in range(2, d + 1):
            if d % k == 0:
                acc = acc - n[d // k] / rat(k) ** 3
        n[d] = acc
    integral = all(c == rat(int(c)) for c in n.values())
    return n, integral
