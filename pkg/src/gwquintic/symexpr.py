"""Differential-polynomial expressions with exact rational coefficients.

A SymTable declares generators of four kinds:

* ``poly``  - ordinary symbols, nonnegative integer exponents;
* ``unit``  - invertible symbols (formal inverse adjoined), any integer
  exponent;
* ``gauge`` - group-like symbols (an exponential of a base coordinate, or a
  fixed fractional power of a unit): any integer exponent, multiplication
  adds exponents, exponent zero collapses to 1;
* plus function symbols, realized as ordered families ``name^(k)`` of poly
  generators tied together by the registered derivation rules (the chain
  rule raises k by one and multiplies by the derivative of the argument).

A derivation is a named map generator -> SymExpr.  It extends to the whole
ring by linearity and the Leibniz rule, with d(G^e) = e G^(e-1) dG; the
rules registered for unit and gauge generators keep that expression inside
the ring (e.g. d(exp) proportional to exp itself).

Barred twins support the formal conjugation used by the Kahler-structure
checks: an involution on generator names; coefficients are rational, hence
fixed.  Unbarred derivations annihilate barred generators and vice versa,
simply by registering zero rules.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .errors import PreconditionError, VarTableMismatch
from .rat import ONE, ZERO, rat, rat_str

Mono = tuple[tuple[int, int], ...]  # sorted ((gen_index, exponent), ...)


class SymTable:
    def __init__(self):
        self.names: list[str] = []
        self.kinds: list[str] = []
        self.index: dict[str, int] = {}
        self.rules: dict[str, dict[int, "SymExpr"]] = {}
        self.conj_map: dict[int, int] = {}

    def add(self, name: str, kind: str = "poly") -> str:
        if name in self.index:
            raise ValueError(f"duplicate generator {name!r}")
        if kind not in ("poly", "unit", "gauge"):
            raise ValueError(kind)
        self.index[name] = len(self.names)
        self.names.append(name)
        self.kinds.append(kind)
        return name

    def add_derivation(self, dname: str):
        if dname in self.rules:
            raise ValueError(f"duplicate derivation {dname!r}")
        self.rules[dname] = {}

    def set_rule(self, dname: str, gen: str, value: "SymExpr"):
        self.rules[dname][self.index[gen]] = value

    def set_conjugate_pair(self, a: str, b: str):
        ia, ib = self.index[a], self.index[b]
        self.conj_map[ia] = ib
        self.conj_map[ib] = ia

    def add_function_family(self, base: str, order_max: int,
                            kind: str = "poly") -> list[str]:
        """Generators base^(0) .. base^(order_max)."""
        return [self.add(f"{base}^({k})", kind) for k in range(order_max + 1)]

    # -- expression constructors ---------------------------------------

    def zero(self) -> "SymExpr":
        return SymExpr(self, {})

    def one(self) -> "SymExpr":
        return self.const(1)

    def const(self, q) -> "SymExpr":
        q = rat(q) if not hasattr(q, "denominator") else q
        return SymExpr(self, {(): q} if q != 0 else {})

    def sym(self, name: str, power: int = 1) -> "SymExpr":
        i = self.index[name]
        if power == 0:
            return self.one()
        if power < 0 and self.kinds[i] == "poly":
            raise PreconditionError(f"{name!r} has no inverse")
        return SymExpr(self, {((i, power),): ONE})

    def mono(self, powers: Mapping[str, int], coeff=1) -> "SymExpr":
        out = self.const(coeff)
        for n, e in powers.items():
            out = out * self.sym(n, e)
        return out


class SymExpr:
    __slots__ = ("table", "terms")

    def __init__(self, table: SymTable, terms: Mapping[Mono, object]):
        self.table = table
        self.terms = dict(terms)

    # -- basics ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, SymExpr):
            if self.table is not other.table:
                raise VarTableMismatch("different symbol tables")
            return self.terms == other.terms
        return self.terms == {} if other == 0 else NotImplemented

    def __hash__(self):
        raise TypeError("SymExpr is not hashable")

    def __repr__(self):
        if not self.terms:
            return "SymExpr(0)"
        names = self.table.names
        bits = []
        for mono in sorted(self.terms)[:8]:
            factors = "*".join(
                f"{names[i]}^{e}" if e != 1 else names[i] for i, e in mono)
            c = rat_str(self.terms[mono])
            bits.append(f"({c})" + (f"*{factors}" if factors else ""))
        more = "" if len(self.terms) <= 8 else f" +{len(self.terms) - 8} terms"
        return f"SymExpr({' + '.join(bits)}{more})"

    # -- ring --------------------------------------------------------------

    def _same(self, other: "SymExpr"):
        if self.table is not other.table:
            raise VarTableMismatch("different symbol tables")

    def __add__(self, other):
        if not isinstance(other, SymExpr):
            return self + self.table.const(other)
        self._same(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            acc = out.get(m)
            s = c if acc is None else acc + c
            if s == 0:
                out.pop(m, None)
            else:
                out[m] = s
        return SymExpr(self.table, out)

    __radd__ = __add__

    def __neg__(self):
        return SymExpr(self.table, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, SymExpr):
            return self - self.table.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, q) -> "SymExpr":
        q = rat(q) if not hasattr(q, "denominator") else q
        if q == 0:
            return SymExpr(self.table, {})
        return SymExpr(self.table, {m: c * q for m, c in self.terms.items()})

    def _mul_mono(self, m1: Mono, m2: Mono) -> Mono:
        acc = dict(m1)
        for i, e in m2:
            ne = acc.get(i, 0) + e
            if ne == 0:
                acc.pop(i, None)
            else:
                acc[i] = ne
        kinds = self.table.kinds
        for i, e in acc.items():
            if e < 0 and kinds[i] == "poly":
                raise PreconditionError(
                    f"negative power of {self.table.names[i]!r}")
        return tuple(sorted(acc.items()))

    def __mul__(self, other):
        if not isinstance(other, SymExpr):
            return self.scale(other)
        self._same(other)
        out: dict[Mono, object] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = self._mul_mono(m1, m2)
                prod = c1 * c2
                acc = out.get(m)
                s = prod if acc is None else acc + prod
                if s == 0:
                    out.pop(m, None)
                else:
                    out[m] = s
        return SymExpr(self.table, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "SymExpr":
        if n < 0:
            return self.invert() ** (-n)
        out = self.table.one()
        for _ in range(n):
            out = out * self
        return out

    def invert(self) -> "SymExpr":
        """Inverse of a single monomial in invertible generators."""
        if len(self.terms) != 1:
            raise PreconditionError("only monomials invert")
        (mono, c), = self.terms.items()
        kinds = self.table.kinds
        for i, _ in mono:
            if kinds[i] == "poly":
                raise PreconditionError(
                    f"{self.table.names[i]!r} is not invertible")
        return SymExpr(self.table, {tuple((i, -e) for i, e in mono): ONE / c})

    def __truediv__(self, other):
        if isinstance(other, SymExpr):
            return self * other.invert()
        return self.scale(ONE / rat(other))

    # -- calculus ------------------------------------------------------------

    def derive(self, dname: str) -> "SymExpr":
        rules = self.table.rules.get(dname)
        if rules is None:
            raise PreconditionError(f"unknown derivation {dname!r}")
        table = self.table
        out = table.zero()
        for mono, coeff in self.terms.items():
            for i, e in mono:
                dg = rules.get(i)
                if dg is None or dg.is_zero():
                    continue
                racc = dict(mono)
                if e == 1:
                    racc.pop(i)
                else:
                    racc[i] = e - 1
                rmono = tuple(sorted(racc.items()))
                out = out + SymExpr(table, {rmono: coeff * e}) * dg
        return out

    def conj(self) -> "SymExpr":
        cmap = self.table.conj_map
        out: dict[Mono, object] = {}
        for mono, coeff in self.terms.items():
            nm = tuple(sorted((cmap.get(i, i), e) for i, e in mono))
            out[nm] = out.get(nm, ZERO) + coeff
        return SymExpr(self.table, {m: c for m, c in out.items() if c != 0})

    def apply_map(self, images: Mapping[str, "SymExpr"]) -> "SymExpr":
        """Ring endomorphism sending each named generator to its image."""
        table = self.table
        idx_images = {table.index[n]: v for n, v in images.items()}
        out = table.zero()
        for mono, coeff in self.terms.items():
            term = table.const(coeff)
            for i, e in mono:
                img = idx_images.get(i)
                if img is None:
                    term = term * SymExpr(table, {((i, e),): ONE})
                else:
                    term = term * img ** e
            out = out + term
        return out

    def subs_zero(self, names: Iterable[str]) -> "SymExpr":
        idxs = {self.table.index[n] for n in names}
        out: dict[Mono, object] = {}
        for mono, coeff in self.terms.items():
            if any(i in idxs and e > 0 for i, e in mono):
                continue
            if any(i in idxs and e < 0 for i, e in mono):
                raise PreconditionError("substituting zero into an inverse")
            out[mono] = out.get(mono, ZERO) + coeff
        return SymExpr(self.table, {m: c for m, c in out.items() if c != 0})


# -- matrix helpers over any ring with +, -, * -------------------------------


def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[_dot(a[i], [b[k][j] for k in range(m)]) for j in range(p)]
            for i in range(n)]


def _dot(row, col):
    acc = row[0] * col[0]
    for x, y in zip(row[1:], col[1:]):
        acc = acc + x * y
    return acc


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, q):
    return [[x * q for x in row] for row in a]


def mat_map(fn, a):
    return [[fn(x) for x in row] for row in a]


def mat_eq(a, b) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def mat_is_zero(a) -> bool:
    return all(x.is_zero() for row in a for x in row)


def commutator(a, b):
    return mat_sub(mat_mul(a, b), mat_mul(b, a))
