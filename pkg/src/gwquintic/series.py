"""Truncated multivariate power series over exact rationals.

The ring is sparse: a series is a map from exponent vectors to nonzero
rational coefficients.  Truncation is a property of the ring itself, not a
post-filter: monomials whose per-variable degree or total counted degree
exceed the table's caps are never created.

Variables split into two kinds.  "Counted" variables (the coupling
constants) contribute to the total-degree cap; marker variables (the degree
bookkeeping variable q, the genus counter) carry only their individual caps.

Each series tracks ``prec``, the counted degree through which its stored
coefficients agree with the untruncated model.  Truncation-closed ring
operations preserve full precision; a partial derivative costs one degree,
because the true top-degree coefficients of the derivative would need
coefficients beyond the cap.  Multiplying back by a positive-degree factor
can restore it, which the valuation-aware rule below accounts for.  Checks
compare two sides only through min(prec) and report that depth.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

from .errors import NonContraction, NonInvertible, PreconditionError, VarTableMismatch
from .rat import ONE, ZERO, rat, rat_str

_BIG = 10**9


class VarTable:
    """Ordered variable descriptors: name, grading weight, degree cap, countedness."""

    __slots__ = ("names", "weights", "caps", "counted", "total_cap", "index",
                 "_tight", "_cdeg_cache")

    def __init__(self, descriptors: Sequence[tuple[str, int, int, bool]], total_cap: int):
        names = tuple(d[0] for d in descriptors)
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        self.names = names
        self.weights = tuple(int(d[1]) for d in descriptors)
        self.caps = tuple(int(d[2]) for d in descriptors)
        self.counted = tuple(bool(d[3]) for d in descriptors)
        self.total_cap = int(total_cap)
        self.index = {n: i for i, n in enumerate(names)}
        # individual caps not already implied by the total-degree rule
        self._tight = tuple(
            (i, cap) for i, (cap, counted) in enumerate(zip(self.caps, self.counted))
            if not counted or cap < total_cap)
        self._cdeg_cache: dict[tuple[int, ...], int] = {}

    @property
    def nvars(self) -> int:
        return len(self.names)

    def counted_degree(self, expo: tuple[int, ...]) -> int:
        d = self._cdeg_cache.get(expo)
        if d is None:
            d = sum(e for e, c in zip(expo, self.counted) if c)
            self._cdeg_cache[expo] = d
        return d

    def admissible(self, expo: tuple[int, ...]) -> bool:
        total = 0
        for e, cap, counted in zip(expo, self.caps, self.counted):
            if e > cap:
                return False
            if counted:
                total += e
        return total <= self.total_cap

    def __eq__(self, other):
        return self is other or (
            isinstance(other, VarTable)
            and self.names == other.names
            and self.caps == other.caps
            and self.counted == other.counted
            and self.total_cap == other.total_cap
        )

    def __hash__(self):
        return hash((self.names, self.caps, self.total_cap))

    def __repr__(self):
        return f"VarTable({list(self.names)}, total_cap={self.total_cap})"


def _check_same_table(a: "Series", b: "Series"):
    if a.table != b.table:
        raise VarTableMismatch(f"{a.table!r} vs {b.table!r}")


class Series:
    """Sparse truncated power series over one VarTable."""

    __slots__ = ("table", "terms", "prec")

    def __init__(self, table: VarTable, terms: Mapping[tuple[int, ...], object] | None = None,
                 prec: int | None = None):
        self.table = table
        self.terms = dict(terms) if terms else {}
        self.prec = table.total_cap if prec is None else min(prec, table.total_cap)

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, table: VarTable) -> "Series":
        return cls(table)

    @classmethod
    def const(cls, table: VarTable, value) -> "Series":
        q = rat(value) if not hasattr(value, "denominator") else value
        z = tuple([0] * table.nvars)
        return cls(table, {z: q} if q != 0 else {})

    @classmethod
    def one(cls, table: VarTable) -> "Series":
        return cls.const(table, 1)

    @classmethod
    def var(cls, table: VarTable, name: str) -> "Series":
        return cls.monomial(table, {name: 1}, ONE)

    @classmethod
    def monomial(cls, table: VarTable, expmap: Mapping[str, int], coeff) -> "Series":
        expo = [0] * table.nvars
        for name, e in expmap.items():
            expo[table.index[name]] = int(e)
        expo = tuple(expo)
        if not table.admissible(expo):
            return cls(table)
        q = rat(coeff) if not hasattr(coeff, "denominator") else coeff
        return cls(table, {expo: q} if q != 0 else {})

    # -- inspection ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, expmap: Mapping[str, int]):
        expo = [0] * self.table.nvars
        for name, e in expmap.items():
            expo[self.table.index[name]] = int(e)
        return self.terms.get(tuple(expo), ZERO)

    def constant_term(self):
        return self.terms.get(tuple([0] * self.table.nvars), ZERO)

    def valuation(self) -> int:
        """Minimal counted degree of a stored monomial (_BIG for the zero series)."""
        if not self.terms:
            return _BIG
        cdeg = self.table.counted_degree
        return min(cdeg(e) for e in self.terms)

    def max_counted_degree(self) -> int:
        if not self.terms:
            return 0
        cdeg = self.table.counted_degree
        return max(cdeg(e) for e in self.terms)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.table == other.table and self.terms == other.terms

    def __hash__(self):
        raise TypeError("Series is not hashable")

    def __repr__(self):
        if not self.terms:
            return "Series(0)"
        bits = []
        for expo in sorted(self.terms)[:6]:
            mono = "*".join(
                f"{n}^{e}" if e > 1 else n
                for n, e in zip(self.table.names, expo) if e
            )
            bits.append(f"({rat_str(self.terms[expo])}){('*' + mono) if mono else ''}")
        more = "" if len(self.terms) <= 6 else f" +{len(self.terms) - 6} terms"
        return f"Series({' + '.join(bits)}{more})"

    # -- ring operations -----------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Series):
            return self + Series.const(self.table, other)
        _check_same_table(self, other)
        out = dict(self.terms)
        for expo, c in other.terms.items():
            acc = out.get(expo)
            s = c if acc is None else acc + c
            if s == 0:
                out.pop(expo, None)
            else:
                out[expo] = s
        return Series(self.table, out, min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        return Series(self.table, {e: -c for e, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        if not isinstance(other, Series):
            return self - Series.const(self.table, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, q) -> "Series":
        q = rat(q) if not hasattr(q, "denominator") else q
        if q == 0:
            return Series(self.table, {}, self.prec)
        return Series(self.table, {e: c * q for e, c in self.terms.items()}, self.prec)

    def __mul__(self, other):
        if not isinstance(other, Series):
            return self.scale(rat(other))
        _check_same_table(self, other)
        table = self.table
        if not self.terms or not other.terms:
            prec = min(self.prec + other.valuation(), other.prec + self.valuation(),
                       table.total_cap)
            return Series(table, {}, prec)
        a, b = self, other
        if len(a.terms) < len(b.terms):
            a, b = b, a
        cdeg = table.counted_degree
        tight = table._tight
        total_cap = table.total_cap
        bitems = sorted(((cdeg(e), e, c) for e, c in b.terms.items()),
                        key=lambda t: t[0])
        aitems = [(cdeg(e), e, c) for e, c in a.terms.items()]
        out: dict[tuple[int, ...], object] = {}
        get = out.get
        for da, ea, ca in aitems:
            limit = total_cap - da
            for db, eb, cb in bitems:
                if db > limit:
                    break
                expo = tuple(map(int.__add__, ea, eb))
                ok = True
                for i, cap in tight:
                    if expo[i] > cap:
                        ok = False
                        break
                if not ok:
                    continue
                prod = ca * cb
                acc = get(expo)
                s = prod if acc is None else acc + prod
                if s == 0:
                    out.pop(expo, None)
                else:
                    out[expo] = s
        va = min(d for d, _, _ in aitems)
        vb = bitems[0][0]
        prec = min(self.prec + vb if a is self else self.prec + va,
                   other.prec + va if a is self else other.prec + vb,
                   table.total_cap)
        return Series(table, out, prec)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Series":
        if n < 0:
            return self.invert() ** (-n)
        out = Series.one(self.table)
        base = self
        k = n
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __truediv__(self, other):
        if isinstance(other, Series):
            return self * other.invert()
        return self.scale(rat(1) / rat(other))

    # -- calculus -------------------------------------------------------

    def derive(self, name: str) -> "Series":
        i = self.table.index.get(name)
        if i is None:
            raise PreconditionError(f"unknown variable {name!r}")
        out = {}
        for expo, c in self.terms.items():
            e = expo[i]
            if e == 0:
                continue
            ne = expo[:i] + (e - 1,) + expo[i + 1:]
            nc = c * e
            acc = out.get(ne)
            s = nc if acc is None else acc + nc
            if s == 0:
                out.pop(ne, None)
            else:
                out[ne] = s
        drop = 1 if self.table.counted[i] else 0
        return Series(self.table, out, self.prec - drop)

    def invert(self) -> "Series":
        c0 = self.constant_term()
        if c0 == 0:
            raise NonInvertible("constant term is zero")
        inv0 = ONE / c0
        n = (Series.const(self.table, c0) - self).scale(inv0)  # zero constant term
        out = Series.one(self.table)
        power = Series.one(self.table)
        guard = self.table.total_cap + sum(self.table.caps) + 2
        for _ in range(guard):
            power = power * n
            if power.is_zero():
                break
            out = out + power
        out = out.scale(inv0)
        out.prec = min(self.prec, self.table.total_cap)
        return out

    def exp(self) -> "Series":
        if self.constant_term() != 0:
            raise PreconditionError("exp needs zero constant term")
        out = Series.one(self.table)
        term = Series.one(self.table)
        k = 0
        guard = self.table.total_cap + sum(self.table.caps) + 2
        while k < guard:
            k += 1
            term = term * self
            if term.is_zero():
                break
            term = term.scale(rat(1, k))
            out = out + term
        out.prec = min(self.prec, self.table.total_cap)
        return out

    def log(self) -> "Series":
        if self.constant_term() != ONE:
            raise PreconditionError("log needs constant term 1")
        b = self - Series.one(self.table)
        out = Series.zero(self.table)
        power = Series.one(self.table)
        k = 0
        guard = self.table.total_cap + sum(self.table.caps) + 2
        while k < guard:
            k += 1
            power = power * b
            if power.is_zero():
                break
            out = out + power.scale(rat((-1) ** (k + 1), k))
        out.prec = min(self.prec, self.table.total_cap)
        return out

    def compose_univariate(self, coeffs: Iterable) -> "Series":
        """sum_k coeffs[k] * self^k for a plain coefficient list."""
        if self.constant_term() != 0:
            raise PreconditionError("composition needs zero constant term")
        out = Series.zero(self.table)
        power = Series.one(self.table)
        for k, ck in enumerate(coeffs):
            if k > 0:
                power = power * self
                if power.is_zero():
                    break
            if ck != 0:
                out = out + power.scale(ck)
        out.prec = min(self.prec, self.table.total_cap)
        return out

    # -- structure ------------------------------------------------------

    def weighted_scale(self, weights: Mapping[str, int] | None = None) -> "Series":
        """Apply the grading operator sum_v w_v * v * d/dv (Euler-type operator)."""
        table = self.table
        if weights is None:
            wvec = table.weights
        else:
            wvec = tuple(weights.get(n, 0) for n in table.names)
        out = {}
        for expo, c in self.terms.items():
            w = sum(e * wv for e, wv in zip(expo, wvec))
            if w:
                out[expo] = c * w
        return Series(table, out, self.prec)

    def restrict_zero(self, names: Iterable[str]) -> "Series":
        idxs = [self.table.index[n] for n in names]
        out = {e: c for e, c in self.terms.items() if all(e[i] == 0 for i in idxs)}
        return Series(self.table, out, self.prec)

    def truncate_counted(self, deg: int) -> "Series":
        cdeg = self.table.counted_degree
        out = {e: c for e, c in self.terms.items() if cdeg(e) <= deg}
        return Series(self.table, out, min(self.prec, deg))

    def map_coefficients(self, fn) -> "Series":
        out = {}
        for e, c in self.terms.items():
            v = fn(c)
            if v != 0:
                out[e] = v
        return Series(self.table, out, self.prec)

    # -- serialization ----------------------------------------------------

    def to_json_obj(self) -> list:
        rows = []
        for expo in sorted(self.terms):
            mono = {n: e for n, e in zip(self.table.names, expo) if e}
            rows.append({"m": mono, "c": rat_str(self.terms[expo])})
        return rows


# -- comparisons ---------------------------------------------------------


def compare_to_depth(a: Series, b: Series, depth: int | None = None):
    """Compare counted-degree truncations through min(precs, depth).

    Returns (equal, compared_depth, first_difference) where first_difference
    is None or (expmap, coeff_a, coeff_b).
    """
    _check_same_table(a, b)
    d = min(a.prec, b.prec)
    if depth is not None:
        d = min(d, depth)
    cdeg = a.table.counted_degree
    diffs = []
    keys = set(a.terms) | set(b.terms)
    for e in keys:
        if cdeg(e) > d:
            continue
        ca = a.terms.get(e, ZERO)
        cb = b.terms.get(e, ZERO)
        if ca != cb:
            diffs.append(e)
    if not diffs:
        return True, d, None
    e = min(diffs, key=lambda t: (cdeg(t), t))
    expmap = {n: x for n, x in zip(a.table.names, e) if x}
    return False, d, (expmap, a.terms.get(e, ZERO), b.terms.get(e, ZERO))


def fixed_point_solve(phi: Callable[[Series], Series], table: VarTable,
                      max_iter: int | None = None) -> Series:
    """Solve u = phi(u) degree by degree.

    phi must raise the counted degree of the unknown by at least one per
    substitution, so the iteration freezes one degree per step; a previously
    frozen coefficient changing is reported as non-contraction.
    """
    cap = table.total_cap
    limit = (cap + 2) if max_iter is None else max_iter
    u = Series.zero(table)
    last_low = -1
    for _ in range(limit):
        nxt = phi(u)
        if nxt.constant_term() != 0:
            raise NonContraction("phi produced a nonzero constant term")
        if nxt == u:
            nxt.prec = cap
            return nxt
        diff = nxt - u
        low = diff.valuation()
        if low <= last_low:
            raise NonContraction(
                f"coefficient changed at frozen degree {low}")
        last_low = low
        u = nxt
    raise NonContraction(f"no fixed point within {limit} iterations")
