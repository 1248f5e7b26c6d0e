"""Finite two-sided expansions in one or more formal z slots.

Coefficients are duck-typed: anything with +, -, * and an is_zero-like
notion works, so entries can be Series or symbolic expressions.  Powers
outside the window [-window, window] (per slot) are discarded and the
``truncated`` flag records that this happened; identity checks treat a set
of safe powers explicitly, so the flag is informational.

S-matrices live in one slot; two-point functions in two; the repeated
loop-operator images in as many slots as there are insertions.
"""

from __future__ import annotations

from typing import Callable, Mapping

from .errors import WindowOverflow


def _is_zero(c) -> bool:
    z = getattr(c, "is_zero", None)
    if z is not None:
        return z() if callable(z) else bool(z)
    return c == 0


def _one_like(zero_coeff):
    from .series import Series
    from .symexpr import SymExpr

    if isinstance(zero_coeff, Series):
        return Series.one(zero_coeff.table)
    if isinstance(zero_coeff, SymExpr):
        return zero_coeff.table.one()
    raise TypeError("cannot build a unit for this coefficient type")


class LaurentZ:
    __slots__ = ("nslots", "window", "terms", "zero_coeff", "truncated")

    def __init__(self, nslots: int, window: int, zero_coeff,
                 terms: Mapping[tuple[int, ...], object] | None = None,
                 truncated: bool = False):
        self.nslots = nslots
        self.window = window
        self.zero_coeff = zero_coeff
        self.terms = dict(terms) if terms else {}
        self.truncated = truncated

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, nslots: int, window: int, zero_coeff) -> "LaurentZ":
        return cls(nslots, window, zero_coeff)

    @classmethod
    def term(cls, nslots: int, window: int, zero_coeff, powers: tuple[int, ...],
             coeff) -> "LaurentZ":
        out = cls(nslots, window, zero_coeff)
        out._add_term(powers, coeff)
        return out

    def _add_term(self, powers: tuple[int, ...], coeff):
        if _is_zero(coeff):
            return
        if any(abs(p) > self.window for p in powers):
            self.truncated = True
            return
        acc = self.terms.get(powers)
        s = coeff if acc is None else acc + coeff
        if _is_zero(s):
            self.terms.pop(powers, None)
        else:
            self.terms[powers] = s

    def _compatible(self, other: "LaurentZ"):
        if self.nslots != other.nslots or self.window != other.window:
            raise WindowOverflow("mismatched z slots or window")

    # -- ring -----------------------------------------------------------

    def __add__(self, other: "LaurentZ") -> "LaurentZ":
        self._compatible(other)
        out = LaurentZ(self.nslots, self.window, self.zero_coeff, self.terms,
                       self.truncated or other.truncated)
        for p, c in other.terms.items():
            out._add_term(p, c)
        return out

    def __neg__(self) -> "LaurentZ":
        return LaurentZ(self.nslots, self.window, self.zero_coeff,
                        {p: -c for p, c in self.terms.items()}, self.truncated)

    def __sub__(self, other: "LaurentZ") -> "LaurentZ":
        return self + (-other)

    def __mul__(self, other) -> "LaurentZ":
        if isinstance(other, LaurentZ):
            self._compatible(other)
            out = LaurentZ(self.nslots, self.window, self.zero_coeff,
                           truncated=self.truncated or other.truncated)
            for pa, ca in self.terms.items():
                for pb, cb in other.terms.items():
                    out._add_term(tuple(x + y for x, y in zip(pa, pb)), ca * cb)
            return out
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentZ":
        if n < 0:
            raise WindowOverflow("negative Laurent power")
        out = LaurentZ.term(self.nslots, self.window, self.zero_coeff,
                            tuple([0] * self.nslots), _one_like(self.zero_coeff))
        for _ in range(n):
            out = out * self
        return out

    def scale(self, coeff) -> "LaurentZ":
        out = LaurentZ(self.nslots, self.window, self.zero_coeff,
                       truncated=self.truncated)
        for p, c in self.terms.items():
            out._add_term(p, c * coeff)
        return out

    def shift(self, slot: int, by: int) -> "LaurentZ":
        """Multiply by z_slot^by."""
        out = LaurentZ(self.nslots, self.window, self.zero_coeff,
                       truncated=self.truncated)
        for p, c in self.terms.items():
            q = list(p)
            q[slot] += by
            out._add_term(tuple(q), c)
        return out

    def map_coefficients(self, fn: Callable) -> "LaurentZ":
        out = LaurentZ(self.nslots, self.window, self.zero_coeff,
                       truncated=self.truncated)
        for p, c in self.terms.items():
            out._add_term(p, fn(c))
        return out

    def substitute_z_sign(self) -> "LaurentZ":
        """z -> -z in every slot."""
        out = LaurentZ(self.nslots, self.window, self.zero_coeff,
                       truncated=self.truncated)
        for p, c in self.terms.items():
            s = sum(p)
            out._add_term(p, c if s % 2 == 0 else -c)
        return out

    # -- inspection -------------------------------------------------------

    def coeff(self, powers: tuple[int, ...]):
        return self.terms.get(powers, self.zero_coeff)

    def is_zero(self) -> bool:
        return not self.terms

    def powers(self):
        return sorted(self.terms)

    def __repr__(self):
        return f"LaurentZ(slots={self.nslots}, powers={sorted(self.terms)[:8]})"
