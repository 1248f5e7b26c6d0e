"""Exact rational scalars.

Every coefficient in this package is an exact rational; there is no floating
point anywhere in the computational core.  gmpy2.mpq is used when available
(it is 5-20x faster on large series products), with fractions.Fraction as a
pure-python fallback.  Both keep values in lowest terms with a positive
denominator, which is what the serialization format relies on.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq as _Q

    def rat(num=0, den=1):
        return _Q(num, den)

    def numer(q):
        return int(q.numerator)

    def denom(q):
        return int(q.denominator)

except ImportError:  # pragma: no cover
    from fractions import Fraction as _Q

    def rat(num=0, den=1):
        return _Q(num, den)

    def numer(q):
        return q.numerator

    def denom(q):
        return q.denominator


ZERO = rat(0)
ONE = rat(1)


def rat_str(q) -> str:
    """Canonical "num/den" form, denominator always written."""
    return f"{numer(q)}/{denom(q)}"


def parse_rat(s: str):
    """Inverse of rat_str; also accepts a bare integer string."""
    s = s.strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return rat(int(num), int(den))
    return rat(int(s))


def binomial(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def bernoulli_numbers(n_max: int):
    """B_0..B_{n_max} (convention B_1 = -1/2), by the defining recurrence."""
    bs = [ONE]
    for n in range(1, n_max + 1):
        acc = rat(0)
        for k in range(n):
            acc += rat(binomial(n + 1, k)) * bs[k]
        bs.append(-acc / rat(n + 1))
    return bs
