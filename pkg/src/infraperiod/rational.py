"""Exact rational helpers: certified square roots, JSON encoding, small matrix algebra."""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Iterable, Sequence

Q = Fraction
Vector = list[Fraction]
Matrix = list[list[Fraction]]  # row-major

SQRT_DIGITS = 40


def as_fraction(x) -> Fraction:
    """Accept int, Fraction, str, or a [num, den] pair."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (list, tuple)):
        num, den = x
        return Fraction(int(num), int(den))
    if isinstance(x, float):
        raise TypeError("floats are not accepted where exact rationals are required")
    return Fraction(x)


def encode(x: Fraction | int) -> list[str]:
    x = Fraction(x)
    return [str(x.numerator), str(x.denominator)]


def decode(x) -> Fraction:
    return as_fraction(x)


def sqrt_floor(x: Fraction, digits: int = SQRT_DIGITS) -> Fraction:
    """Largest m/10^digits with (m/10^digits)^2 <= x."""
    if x < 0:
        raise ValueError("negative argument")
    scale = 10 ** digits
    return Fraction(isqrt(x.numerator * scale * scale // x.denominator), scale)


def sqrt_ceil(x: Fraction, digits: int = SQRT_DIGITS) -> Fraction:
    """Smallest m/10^digits with (m/10^digits)^2 >= x."""
    lo = sqrt_floor(x, digits)
    if lo * lo == x:
        return lo
    return lo + Fraction(1, 10 ** digits)


def is_square(x: Fraction) -> bool:
    return isqrt(x.numerator) ** 2 == x.numerator and isqrt(x.denominator) ** 2 == x.denominator


def pow_half_ceil(base: Fraction, exp2: int, digits: int = SQRT_DIGITS) -> Fraction:
    """Certified upper bound on base^(exp2/2) for base > 0."""
    if exp2 % 2 == 0:
        return Fraction(base) ** (exp2 // 2)
    if exp2 > 0:
        return Fraction(base) ** (exp2 // 2) * sqrt_ceil(Fraction(base), digits)
    return Fraction(base) ** ((exp2 - 1) // 2) * sqrt_ceil(Fraction(base), digits)


def pow_half_floor(base: Fraction, exp2: int, digits: int = SQRT_DIGITS) -> Fraction:
    if exp2 % 2 == 0:
        return Fraction(base) ** (exp2 // 2)
    if exp2 > 0:
        return Fraction(base) ** (exp2 // 2) * sqrt_floor(Fraction(base), digits)
    return Fraction(base) ** ((exp2 - 1) // 2) * sqrt_floor(Fraction(base), digits)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def norm2(u: Sequence[Fraction]) -> Fraction:
    return dot(u, u)


def to_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[as_fraction(x) for x in row] for row in rows]


def transpose(m: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*m)]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), 0) for col in bt] for row in a]


def identity(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def determinant(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-valued Gaussian elimination."""
    a = [[Fraction(x) for x in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = 1 / a[c][c]
        for r in range(c + 1, n):
            if a[r][c]:
                f = a[r][c] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def inverse(m: Sequence[Sequence]) -> Matrix:
    """Exact inverse of a square rational matrix."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def rank(m: Sequence[Sequence]) -> int:
    a = [[Fraction(x) for x in row] for row in m]
    rows, cols = len(a), len(a[0]) if a else 0
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, rows):
            if a[i][c]:
                f = a[i][c] / a[r][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == rows:
            break
    return r


def common_denominator(values: Iterable[Fraction]) -> int:
    from math import lcm

    d = 1
    for v in values:
        d = lcm(d, Fraction(v).denominator)
    return d


def round_half_up(x: Fraction) -> int:
    """Nearest integer, ties rounded up."""
    return (2 * x.numerator + x.denominator) // (2 * x.denominator)


def floor_frac(x: Fraction) -> int:
    return x.numerator // x.denominator


def ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def iv_endpoints(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an mpmath interval."""
    out = []
    for sign, man, exp, _ in x._mpi_:
        v = Fraction(man) * (Fraction(2) ** exp)
        out.append(-v if sign else v)
    return out[0], out[1]


def sig_figs(x: Fraction, digits: int = 3, direction: str = "up") -> tuple[int, int]:
    """(mantissa, exponent) with x ~ mantissa * 10^(exponent - digits + 1); direction up or nearest."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("positive argument required")
    e = len(str(x.numerator // x.denominator)) - 1 if x >= 1 else -len(str(x.denominator // x.numerator))
    while x >= Fraction(10) ** (e + 1):
        e += 1
    while x < Fraction(10) ** e:
        e -= 1
    y = x / Fraction(10) ** (e - digits + 1)
    m = ceil_frac(y) if direction == "up" else round_half_up(y)
    if m >= 10**digits:
        m, e = m // 10 + (m % 10 != 0 and direction == "up"), e + 1
    return m, e


def format_sig(x: Fraction, digits: int = 3, direction: str = "up") -> str:
    m, e = sig_figs(x, digits, direction)
    s = str(m)
    return f"{s[0]}.{s[1:]}e{e}" if digits > 1 else f"{s}e{e}"
