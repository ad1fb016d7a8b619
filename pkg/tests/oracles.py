"""Independent brute-force references. Nothing here imports the package's algorithms."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def combo(cols, xs):
    n = len(cols[0])
    return [sum((Fraction(x) * c[r] for x, c in zip(xs, cols)), Fraction(0)) for r in range(n)]


def sq(v):
    return sum(x * x for x in v)


def brute_min_norm2(cols, box=6):
    best = None
    for xs in itertools.product(range(-box, box + 1), repeat=len(cols)):
        if any(xs):
            nn = sq(combo(cols, xs))
            best = nn if best is None or nn < best else best
    return best


def brute_minima(cols, box=5):
    """Squared successive minima by scanning a coefficient box, rank tested with sympy-free elimination."""
    vecs = sorted((sq(combo(cols, xs)), xs) for xs in itertools.product(range(-box, box + 1), repeat=len(cols)) if any(xs))
    chosen, out = [], []
    for nn, xs in vecs:
        if frac_rank(chosen + [list(xs)]) == len(chosen) + 1:
            chosen.append(list(xs))
            out.append(nn)
            if len(out) == len(cols):
                break
    return out


def frac_rank(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def frac_det(m):
    m = [[Fraction(x) for x in r] for r in m]
    n = len(m)
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return det


def count_box_1d_2d(cols, b, box=40):
    """|L ∩ [0,b)^n| by scanning integer coefficients."""
    n = len(cols[0])
    cnt = 0
    for xs in itertools.product(range(-box, box + 1), repeat=len(cols)):
        v = combo(cols, xs)
        if all(0 <= x < b for x in v):
            cnt += 1
    return cnt


def gen_prob_brute(divisors, count):
    """Generation probability of Z/d1 x ... x Z/dk by enumerating all tuples and subgroup closure."""
    elems = list(itertools.product(*[range(d) for d in divisors]))
    total = len(elems) ** count
    hits = 0
    for draw in itertools.product(elems, repeat=count):
        seen = {tuple(0 for _ in divisors)}
        frontier = list(seen)
        while frontier:
            x = frontier.pop()
            for g in draw:
                y = tuple((a + b) % d for a, b, d in zip(x, g, divisors))
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        hits += len(seen) == len(elems)
    return Fraction(hits, total)


def zeta_reference(s, terms=200000):
    """Float zeta with an Euler-Maclaurin tail, used only as a loose sanity reference."""
    acc = math.fsum(k ** -s for k in range(1, terms))
    return acc + terms ** (1 - s) / (s - 1) + 0.5 * terms ** -s
