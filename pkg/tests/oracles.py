"""Independent brute-force oracles used by the test suite.

They work with explicit polynomials in a fixed number of variables and
with enumeration of permutations, and share no code with the package.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from itertools import permutations
from math import comb, factorial
from typing import Dict, List, Sequence, Tuple

Poly = Dict[Tuple[int, ...], int]


def perm_sign(perm: Sequence[int]) -> int:
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca * cb
    return {e: c for e, c in out.items() if c}


def power_sum(n: int, L: int) -> Poly:
    return {tuple(n if i == j else 0 for j in range(L)): 1 for i in range(L)}


def alternant(exps: Sequence[int], L: int) -> Poly:
    """``det(x_i^{exps_j})`` as an explicit polynomial in L variables."""
    out: Poly = {}
    for perm in permutations(range(L)):
        e = tuple(exps[perm[i]] for i in range(L))
        out[e] = out.get(e, 0) + perm_sign(perm)
    return {e: c for e, c in out.items() if c}


def decompose_alternating(f: Poly, L: int) -> Dict[Tuple[int, ...], int]:
    """Write an alternating polynomial as Σ c · alternant(strictly decreasing exponents)."""
    f = dict(f)
    out = {}
    while f:
        lead = max(e for e in f if all(e[i] > e[i + 1] for i in range(L - 1)))
        c = f[lead]
        out[lead] = c
        for e, v in alternant(lead, L).items():
            f[e] = f.get(e, 0) - c * v
            if f[e] == 0:
                del f[e]
    return out


def _shape_from_exps(exps: Sequence[int]) -> Tuple[int, ...]:
    L = len(exps)
    return tuple(x for x in (exps[i] - (L - 1 - i) for i in range(L)) if x)


def power_times_schur(n: int, mu: Sequence[int]) -> Dict[Tuple[int, ...], int]:
    """``p_n · s_μ`` in Schur functions via bialternants in |μ|+n variables."""
    L = sum(mu) + n
    padded = list(mu) + [0] * (L - len(mu))
    a = alternant([padded[i] + L - 1 - i for i in range(L)], L)
    dec = decompose_alternating(poly_mul(power_sum(n, L), a), L)
    return {_shape_from_exps(e): c for e, c in dec.items()}


def power_times_alternant(n: int, exps: Sequence[int]) -> Dict[Tuple[int, ...], int]:
    """``p_n(x) · det(x_i^{e_j})`` as Σ c · det with increasing exponent labels (len(exps) variables)."""
    L = len(exps)
    dec = decompose_alternating(poly_mul(power_sum(n, L), alternant(exps, L)), L)
    # reversing a decreasing exponent list to increasing order permutes the columns
    flip = -1 if (L * (L - 1) // 2) % 2 else 1
    return {tuple(sorted(e)): flip * c for e, c in dec.items()}


def partitions_of(n: int, max_part: int = None) -> List[Tuple[int, ...]]:
    max_part = n if max_part is None else max_part
    if n == 0:
        return [()]
    out = []
    for first in range(min(n, max_part), 0, -1):
        for rest in partitions_of(n - first, first):
            out.append((first,) + rest)
    return out


def frobenius_character(lam: Sequence[int], mu: Sequence[int]) -> int:
    """``χ^λ(μ)`` = coefficient of ``x^{λ+δ}`` in ``p_μ · a_δ`` (n variables)."""
    n = sum(lam)
    L = n
    f = alternant([L - 1 - i for i in range(L)], L)
    for part in mu:
        f = poly_mul(f, power_sum(part, L))
    padded = list(lam) + [0] * (L - len(lam))
    return f.get(tuple(padded[i] + L - 1 - i for i in range(L)), 0)


def cycle_type(perm: Sequence[int]) -> Tuple[int, ...]:
    seen, out = set(), []
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        out.append(length)
    return tuple(sorted(out, reverse=True))


def class_sizes(n: int) -> Dict[Tuple[int, ...], int]:
    """Conjugacy class sizes of S_n by enumerating all permutations."""
    return dict(Counter(cycle_type(p) for p in permutations(range(n))))


def bounded_partition_count(e: int, max_part: int) -> int:
    return len(partitions_of(e, max_part))


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def single_oscillator_sym11_vacuum() -> Fraction:
    """``½⟨0|(a a† + a† a)|0⟩`` for one oscillator with [a, a†] = 1."""
    return Fraction(1, 2) * (1 + 0)


def wick_pairings(n: int) -> int:
    """Norm of ``(a†)^n|0⟩`` squared: n!."""
    return factorial(n)
