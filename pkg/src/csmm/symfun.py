"""Partitions, border strips, Murnaghan–Nakayama expansions and characters.

Also holds the dictionary between ε-contracted chain labels
``C(n_1, …, n_N)`` and Schur functions, and the reduction of power-sum
polynomials to N variables (used to give physical p = 1 states a
canonical form).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

Partition = Tuple[int, ...]
SchurExpansion = Dict[Partition, int]


def partition(parts: Sequence[int]) -> Partition:
    """Canonical partition: weakly decreasing positive parts."""
    out = tuple(sorted((int(x) for x in parts if x), reverse=True))
    if any(x < 0 for x in out):
        raise ValueError(f"negative part in {parts!r}")
    return out


def partitions(n: int, max_part: Optional[int] = None, max_len: Optional[int] = None) -> Iterator[Partition]:
    """All partitions of n (decreasing parts), optionally capped in part size and length."""
    if max_part is None:
        max_part = n
    if max_len is None:
        max_len = n

    def rec(rem: int, cap: int, length: int):
        if rem == 0:
            yield ()
            return
        if length == 0:
            return
        for first in range(min(rem, cap), 0, -1):
            for rest in rec(rem - first, first, length - 1):
                yield (first,) + rest

    yield from rec(n, max_part, max_len)


def partition_count(n: int, max_part: Optional[int] = None) -> int:
    return sum(1 for _ in partitions(n, max_part))


def conjugate(lam: Partition) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for x in lam if x > j) for j in range(lam[0]))


def z_factor(mu: Partition) -> int:
    """Centralizer order ``z_μ = Π i^{m_i} m_i!``."""
    out = 1
    for i in set(mu):
        m = mu.count(i)
        out *= i ** m * factorial(m)
    return out


def cells(lam: Partition) -> FrozenSet[Tuple[int, int]]:
    return frozenset((r, c) for r, row in enumerate(lam) for c in range(row))


# ---------------------------------------------------------------------------
# Border strips
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BorderStrip:
    cells: FrozenSet[Tuple[int, int]]
    height: int

    @property
    def size(self) -> int:
        return len(self.cells)


def _beta(lam: Partition, L: int) -> List[int]:
    padded = list(lam) + [0] * (L - len(lam))
    return [padded[i] + (L - 1 - i) for i in range(L)]


def _from_beta(beta: Sequence[int]) -> Partition:
    b = sorted(beta, reverse=True)
    L = len(b)
    return partition([b[i] - (L - 1 - i) for i in range(L)])


def add_border_strips(mu: Partition, n: int) -> List[Tuple[Partition, BorderStrip]]:
    """All ``ν ⊇ μ`` such that ``ν/μ`` is a border strip with n cells."""
    mu = partition(mu)
    L = len(mu) + n
    beta = _beta(mu, L)
    bset = set(beta)
    out = []
    for b in beta:
        nb = b + n
        if nb in bset:
            continue
        new_beta = [nb if x == b else x for x in beta]
        nu = _from_beta(new_beta)
        strip = cells(nu) - cells(mu)
        rows = {r for r, _ in strip}
        out.append((nu, BorderStrip(frozenset(strip), len(rows) - 1)))
    out.sort(key=lambda t: t[0], reverse=True)
    return out


def remove_border_strips(nu: Partition, n: int) -> List[Tuple[Partition, BorderStrip]]:
    """All ``μ ⊆ ν`` such that ``ν/μ`` is a border strip with n cells."""
    nu = partition(nu)
    L = len(nu)
    if L == 0:
        return []
    beta = _beta(nu, L)
    bset = set(beta)
    out = []
    for b in beta:
        nb = b - n
        if nb < 0 or nb in bset:
            continue
        mu = _from_beta([nb if x == b else x for x in beta])
        strip = cells(nu) - cells(mu)
        rows = {r for r, _ in strip}
        out.append((mu, BorderStrip(frozenset(strip), len(rows) - 1)))
    return out


def mn_expand(n: int, mu: Sequence[int], num_rows_cap: Optional[int] = None) -> SchurExpansion:
    """``p_n · s_μ`` in the Schur basis by the border-strip rule.

    Shapes with more than ``num_rows_cap`` rows are dropped, which is the
    effect of restricting to that many variables.
    """
    if n < 1:
        raise ValueError("n must be positive")
    out: SchurExpansion = {}
    for nu, strip in add_border_strips(partition(mu), n):
        if num_rows_cap is not None and len(nu) > num_rows_cap:
            continue
        out[nu] = out.get(nu, 0) + (-1) ** strip.height
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _char(nu: Partition, mu: Tuple[int, ...]) -> int:
    if not mu:
        return 1 if not nu else 0
    first, rest = mu[0], mu[1:]
    total = 0
    for smaller, strip in remove_border_strips(nu, first):
        total += (-1) ** strip.height * _char(smaller, rest)
    return total


def char_value(nu: Sequence[int], mu: Sequence[int]) -> int:
    """Irreducible character ``χ^ν`` on the class of cycle type ``μ``.

    ``mu`` may be given in any order; strips are removed in the order given
    (the result does not depend on it).
    """
    nu = partition(nu)
    mu_t = tuple(int(x) for x in mu if x)
    if sum(nu) != sum(mu_t):
        raise ValueError(f"size mismatch: |{nu}| != |{mu_t}|")
    return _char(nu, mu_t)


def character_table(n: int) -> Tuple[List[Partition], List[Partition], List[List[int]]]:
    parts = list(partitions(n))
    return parts, parts, [[char_value(nu, mu) for mu in parts] for nu in parts]


def character_orthogonality(n: int) -> bool:
    """Exact row orthogonality ``Σ_μ χ^λ(μ) χ^ν(μ) / z_μ = δ_{λν}`` of the S_n table."""
    rows, cols, table = character_table(n)
    for i in range(len(rows)):
        for j in range(len(rows)):
            s = sum(Fraction(table[i][c] * table[j][c], z_factor(mu)) for c, mu in enumerate(cols))
            if s != (1 if i == j else 0):
                return False
    return True


def character_table_csv(n: int) -> str:
    rows, cols, table = character_table(n)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["nu\\mu"] + [" ".join(map(str, c)) for c in cols])
    for nu, row in zip(rows, table):
        w.writerow([" ".join(map(str, nu))] + row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Chain labels C(n_1, …, n_N)
# ---------------------------------------------------------------------------


def sort_with_sign(items: Sequence) -> Tuple[int, Tuple]:
    """Sort a sequence, returning (sign of the sorting permutation, sorted tuple).

    The sign is 0 when two entries coincide (an alternating form vanishes).
    """
    lst = list(items)
    sign = 1
    for i in range(1, len(lst)):
        j = i
        while j > 0 and lst[j - 1] > lst[j]:
            lst[j - 1], lst[j] = lst[j], lst[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(lst, lst[1:]):
        if a == b:
            return 0, tuple(lst)
    return sign, tuple(lst)


@dataclass(frozen=True)
class CLabel:
    """Exponents of an ε-contraction ``ε Π_r (λ†Z†^{n_r})_{i_r}`` for p = 1."""

    exponents: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(x) for x in self.exponents))
        if any(x < 0 for x in self.exponents):
            raise ValueError("exponents must be non-negative")

    @property
    def N(self) -> int:
        return len(self.exponents)

    def canonical(self) -> Tuple[int, "CLabel"]:
        sign, srt = sort_with_sign(self.exponents)
        return sign, CLabel(srt)

    def __str__(self) -> str:
        return "C(" + ",".join(map(str, self.exponents)) + ")"


def c_to_schur(label) -> Tuple[int, Partition]:
    """Sign and partition with ``C(n) = sign · s_μ · Δ`` and ``μ_i = n_{(N-i+1)} - (N-i)``.

    A repeated exponent gives sign 0 (the zero expansion).
    """
    ex = label.exponents if isinstance(label, CLabel) else tuple(label)
    sign, srt = sort_with_sign(ex)
    if sign == 0:
        return 0, ()
    N = len(srt)
    return sign, partition([srt[N - i] - (N - i) for i in range(1, N + 1)])


def schur_to_c(mu: Sequence[int], N: int) -> CLabel:
    """Inverse of :func:`c_to_schur` for the + sign: the increasing label of ``s_μ`` in N variables."""
    mu = partition(mu)
    if len(mu) > N:
        raise ValueError(f"{mu} has more than {N} rows")
    padded = list(mu) + [0] * (N - len(mu))
    return CLabel(tuple(padded[N - 1 - r] + r for r in range(N)))


def power_times_c(n: int, label) -> Dict[CLabel, int]:
    """``Tr(Z†^n) · C(n_1…n_N)`` as a signed sum of canonical labels."""
    if n < 1:
        raise ValueError("n must be positive")
    ex = label.exponents if isinstance(label, CLabel) else tuple(label)
    out: Dict[CLabel, int] = {}
    for r in range(len(ex)):
        bumped = list(ex)
        bumped[r] += n
        sign, srt = sort_with_sign(bumped)
        if sign:
            key = CLabel(srt)
            out[key] = out.get(key, 0) + sign
    return {k: v for k, v in out.items() if v}


# ---------------------------------------------------------------------------
# Power-sum polynomials in N variables
# ---------------------------------------------------------------------------

PowerPoly = Dict[Tuple[int, ...], Fraction]


def pp_unit(N: int) -> PowerPoly:
    return {(0,) * N: Fraction(1)}


def pp_add(a: PowerPoly, b: PowerPoly, scale: Fraction = Fraction(1)) -> PowerPoly:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + scale * v
        if out[k] == 0:
            del out[k]
    return out


def pp_mul(a: PowerPoly, b: PowerPoly) -> PowerPoly:
    out: PowerPoly = {}
    for k1, v1 in a.items():
        for k2, v2 in b.items():
            k = tuple(x + y for x, y in zip(k1, k2))
            out[k] = out.get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _elementary_in_p(N: int) -> Tuple[Tuple[Tuple[Tuple[int, ...], Fraction], ...], ...]:
    """``e_0 … e_N`` as polynomials in ``p_1 … p_N`` via Newton's identities."""
    es: List[PowerPoly] = [pp_unit(N)]
    for j in range(1, N + 1):
        acc: PowerPoly = {}
        for i in range(1, j + 1):
            pi = [0] * N
            pi[i - 1] = 1
            term = pp_mul(es[j - i], {tuple(pi): Fraction(1)})
            acc = pp_add(acc, term, Fraction((-1) ** (i - 1), j))
        es.append(acc)
    return tuple(tuple(sorted(e.items())) for e in es)


@lru_cache(maxsize=None)
def _power_sum_reduced(a: int, N: int) -> Tuple[Tuple[Tuple[int, ...], Fraction], ...]:
    if a <= N:
        pa = [0] * N
        pa[a - 1] = 1
        return ((tuple(pa), Fraction(1)),)
    es = [dict(e) for e in _elementary_in_p(N)]
    acc: PowerPoly = {}
    for i in range(1, N + 1):
        term = pp_mul(es[i], dict(_power_sum_reduced(a - i, N)))
        acc = pp_add(acc, term, Fraction((-1) ** (i - 1)))
    return tuple(sorted(acc.items()))


def power_sum_in_N_vars(a: int, N: int) -> PowerPoly:
    """``p_a`` restricted to N variables, written in ``p_1 … p_N``."""
    if a < 1:
        raise ValueError("power-sum index must be positive")
    return dict(_power_sum_reduced(a, N))


def power_monomial(rho: Sequence[int], N: int) -> PowerPoly:
    """``Π_j p_{ρ_j}`` in N variables."""
    out = pp_unit(N)
    for a in rho:
        out = pp_mul(out, power_sum_in_N_vars(a, N))
    return out


@lru_cache(maxsize=None)
def _schur_in_p(mu: Partition, N: int) -> Tuple[Tuple[Tuple[int, ...], Fraction], ...]:
    if len(mu) > N:
        return ()
    n = sum(mu)
    acc: PowerPoly = {}
    for rho in partitions(n):
        chi = char_value(mu, rho)
        if chi:
            acc = pp_add(acc, power_monomial(rho, N), Fraction(chi, z_factor(rho)))
    return tuple(sorted(acc.items()))


def schur_in_power_sums(mu: Sequence[int], N: int) -> PowerPoly:
    """``s_μ(x_1…x_N)`` written in ``p_1 … p_N``."""
    return dict(_schur_in_p(partition(mu), N))
