"""The defining commutation relations of the invariant algebra, written once.

Each family produces a list of ``(coefficient, word)`` pairs whose sum is
zero in the algebra.  A word is a tuple of generator symbols read as an
operator product (rightmost factor acts first):

* ``("e", a, b, n, m)`` for ``e^a_{b;n,m} = λ†^a Sym(Z^n Z†^m) λ_b``;
* ``("t", n, m)`` for ``t_{n,m} = Tr Sym(Z^n Z†^m)``.

Coefficients are built from ``eps1`` and ``eps2`` with ordinary ring
operations, so the same code serves rational values and symbolic
polynomials.  Generators with a negative index are zero and are dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Any, Iterator, List, Tuple

Symbol = Tuple
Word = Tuple[Symbol, ...]
Terms = List[Tuple[Any, Word]]

E_FAMILIES = ("R_trace", "R_e00", "R_t20e", "R_t11e", "R_t02e", "R_e10e", "R_t30e", "R_t21e", "R_t12e")
T_FAMILIES = ("R_t30t", "R_t21t", "R_t12t", "R_t03t")
FAMILIES = E_FAMILIES + T_FAMILIES

# number of flavor indices each family takes
FLAVOR_ARITY = {
    "R_trace": 0, "R_e00": 4, "R_t20e": 2, "R_t11e": 2, "R_t02e": 2, "R_e10e": 4,
    "R_t30e": 2, "R_t21e": 2, "R_t12e": 2,
    "R_t30t": 0, "R_t21t": 0, "R_t12t": 0, "R_t03t": 0,
}


def e(a: int, b: int, n: int, m: int):
    return ("e", a, b, n, m) if n >= 0 and m >= 0 else None


def t(n: int, m: int):
    return ("t", n, m) if n >= 0 and m >= 0 else None


def _binom(a: int, b: int) -> int:
    if b < 0 or a < 0 or b > a:
        return 0
    return comb(a, b)


def _delta(i: int, j: int) -> int:
    return 1 if i == j else 0


class _Builder:
    def __init__(self, zero, one):
        self.terms: Terms = []
        self.zero = zero
        self.one = one

    def add(self, coef, *symbols):
        if any(s is None for s in symbols):
            return
        if isinstance(coef, (int, Fraction)) and coef == 0:
            return
        self.terms.append((coef, tuple(symbols)))

    def commutator(self, coef, x, y):
        self.add(coef, x, y)
        self.add(-coef, y, x)


def _splits(total: int) -> Iterator[Tuple[int, int]]:
    for a in range(total + 1):
        yield a, total - a


@dataclass(frozen=True)
class RelationInstance:
    family: str
    flavors: Tuple[int, ...]
    indices: Tuple[int, int]

    def label(self) -> str:
        f = ",".join(map(str, self.flavors))
        return f"{self.family}[{f}|{self.indices[0]},{self.indices[1]}]"


def relation_terms(inst: RelationInstance, p: int, eps1, eps2, one=1) -> Terms:
    """``LHS - RHS`` of one relation as ``(coefficient, word)`` pairs.

    ``one`` is the unit of the coefficient ring (``1`` or a ParamPoly).
    """
    fam = inst.family
    x, y = inst.indices
    eps3 = eps2 - eps1 * p
    B = _Builder(0 * one, one)
    fl = inst.flavors
    Q = lambda v: one * Fraction(v)  # noqa: E731 - short coefficient lift

    if fam == "R_trace":
        n, m = x, y
        for a in range(1, p + 1):
            B.add(one, e(a, a, n, m))
        B.add(-eps3, t(n, m))
    elif fam == "R_e00":
        a, b, c, d = fl
        n, m = x, y
        B.commutator(one, e(a, b, 0, 0), e(c, d, n, m))
        B.add(Q(-_delta(c, b)), e(a, d, n, m))
        B.add(Q(_delta(a, d)), e(c, b, n, m))
    elif fam in ("R_t20e", "R_t11e", "R_t02e"):
        a, b = fl
        n, m = x, y
        if fam == "R_t20e":
            B.commutator(one, t(2, 0), e(a, b, n, m))
            B.add(Q(-2 * m), e(a, b, n + 1, m - 1))
        elif fam == "R_t11e":
            B.commutator(one, t(1, 1), e(a, b, n, m))
            B.add(Q(-(m - n)), e(a, b, n, m))
        else:
            B.commutator(one, t(0, 2), e(a, b, n, m))
            B.add(Q(2 * n), e(a, b, n - 1, m + 1))
    elif fam == "R_e10e":
        a, b, c, d = fl
        m, n = x, y
        B.commutator(one, e(a, b, 1, 0), e(c, d, m, n))
        B.add(Q(-_delta(c, b)), e(a, d, m + 1, n))
        B.add(Q(_delta(a, d)), e(c, b, m + 1, n))
        B.add(-eps2 * Fraction(n, 2) * _delta(c, b), e(a, d, m, n - 1))
        B.add(-eps2 * Fraction(n, 2) * _delta(a, d), e(c, b, m, n - 1))
        pref = Fraction(1, (1 + m + n) * comb(m + n, m))
        for m1, m2 in _splits(m):
            for n1, n2 in _splits(n - 1):
                w = pref * (1 + m1 + n1) * _binom(m1 + n1, m1) * _binom(m2 + n2, m2)
                if w == 0:
                    continue
                # the double sum enters the right-hand side with a minus sign
                c0 = eps1 * w
                # in the Kronecker-delta products the weighted index pair
                # (m1, n1) sits on the right-hand factor (see the ledger)
                for f in range(1, p + 1):
                    if c == b:
                        B.add(c0, e(a, f, m2, n2), e(f, d, m1, n1))
                    if a == d:
                        B.add(c0, e(c, f, m1, n1), e(f, b, m2, n2))
                B.add(-c0, e(a, d, m1, n1), e(c, b, m2, n2))
                B.add(-c0, e(a, d, m2, n2), e(c, b, m1, n1))
        B.add(eps1 * n * _delta(c, d), e(a, b, m, n - 1))
    elif fam == "R_t30e":
        a, b = fl
        m, n = x, y
        B.commutator(one, t(3, 0), e(a, b, m, n))
        B.add(Q(-3 * n), e(a, b, m + 2, n - 1))
        pref = Fraction(1, (m + n + 1) * comb(m + n, m))
        for m1, m2 in _splits(m):
            for n1, n2 in _splits(n):
                if n2 < 2:
                    continue
                w = pref * (1 + m1 + n1) * _binom(m1 + n1, m1) * (3 * m2 + 3) * _binom(m2 + 1 + n2 - 2, m2 + 1)
                if w == 0:
                    continue
                for f in range(1, p + 1):
                    B.add(-eps1 * w, e(a, f, m1, n1), e(f, b, m2 + 1, n2 - 2))
                    B.add(eps1 * w, e(a, f, m2 + 1, n2 - 2), e(f, b, m1, n1))
        pref2 = Fraction(3, 2) / comb(m + n, m)
        for m1, m2 in _splits(m):
            for n1, n2 in _splits(n - 3) if n >= 3 else []:
                w = pref2 * (1 + m1 + n1) * (1 + m2 + n2) * _binom(m1 + n1, m1) * _binom(m2 + n2, m2)
                for f in range(1, p + 1):
                    B.add(eps1 * eps2 * w, e(a, f, m1, n1), e(f, b, m2, n2))
        B.add(-eps2 * eps2 * Fraction(n * (n - 1) * (n - 2), 4), e(a, b, m, n - 3))
    elif fam == "R_t21e":
        a, b = fl
        m, n = x, y
        B.commutator(one, t(2, 1), e(a, b, m, n))
        B.add(Q(-(2 * n - m)), e(a, b, m + 1, n))
        pref = Fraction(1, (m + n + 1) * comb(m + n, m))
        for m1, m2 in _splits(m):
            for n1, n2 in _splits(n):
                if n2 < 1:
                    continue
                w = pref * (1 + m1 + n1) * _binom(m1 + n1, m1) * (n2 - 1 - 2 * m2) * _binom(m2 + n2 - 1, m2)
                if w == 0:
                    continue
                for f in range(1, p + 1):
                    B.add(-eps1 * w, e(a, f, m1, n1), e(f, b, m2, n2 - 1))
                    B.add(eps1 * w, e(a, f, m2, n2 - 1), e(f, b, m1, n1))
        pref2 = Fraction(3, 2) / comb(m + n, m)
        if m >= 1 and n >= 2:
            for m1, m2 in _splits(m - 1):
                for n1, n2 in _splits(n - 2):
                    w = pref2 * (1 + m1 + n1) * (1 + m2 + n2) * _binom(m1 + n1, m1) * _binom(m2 + n2, m2)
                    for f in range(1, p + 1):
                        B.add(-eps1 * eps2 * w, e(a, f, m1, n1), e(f, b, m2, n2))
        B.add(eps2 * eps2 * Fraction(m * n * (n - 1), 4), e(a, b, m - 1, n - 2))
    elif fam == "R_t12e":
        a, b = fl
        m, n = x, y
        B.commutator(one, t(1, 2), e(a, b, m, n))
        B.add(Q(-(n - 2 * m)), e(a, b, m, n + 1))
        pref = Fraction(1, (m + n + 1) * comb(m + n, m))
        for m1, m2 in _splits(m):
            for n1, n2 in _splits(n):
                if m2 < 1:
                    continue
                w = pref * (1 + m1 + n1) * _binom(m1 + n1, m1) * (m2 - 1 - 2 * n2) * _binom(m2 - 1 + n2, m2 - 1)
                if w == 0:
                    continue
                for f in range(1, p + 1):
                    B.add(-eps1 * w, e(a, f, m1, n1), e(f, b, m2 - 1, n2))
                    B.add(eps1 * w, e(a, f, m2 - 1, n2), e(f, b, m1, n1))
        pref2 = Fraction(3, 2) / comb(m + n, m)
        if m >= 2 and n >= 1:
            for m1, m2 in _splits(m - 2):
                for n1, n2 in _splits(n - 1):
                    w = pref2 * (1 + m1 + n1) * (1 + m2 + n2) * _binom(m1 + n1, m1) * _binom(m2 + n2, m2)
                    for f in range(1, p + 1):
                        B.add(eps1 * eps2 * w, e(a, f, m1, n1), e(f, b, m2, n2))
        B.add(-eps2 * eps2 * Fraction(m * (m - 1) * n, 4), e(a, b, m - 2, n - 1))
    elif fam in T_FAMILIES:
        m, n = x, y
        # (generator, leading coefficient and target, sign of the double sums,
        #  ranges of the double sums, sign and target of the last term)
        if fam == "R_t30t":
            gen = t(3, 0)
            lead = (3 * n, t(m + 2, n - 1))
            sgn, mr, nr = -1, m, n - 3
            last = (1, Fraction(n * (n - 1) * (n - 2), 4), t(m, n - 3))
        elif fam == "R_t21t":
            gen = t(2, 1)
            lead = (2 * n - m, t(m + 1, n))
            sgn, mr, nr = 1, m - 1, n - 2
            last = (-1, Fraction(m * n * (n - 1), 4), t(m - 1, n - 2))
        elif fam == "R_t12t":
            gen = t(1, 2)
            lead = (n - 2 * m, t(m, n + 1))
            sgn, mr, nr = -1, m - 2, n - 1
            last = (1, Fraction(m * (m - 1) * n, 4), t(m - 2, n - 1))
        else:
            gen = t(0, 3)
            lead = (-3 * m, t(m - 1, n + 2))
            sgn, mr, nr = 1, m - 3, n
            last = (-1, Fraction(m * (m - 1) * (m - 2), 4), t(m - 3, n))
        B.commutator(one, gen, t(m, n))
        B.add(Q(-lead[0]), lead[1])
        pref = Fraction(3, 2) / comb(m + n, m)
        if mr >= 0 and nr >= 0:
            for m1, m2 in _splits(mr):
                for n1, n2 in _splits(nr):
                    w = pref * (1 + m1 + n1) * (1 + m2 + n2) * _binom(m1 + n1, m1) * _binom(m2 + n2, m2)
                    for a in range(1, p + 1):
                        for f in range(1, p + 1):
                            B.add(-sgn * eps1 * w, e(a, f, m1, n1), e(f, a, m2, n2))
                    B.add(-sgn * eps1 * eps1 * eps3 * w, t(m1, n1), t(m2, n2))
        B.add(-last[0] * (eps1 * eps1 + eps2 * eps3) * last[1], last[2])
    else:
        raise ValueError(f"unknown relation family {fam!r}")
    return B.terms


def relation_instances(family: str, p: int, max_index: int) -> List[RelationInstance]:
    """Every instance of a family with ``m + n ≤ max_index`` and all flavor choices."""
    if family not in FAMILIES:
        raise ValueError(f"unknown relation family {family!r}")
    arity = FLAVOR_ARITY[family]
    out = []
    flavor_lists = [()]
    for _ in range(arity):
        flavor_lists = [fl + (a,) for fl in flavor_lists for a in range(1, p + 1)]
    for total in range(max_index + 1):
        for x in range(total + 1):
            for fl in flavor_lists:
                out.append(RelationInstance(family, fl, (x, total - x)))
    return out
