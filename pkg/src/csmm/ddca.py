"""The abstract large-N algebra, its PBW normal forms and its scaling limit.

Elements are noncommutative polynomials in the generators ``J^a_{b;n,m}``
(the trace-free part of ``e^a_{b;n,m}``) and ``t_{n,m}``, with coefficients
in ``Q[eps1, eps2]``.  Commutators come from a table that is seeded with
the defining relations and extended on demand: a generator outside the
seed set is written as ``g = (1/c)([S, g'] − R)`` with ``S`` one of
``t_{2,1}`` or ``t_{0,2}``, and ``[g, X]`` follows from the Jacobi identity
and the Leibniz rule.  Normal forms sort every word by a fixed total order.

The second half of the module implements the degeneration Lie algebra
``C[z, w] ⊗ gl_p``, the affine target and the checks linking them to the
commutator table.
"""
from __future__ import annotations

import hashlib
import inspect
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from . import relations as rel
from .exact import ParamPoly, rational_to_str
from .fock import ModelParams
from .observables import E as EOp
from .observables import GaugeOpSpec, OpEvaluator, Product, ScalarMul, Sum, T as TOp, apply_op
from .observables import Commutator as CommOp, state_is_zero, witness_term

ONE = ParamPoly.const(1)
EPS1 = ParamPoly.eps1()
EPS2 = ParamPoly.eps2()

# bump when the seed formulas change so cached tables are invalidated
SEED_VERSION = "1"


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


class Gen(NamedTuple):
    """A generator; tuple order is the PBW order (t before J, then degree, n, m, a, b)."""

    kind: int  # 0 for t, 1 for J
    deg: int
    n: int
    m: int
    a: int = 0
    b: int = 0

    @property
    def is_t(self) -> bool:
        return self.kind == 0

    def label(self) -> str:
        if self.kind == 0:
            return f"t[{self.n},{self.m}]"
        return f"J[{self.a},{self.b};{self.n},{self.m}]"

    def to_json(self) -> list:
        return ["t", self.n, self.m] if self.kind == 0 else ["J", self.a, self.b, self.n, self.m]

    @staticmethod
    def from_json(data: Sequence) -> "Gen":
        if data[0] == "t":
            return Tg(int(data[1]), int(data[2]))
        return Jg(int(data[1]), int(data[2]), int(data[3]), int(data[4]))


def Tg(n: int, m: int) -> Gen:
    """``t_{n,m}`` (degree n+m+2)."""
    if n < 0 or m < 0:
        raise ValueError("negative index")
    return Gen(0, n + m + 2, n, m)


def Jg(a: int, b: int, n: int, m: int) -> Gen:
    """``J^a_{b;n,m}`` (degree n+m).  The slot (p, p) is not a generator."""
    if n < 0 or m < 0:
        raise ValueError("negative index")
    return Gen(1, n + m, n, m, a, b)


def generators(p: int, degree_cap: int) -> List[Gen]:
    """All PBW generators of degree ≤ degree_cap, in PBW order."""
    out = []
    for d in range(degree_cap + 1):
        for n in range(d + 1):
            m = d - n
            if d + 2 <= degree_cap:
                out.append(Tg(n, m))
            for a in range(1, p + 1):
                for b in range(1, p + 1):
                    if (a, b) != (p, p):
                        out.append(Jg(a, b, n, m))
    return sorted(out)


# ---------------------------------------------------------------------------
# Abstract elements
# ---------------------------------------------------------------------------

Word = Tuple[Gen, ...]


class Elt:
    """A ``Q[eps1, eps2]``-linear combination of generator words."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[Word, ParamPoly]] = None):
        self.terms: Dict[Word, ParamPoly] = {}
        if terms:
            for w, c in terms.items():
                c = c if isinstance(c, ParamPoly) else ParamPoly.const(c)
                if c:
                    self.terms[tuple(w)] = c

    @staticmethod
    def gen(g: Gen, c=ONE) -> "Elt":
        return Elt({(g,): c})

    @staticmethod
    def scalar(c) -> "Elt":
        return Elt({(): c})

    def copy(self) -> "Elt":
        out = Elt()
        out.terms = dict(self.terms)
        return out

    def iadd(self, other: "Elt", c=None) -> "Elt":
        """In-place ``self += c·other``."""
        if c is not None and c == ONE:
            c = None
        for w, v in other.terms.items():
            v = v if c is None else v * c
            s = self.terms.get(w)
            s = v if s is None else s + v
            if s:
                self.terms[w] = s
            else:
                self.terms.pop(w, None)
        return self

    def __add__(self, other: "Elt") -> "Elt":
        return self.copy().iadd(other)

    def __sub__(self, other: "Elt") -> "Elt":
        return self.copy().iadd(other, -ONE)

    def __neg__(self) -> "Elt":
        return Elt({w: -c for w, c in self.terms.items()})

    def scale(self, c) -> "Elt":
        c = c if isinstance(c, ParamPoly) else ParamPoly.const(c)
        if not c:
            return Elt()
        return Elt({w: v * c for w, v in self.terms.items()})

    def __mul__(self, other: "Elt") -> "Elt":
        out = Elt()
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                out.iadd(Elt({w1 + w2: c1 * c2}))
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Filtration degree: the largest word degree (−1 for zero)."""
        return max((sum(g.deg for g in w) for w in self.terms), default=-1)

    def gens(self) -> set:
        return {g for w in self.terms for g in w}

    def coefficient(self, word: Word) -> ParamPoly:
        return self.terms.get(tuple(word), ParamPoly())

    def __eq__(self, other) -> bool:
        return isinstance(other, Elt) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"Elt({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms):
            word = "*".join(g.label() for g in w) or "1"
            parts.append(f"({self.terms[w]}) {word}")
        return " + ".join(parts)

    def to_json(self) -> list:
        return [[[g.to_json() for g in w], self.terms[w].to_json()] for w in sorted(self.terms)]

    @staticmethod
    def from_json(data) -> "Elt":
        return Elt({tuple(Gen.from_json(g) for g in w): ParamPoly.from_json(c) for w, c in data})


def eps3(p: int) -> ParamPoly:
    return ParamPoly.eps3(p)


def J_elt(a: int, b: int, n: int, m: int, p: int) -> Elt:
    """``J^a_{b;n,m}`` with the trace-free constraint ``J^p_p = −Σ_{a<p} J^a_a``."""
    if n < 0 or m < 0:
        return Elt()
    if (a, b) != (p, p):
        return Elt.gen(Jg(a, b, n, m))
    out = Elt()
    for c in range(1, p):
        out.iadd(Elt.gen(Jg(c, c, n, m)), -ONE)
    return out


def t_elt(n: int, m: int) -> Elt:
    if n < 0 or m < 0:
        return Elt()
    return Elt.gen(Tg(n, m))


def e_elt(a: int, b: int, n: int, m: int, p: int) -> Elt:
    """``e^a_{b;n,m} = J^a_{b;n,m} + δ^a_b (eps3/p) t_{n,m}``."""
    out = J_elt(a, b, n, m, p)
    if a == b:
        out.iadd(t_elt(n, m), eps3(p) * Fraction(1, p))
    return out


def _symbol_elt(sym: tuple, p: int) -> Elt:
    if sym[0] == "e":
        return e_elt(sym[1], sym[2], sym[3], sym[4], p)
    return t_elt(sym[1], sym[2])


def _terms_to_elt(terms, p: int) -> Elt:
    out = Elt()
    for coef, word in terms:
        prod = Elt.scalar(coef)
        for sym in word:
            prod = prod * _symbol_elt(sym, p)
        out.iadd(prod)
    return out


# ---------------------------------------------------------------------------
# Seeds
# ---------------------------------------------------------------------------


class SeedWindowError(ValueError):
    """A derivation needed a seed beyond the configured index window."""


class CapExceededError(ValueError):
    """Normal ordering needed a commutator above the configured degree cap."""


class CyclicDerivationError(RuntimeError):
    pass


_T_E_FAMILY = {(3, 0): "R_t30e", (2, 1): "R_t21e", (1, 2): "R_t12e"}
_T_T_FAMILY = {(3, 0): "R_t30t", (2, 1): "R_t21t", (1, 2): "R_t12t", (0, 3): "R_t03t"}


def _family_rhs(family: str, flavors: Tuple[int, ...], indices: Tuple[int, int], p: int) -> Elt:
    """Right-hand side of a printed ``[S, X] = …`` relation as an element."""
    inst = rel.RelationInstance(family, flavors, indices)
    terms = rel.relation_terms(inst, p, EPS1, EPS2, ONE)
    # the relation is LHS − RHS with the commutator S·X − X·S written first
    return -_terms_to_elt(terms[2:], p)


def _t03_on_e(a: int, b: int, r: int, s: int, p: int) -> Elt:
    """``[t_{0,3}, e]`` from ``[t_{3,0}, e]`` under the anti-involution swapping Z and Z†.

    The involution maps ``e^a_{b;n,m} ↦ e^b_{a;m,n}``, ``t_{n,m} ↦ t_{m,n}``,
    reverses products and reverses commutators.
    """
    base = _family_rhs("R_t30e", (b, a), (s, r), p)
    return -_involute(base, p)


def _involute(x: Elt, p: int) -> Elt:
    out = Elt()
    for w, c in x.terms.items():
        prod = Elt.scalar(c)
        for g in reversed(w):
            if g.is_t:
                prod = prod * t_elt(g.m, g.n)
            else:
                prod = prod * J_elt(g.b, g.a, g.m, g.n, p)
        out.iadd(prod)
    return out


def _t_on_t(S: Gen, r: int, s: int, p: int) -> Optional[Elt]:
    n, m = S.n, S.m
    if (n, m) == (0, 0):
        return Elt()
    if (n, m) == (1, 0):
        return t_elt(r, s - 1).scale(s)
    if (n, m) == (0, 1):
        return t_elt(r - 1, s).scale(-r)
    if (n, m) == (2, 0):
        return t_elt(r + 1, s - 1).scale(2 * s)
    if (n, m) == (1, 1):
        return t_elt(r, s).scale(s - r)
    if (n, m) == (0, 2):
        return t_elt(r - 1, s + 1).scale(-2 * r)
    if (n, m) in _T_T_FAMILY:
        return _family_rhs(_T_T_FAMILY[(n, m)], (), (r, s), p)
    return None


def _t_on_e(S: Gen, a: int, b: int, r: int, s: int, p: int) -> Optional[Elt]:
    n, m = S.n, S.m
    if (n, m) == (0, 0):
        return Elt()
    if (n, m) == (1, 0):
        return e_elt(a, b, r, s - 1, p).scale(s)
    if (n, m) == (0, 1):
        return e_elt(a, b, r - 1, s, p).scale(-r)
    if (n, m) == (2, 0):
        return e_elt(a, b, r + 1, s - 1, p).scale(2 * s)
    if (n, m) == (1, 1):
        return e_elt(a, b, r, s, p).scale(s - r)
    if (n, m) == (0, 2):
        return e_elt(a, b, r - 1, s + 1, p).scale(-2 * r)
    if (n, m) in _T_E_FAMILY:
        return _family_rhs(_T_E_FAMILY[(n, m)], (a, b), (r, s), p)
    if (n, m) == (0, 3):
        return _t03_on_e(a, b, r, s, p)
    return None


def _j10_on_j(a: int, b: int, c: int, d: int, m: int, n: int, p: int) -> Elt:
    """``[J^a_{b;1,0}, J^c_{d;m,n}]`` in the trace-free form.

    As in the e-form, the weighted index pair (m1, n1) sits on the right-hand
    factor of the Kronecker-delta products.
    """
    d_cb = 1 if c == b else 0
    d_ad = 1 if a == d else 0
    d_cd = 1 if c == d else 0
    d_ab = 1 if a == b else 0
    e3 = eps3(p)
    out = Elt()
    out.iadd(J_elt(a, d, m + 1, n, p), ParamPoly.const(d_cb))
    out.iadd(J_elt(c, b, m + 1, n, p), ParamPoly.const(-d_ad))
    cen = Fraction(d_ad * d_cb) - Fraction(d_cd * d_ab, p)
    if cen and n >= 1:
        out.iadd(t_elt(m, n - 1), EPS2 * e3 * (cen * n / p))
    if n >= 1:
        half = EPS2 * Fraction(n, 2)
        out.iadd(J_elt(a, d, m, n - 1, p), half * d_cb)
        out.iadd(J_elt(c, b, m, n - 1, p), half * d_ad)
        q = Fraction(-n, p)
        out.iadd(J_elt(a, b, m, n - 1, p), EPS2 * q * d_cd)
        out.iadd(J_elt(c, d, m, n - 1, p), e3 * q * d_ab)
        pref = Fraction(1, (1 + m + n) * rel.comb(m + n, m))
        for m1 in range(m + 1):
            m2 = m - m1
            for n1 in range(n):
                n2 = n - 1 - n1
                w = pref * (1 + m1 + n1) * rel.comb(m1 + n1, m1) * rel.comb(m2 + n2, m2)
                c0 = EPS1 * (-w)
                acc = Elt()
                for f in range(1, p + 1):
                    if d_cb:
                        acc.iadd(J_elt(a, f, m2, n2, p) * J_elt(f, d, m1, n1, p))
                    if d_ad:
                        acc.iadd(J_elt(c, f, m1, n1, p) * J_elt(f, b, m2, n2, p))
                acc.iadd(J_elt(a, d, m1, n1, p) * J_elt(c, b, m2, n2, p), -ONE)
                acc.iadd(J_elt(a, d, m2, n2, p) * J_elt(c, b, m1, n1, p), -ONE)
                out.iadd(acc, c0)
    return out


def _is_base(g: Gen) -> bool:
    if g.is_t:
        return g.n + g.m <= 3
    return (g.n, g.m) in ((0, 0), (1, 0))


def seed_formula(S: Gen, X: Gen, p: int) -> Optional[Elt]:
    """The printed (or basic) formula for ``[S, X]`` when S is a seed generator.

    Returns None when no seed covers the pair.
    """
    if S.is_t:
        if S.n + S.m > 3:
            return None
        if X.is_t:
            return _t_on_t(S, X.n, X.m, p)
        # [S, J] = [S, e] − δ (eps3/p) [S, t]
        out = _t_on_e(S, X.a, X.b, X.n, X.m, p)
        if X.a == X.b:
            out = out - _t_on_t(S, X.n, X.m, p).scale(eps3(p) * Fraction(1, p))
        return out
    if (S.n, S.m) == (0, 0):
        if X.is_t:
            return Elt()
        a, b, c, d = S.a, S.b, X.a, X.b
        out = Elt()
        if c == b:
            out.iadd(J_elt(a, d, X.n, X.m, p))
        if a == d:
            out.iadd(J_elt(c, b, X.n, X.m, p), -ONE)
        return out
    if (S.n, S.m) == (1, 0) and not X.is_t:
        return _j10_on_j(S.a, S.b, X.a, X.b, X.n, X.m, p)
    return None


def seed_relations(p: int, index_cap: int = 3) -> Dict[Tuple[Gen, Gen], Elt]:
    """Seed entries ``[S, X]`` for every seed S and every X with indices n+m ≤ index_cap."""
    seeds = [g for g in generators(p, 5) if _is_base(g)]
    targets = [g for g in generators(p, index_cap + 2) if g.n + g.m <= index_cap]
    out = {}
    for S in seeds:
        for X in targets:
            f = seed_formula(S, X, p)
            if f is not None:
                out[(S, X)] = f
    return out


def seed_version_hash() -> str:
    src = inspect.getsource(rel) + inspect.getsource(seed_formula) + inspect.getsource(_j10_on_j) + SEED_VERSION
    return hashlib.sha256(src.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# The commutator engine
# ---------------------------------------------------------------------------


def _definition(g: Gen) -> Tuple[Gen, Gen, int]:
    """``(S, g', c)`` with ``[S, g'] = c·g + lower`` for a non-seed generator g."""
    if g.m >= 1:
        prev = Tg(g.n + 1, g.m - 1) if g.is_t else Jg(g.a, g.b, g.n + 1, g.m - 1)
        return Tg(0, 2), prev, -2 * (g.n + 1)
    q = g.n - 1
    prev = Tg(q, 0) if g.is_t else Jg(g.a, g.b, q, 0)
    return Tg(2, 1), prev, -q


class DDCA:
    """Commutator table of the large-N algebra at flavor number p.

    ``comm(A, B)`` returns the normal form of ``[A, B]`` for generators,
    memoized with a provenance tag (``seed`` or ``derived``).
    """

    def __init__(self, p: int, seed_index_cap: Optional[int] = None, rewrite_degree_cap: Optional[int] = None):
        if p < 1:
            raise ValueError("p must be positive")
        self.p = p
        self.seed_index_cap = seed_index_cap
        self.rewrite_degree_cap = rewrite_degree_cap
        self._comm: Dict[Tuple[Gen, Gen], Elt] = {}
        self.provenance: Dict[Tuple[Gen, Gen], str] = {}
        self._nf: Dict[Word, Elt] = {}
        self._busy: set = set()
        if sys.getrecursionlimit() < 20000:
            sys.setrecursionlimit(20000)

    def preload(self, table: "CommutatorTable") -> None:
        """Seed the memo with the entries of a (cached) table."""
        for key, val in table.entries.items():
            self._comm.setdefault(key, val)
            self.provenance.setdefault(key, table.provenance[key])

    # seeds ----------------------------------------------------------------
    def _seed(self, S: Gen, X: Gen) -> Optional[Elt]:
        f = seed_formula(S, X, self.p)
        if f is not None and self.seed_index_cap is not None and X.n + X.m > self.seed_index_cap:
            raise SeedWindowError(f"seed [{S.label()}, {X.label()}] is outside the seed window "
                                  f"(n+m ≤ {self.seed_index_cap}); extend seed window")
        return f

    # commutators ------------------------------------------------------------
    def comm(self, A: Gen, B: Gen) -> Elt:
        if A == B:
            return Elt()
        hit = self._comm.get((A, B))
        if hit is not None:
            return hit
        hit = self._comm.get((B, A))
        if hit is not None:
            return -hit
        if (A, B) in self._busy:
            raise CyclicDerivationError(f"cyclic derivation of [{A.label()}, {B.label()}]")
        self._busy.add((A, B))
        try:
            f = self._seed(A, B)
            if f is not None:
                res, tag = self.normal_form(f), "seed"
            else:
                f = self._seed(B, A)
                if f is not None:
                    res, tag = -self.normal_form(f), "seed"
                elif not _is_base(A):
                    res, tag = self._unfold(A, B), "derived"
                else:
                    res, tag = -self._unfold(B, A), "derived"
        finally:
            self._busy.discard((A, B))
        self._comm[(A, B)] = res
        self.provenance[(A, B)] = tag
        return res

    def _unfold(self, A: Gen, B: Gen) -> Elt:
        """``[A, B]`` for a non-seed A from ``A = (1/c)([S, A'] − R)``."""
        S, prev, c = _definition(A)
        seedSA = self.normal_form(self._seed(S, prev))
        R = seedSA - Elt.gen(A, ParamPoly.const(c))
        if R.coefficient((A,)):
            raise AssertionError("definition is not triangular")
        out = self.bracket(Elt.gen(S), self.comm(prev, B))
        out.iadd(self.bracket(Elt.gen(prev), self.comm(S, B)), -ONE)
        out.iadd(self.bracket(R, Elt.gen(B)), -ONE)
        return out.scale(Fraction(1, c))

    def derive_commutator(self, g1: Gen, g2: Gen, degree_cap: Optional[int] = None) -> Elt:
        if degree_cap is not None and g1.deg + g2.deg > degree_cap:
            raise CapExceededError(f"deg [{g1.label()}, {g2.label()}] = {g1.deg + g2.deg} exceeds cap {degree_cap}")
        return self.comm(g1, g2)

    # brackets of elements ---------------------------------------------------------
    def _word_bracket(self, u: Word, v: Word) -> Elt:
        if not u or not v:
            return Elt()
        if len(u) > 1:
            # [u1 u', v] = u1 [u', v] + [u1, v] u'
            head, tail = Elt.gen(u[0]), Elt({u[1:]: ONE})
            return head * self._word_bracket(u[1:], v) + self._word_bracket(u[:1], v) * tail
        if len(v) > 1:
            # [g, v1 v'] = [g, v1] v' + v1 [g, v']
            head, tail = Elt.gen(v[0]), Elt({v[1:]: ONE})
            return self.comm(u[0], v[0]) * tail + head * self._word_bracket(u, v[1:])
        return self.comm(u[0], v[0])

    def bracket(self, x: Elt, y: Elt) -> Elt:
        """Normal form of ``[x, y]``."""
        out = Elt()
        for u, cu in x.terms.items():
            for v, cv in y.terms.items():
                out.iadd(self._word_bracket(u, v), cu * cv)
        return self.normal_form(out)

    # normal ordering ------------------------------------------------------------
    def _nf_word(self, w: Word) -> Elt:
        hit = self._nf.get(w)
        if hit is not None:
            return hit
        for i in range(len(w) - 1):
            if w[i] > w[i + 1]:
                break
        else:
            res = Elt({w: ONE})
            self._nf[w] = res
            return res
        a, b = w[i], w[i + 1]
        if self.rewrite_degree_cap is not None and a.deg + b.deg > self.rewrite_degree_cap:
            raise CapExceededError(f"rewriting needs [{a.label()}, {b.label()}] above degree cap "
                                   f"{self.rewrite_degree_cap}")
        res = self._nf_word(w[:i] + (b, a) + w[i + 2:]).copy()
        for cw, c in self.comm(a, b).terms.items():
            res.iadd(self._nf_word(w[:i] + cw + w[i + 2:]), c)
        self._nf[w] = res
        return res

    def normal_form(self, x: Elt) -> Elt:
        out = Elt()
        for w, c in x.terms.items():
            out.iadd(self._nf_word(w), c)
        return out

    def product(self, x: Elt, y: Elt) -> Elt:
        return self.normal_form(x * y)


def is_normal(x: Elt) -> bool:
    return all(all(w[i] <= w[i + 1] for i in range(len(w) - 1)) for w in x.terms)


# ---------------------------------------------------------------------------
# Commutator table over a degree window
# ---------------------------------------------------------------------------


@dataclass
class CommutatorTable:
    """Window of ``[g1, g2]`` entries with ``deg g1 + deg g2 ≤ degree_cap`` (g1 ≺ g2 stored)."""

    p: int
    degree_cap: int
    entries: Dict[Tuple[Gen, Gen], Elt]
    provenance: Dict[Tuple[Gen, Gen], str]
    seed_hash: str = field(default_factory=seed_version_hash)

    def get(self, g1: Gen, g2: Gen) -> Elt:
        if g1 == g2:
            return Elt()
        if (g1, g2) in self.entries:
            return self.entries[(g1, g2)]
        return -self.entries[(g2, g1)]

    def cache_key(self) -> str:
        return f"ddca-p{self.p}-cap{self.degree_cap}-{self.seed_hash}"

    def to_json(self) -> dict:
        return {
            "p": self.p, "degree_cap": self.degree_cap, "seed_hash": self.seed_hash,
            "entries": [[g1.to_json(), g2.to_json(), self.provenance[(g1, g2)], e.to_json()]
                        for (g1, g2), e in sorted(self.entries.items())],
        }

    @staticmethod
    def from_json(data: dict) -> "CommutatorTable":
        entries, prov = {}, {}
        for g1, g2, tag, e in data["entries"]:
            key = (Gen.from_json(g1), Gen.from_json(g2))
            entries[key] = Elt.from_json(e)
            prov[key] = tag
        return CommutatorTable(data["p"], data["degree_cap"], entries, prov, data["seed_hash"])


def window_pairs(p: int, degree_cap: int) -> List[Tuple[Gen, Gen]]:
    gens = generators(p, degree_cap)
    return [(g1, g2) for i, g1 in enumerate(gens) for g2 in gens[i + 1:] if g1.deg + g2.deg <= degree_cap]


def build_table(p: int, degree_cap: int = 6, engine: Optional[DDCA] = None) -> CommutatorTable:
    eng = engine or DDCA(p)
    entries, prov = {}, {}
    for g1, g2 in window_pairs(p, degree_cap):
        entries[(g1, g2)] = eng.comm(g1, g2)
        prov[(g1, g2)] = eng.provenance.get((g1, g2)) or eng.provenance.get((g2, g1))
    return CommutatorTable(p, degree_cap, entries, prov)


@dataclass
class TableCheck:
    name: str
    checked: int
    failures: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"name": self.name, "checked": self.checked, "failures": self.failures[:20],
                "n_failures": len(self.failures), "passed": self.passed}


def antisymmetry_check(eng: DDCA, table: CommutatorTable) -> TableCheck:
    """Recompute every entry with the arguments swapped and compare."""
    fails = []
    fresh = DDCA(eng.p)
    for (g1, g2), val in sorted(table.entries.items(), reverse=True):
        other = fresh.comm(g2, g1)
        if not (other + val).is_zero():
            fails.append(f"[{g1.label()}, {g2.label()}]")
    return TableCheck("antisymmetry", len(table.entries), fails)


def jacobi_check(eng: DDCA, p: int, degree_cap: int) -> TableCheck:
    """``[a,[b,c]] + [b,[c,a]] + [c,[a,b]] = 0`` for generator triples of total degree ≤ cap."""
    gens = generators(p, degree_cap)
    fails, count = [], 0
    for a, b, c in combinations_with_replacement(gens, 3):
        if a.deg + b.deg + c.deg > degree_cap or a == b or b == c:
            continue
        count += 1
        ea, eb, ec = Elt.gen(a), Elt.gen(b), Elt.gen(c)
        tot = eng.bracket(ea, eng.bracket(eb, ec))
        tot.iadd(eng.bracket(eb, eng.bracket(ec, ea)))
        tot.iadd(eng.bracket(ec, eng.bracket(ea, eb)))
        if not tot.is_zero():
            fails.append(f"({a.label()}, {b.label()}, {c.label()})")
    return TableCheck("jacobi", count, fails)


# ---------------------------------------------------------------------------
# Leading-order law
# ---------------------------------------------------------------------------


def leading_form(g1: Gen, g2: Gen, p: int) -> Tuple[Elt, int]:
    """Printed leading term of ``[g1, g2]`` and the degree bound for the remainder.

    The remainder must have filtration degree ≤ the returned bound.
    """
    n, m, r, s = g1.n, g1.m, g2.n, g2.m
    w = n * s - m * r
    if g1.is_t and g2.is_t:
        return t_elt(n + r - 1, m + s - 1).scale(w), n + m + r + s - 1
    if g1.is_t and not g2.is_t:
        return J_elt(g2.a, g2.b, n + r - 1, m + s - 1, p).scale(w), n + m + r + s - 3
    if not g1.is_t and g2.is_t:
        lead, bound = leading_form(g2, g1, p)
        return -lead, bound
    a, b, c, d = g1.a, g1.b, g2.a, g2.b
    out = Elt()
    if c == b:
        out.iadd(J_elt(a, d, n + r, m + s, p))
    if a == d:
        out.iadd(J_elt(c, b, n + r, m + s, p), -ONE)
    cen = Fraction(1 if (a == d and c == b) else 0) - Fraction(1 if (c == d and a == b) else 0, p)
    if cen and w:
        out.iadd(t_elt(n + r - 1, m + s - 1), EPS2 * eps3(p) * (cen * w / p))
    return out, n + m + r + s - 1


@dataclass
class LeadingReport:
    pair: str
    residual_degree: int
    bound: int

    @property
    def passed(self) -> bool:
        return self.residual_degree <= self.bound

    def to_json(self) -> dict:
        return {"pair": self.pair, "residual_degree": self.residual_degree, "bound": self.bound,
                "passed": self.passed}


def leading_check(g1: Gen, g2: Gen, eng: DDCA) -> LeadingReport:
    lead, bound = leading_form(g1, g2, eng.p)
    res = eng.comm(g1, g2) - eng.normal_form(lead)
    return LeadingReport(f"[{g1.label()}, {g2.label()}]", res.degree(), bound)


# ---------------------------------------------------------------------------
# Finite-N evaluation
# ---------------------------------------------------------------------------


def gen_to_op(g: Gen, params: ModelParams) -> GaugeOpSpec:
    if g.is_t:
        return TOp(g.n, g.m)
    if g.a != g.b:
        return EOp(g.a, g.b, g.n, g.m)
    return Sum((EOp(g.a, g.b, g.n, g.m), ScalarMul(Fraction(-params.eps3, params.p), TOp(g.n, g.m))))


def to_gauge_op(x: Elt, params: ModelParams) -> GaugeOpSpec:
    """The image of an element in the finite-N algebra (eps1 = 1, eps2 = k+p)."""
    ops = []
    for w, c in sorted(x.terms.items()):
        v = c.evaluate(params.eps1, params.eps2)
        if v == 0:
            continue
        ops.append(ScalarMul(v, Product(tuple(gen_to_op(g, params) for g in w))))
    return Sum(tuple(ops))


def evaluate_finite_N(x: Elt, params: ModelParams, state, evaluator: Optional[OpEvaluator] = None):
    """Apply an abstract element to a physical state (words act right to left)."""
    return apply_op(to_gauge_op(x, params), state, evaluator)


def finite_N_check(eng: DDCA, params: ModelParams, states, max_degree: int = 5,
                   pairs: Optional[Iterable[Tuple[Gen, Gen]]] = None) -> TableCheck:
    """Compare every table commutator of degree ≤ max_degree with the direct commutator."""
    if params.p != eng.p:
        raise ValueError("flavor number mismatch")
    ev = OpEvaluator()
    if pairs is None:
        pairs = [(g1, g2) for g1, g2 in window_pairs(eng.p, max_degree)]
    fails, count = [], 0
    for g1, g2 in pairs:
        if (g1.n + g1.m > 0 or g2.n + g2.m > 0) and g1.is_t and g1.n == g1.m == 0:
            continue
        val = eng.comm(g1, g2)
        direct = CommOp(gen_to_op(g1, params), gen_to_op(g2, params))
        derived = to_gauge_op(val, params)
        for st in states:
            count += 1
            diff = apply_op(direct, st, ev) - apply_op(derived, st, ev)
            if not state_is_zero(diff):
                fails.append(f"[{g1.label()}, {g2.label()}] on a state: {witness_term(diff)}")
                break
    return TableCheck(f"finite-N {params.N},{params.p},{params.k}", count, fails)


# ---------------------------------------------------------------------------
# Degeneration Lie algebra C[z, w] ⊗ gl_p
# ---------------------------------------------------------------------------

# basis of gl_p: ("J", a, b) for the trace-free parts (a, b) ≠ (p, p) and ("1",)
LieKey = Tuple[int, int, tuple]


def gl_basis(p: int) -> List[tuple]:
    return [("J", a, b) for a in range(1, p + 1) for b in range(1, p + 1) if (a, b) != (p, p)] + [("1",)]


def _J_matrix_key(a: int, b: int, p: int) -> Dict[tuple, Fraction]:
    """Trace-free part of ``E^a_b`` in the basis, with ``J^p_p = −Σ_{a<p} J^a_a``."""
    if (a, b) != (p, p):
        return {("J", a, b): Fraction(1)}
    return {("J", c, c): Fraction(-1) for c in range(1, p)}


def _gl_commutator(A: tuple, B: tuple, p: int) -> Dict[tuple, Fraction]:
    if A[0] == "1" or B[0] == "1":
        return {}
    a, b = A[1], A[2]
    c, d = B[1], B[2]
    out: Dict[tuple, Fraction] = {}
    if c == b:
        for k, v in _J_matrix_key(a, d, p).items():
            out[k] = out.get(k, 0) + v
    if a == d:
        for k, v in _J_matrix_key(c, b, p).items():
            out[k] = out.get(k, 0) - v
    return {k: v for k, v in out.items() if v}


def _trace_pairing(A: tuple, B: tuple, p: int) -> Tuple[Fraction, Fraction]:
    """``(Tr(A₀B₀), Tr(A)Tr(B)/p)`` for basis elements (trace-free and central parts)."""
    if A[0] == "1" and B[0] == "1":
        return Fraction(0), Fraction(p)
    if A[0] == "1" or B[0] == "1":
        return Fraction(0), Fraction(0)
    a, b, c, d = A[1], A[2], B[1], B[2]
    return Fraction((1 if (a == d and c == b) else 0)) - Fraction((1 if (a == b and c == d) else 0), p), Fraction(0)


def kappa(A: tuple, B: tuple, p: int, k_sl=None):
    """``κ(A, B) = (eps2·eps3/p) Tr(A₀B₀) + (1/p) Tr(A)Tr(B)/p``.

    ``k_sl`` overrides ``eps2·eps3/p`` (a ParamPoly by default, any number for
    fast exact checks of identities polynomial in it).
    """
    if k_sl is None:
        k_sl = EPS2 * eps3(p) * Fraction(1, p)
    tr0, trc = _trace_pairing(A, B, p)
    return k_sl * tr0 + trc * Fraction(1, p)


class LieElt:
    """Element of ``C[z, w] ⊗ gl_p``: map ``(n, m, basis key) → coefficient``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: Dict[LieKey, object] = {}
        if terms:
            for k, v in terms.items():
                if v:
                    self.terms[k] = v

    def iadd(self, other: "LieElt", c=1) -> "LieElt":
        for k, v in other.terms.items():
            s = self.terms.get(k, 0) + v * c
            if s:
                self.terms[k] = s
            else:
                self.terms.pop(k, None)
        return self

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, LieElt) and self.terms == other.terms

    def __repr__(self) -> str:
        return f"LieElt({self.terms})"

    def to_json(self) -> list:
        def fmt(v):
            return v.to_json() if isinstance(v, ParamPoly) else rational_to_str(Fraction(v))
        return [[n, m, list(X), fmt(v)] for (n, m, X), v in sorted(self.terms.items(), key=lambda kv: repr(kv[0]))]


def lie_gen(n: int, m: int, X: tuple) -> LieElt:
    return LieElt({(n, m, X): 1})


def poisson(n: int, m: int, r: int, s: int) -> Optional[Tuple[int, int, int]]:
    """``{z^n w^m, z^r w^s} = δ_{n−m, s−r} (ns − mr) z^{n+r−1} w^{m+s−1}`` as (coef, n', m')."""
    if n - m != s - r:
        return None
    c = n * s - m * r
    if c == 0:
        return None
    return c, n + r - 1, m + s - 1


def _basis_bracket(x: LieKey, y: LieKey, p: int, k_sl) -> Dict[LieKey, object]:
    (n, m, A), (r, s, B) = x, y
    out: Dict[LieKey, object] = {}
    for X, v in _gl_commutator(A, B, p).items():
        out[(n + r, m + s, X)] = v
    pb = poisson(n, m, r, s)
    if pb is not None:
        kap = kappa(A, B, p, k_sl)
        if kap:
            c, n2, m2 = pb
            key = (n2, m2, ("1",))
            out[key] = out.get(key, 0) + kap * c
    return out


def lie_bracket(x: LieElt, y: LieElt, p: int, k_sl=None, _cache: Optional[dict] = None) -> LieElt:
    """``[f⊗A, g⊗B] = fg⊗[A,B] + {f,g}⊗κ(A,B)·1_p`` extended bilinearly."""
    if k_sl is None:
        k_sl = EPS2 * eps3(p) * Fraction(1, p)
    out = LieElt()
    for kx, cx in x.terms.items():
        for ky, cy in y.terms.items():
            if _cache is not None:
                br = _cache.get((kx, ky))
                if br is None:
                    br = _cache[(kx, ky)] = _basis_bracket(kx, ky, p, k_sl)
            else:
                br = _basis_bracket(kx, ky, p, k_sl)
            c = cx * cy
            for k, v in br.items():
                s = out.terms.get(k, 0) + v * c
                if s:
                    out.terms[k] = s
                else:
                    out.terms.pop(k, None)
    return out


def lie_basis(p: int, index_cap: int) -> List[LieKey]:
    return [(n, m, X) for n in range(index_cap + 1) for m in range(index_cap + 1) for X in gl_basis(p)]


def lie_jacobi_check(p: int, index_cap: int = 4) -> TableCheck:
    """Exact Jacobi identity on all basis triples with n, m ≤ index_cap.

    The Jacobiator is a polynomial of degree ≤ 2 in ``K = eps2·eps3/p``, so it
    vanishes identically iff it vanishes at the three rational values
    K = 0, 1, 2; each evaluation is exact.
    """
    basis = lie_basis(p, index_cap)
    fails = []
    count = 0
    for K in (Fraction(0), Fraction(1), Fraction(2)):
        cache: dict = {}
        count = 0
        for i, x in enumerate(basis):
            ex = LieElt({x: 1})
            for j in range(i + 1, len(basis)):
                y = basis[j]
                ey = LieElt({y: 1})
                xy = lie_bracket(ex, ey, p, K, cache)
                for kk in range(j + 1, len(basis)):
                    z = basis[kk]
                    ez = LieElt({z: 1})
                    count += 1
                    tot = lie_bracket(ex, lie_bracket(ey, ez, p, K, cache), p, K, cache)
                    tot.iadd(lie_bracket(ey, lie_bracket(ez, ex, p, K, cache), p, K, cache))
                    tot.iadd(lie_bracket(ez, xy, p, K, cache))
                    if not tot.is_zero():
                        fails.append(f"K={K}: {x}, {y}, {z}")
    return TableCheck(f"lie-jacobi p={p}", count, fails)


# ---------------------------------------------------------------------------
# Affine target
# ---------------------------------------------------------------------------

# affine basis: ("J", a, b, n) for the sl_p currents, ("alpha", n) with n ≠ 0, ("c",) the unit
AffKey = tuple


def affine_bracket(x: AffKey, y: AffKey, p: int) -> Dict[AffKey, ParamPoly]:
    """Brackets of ``sl_p^ at level eps3`` ⊕ ``gl_1^ at level p/eps2``."""
    out: Dict[AffKey, ParamPoly] = {}
    if x[0] == "c" or y[0] == "c":
        return out
    if x[0] == "alpha" and y[0] == "alpha":
        n, m = x[1], y[1]
        if n == -m:
            out[("c",)] = ParamPoly({(0, -1): Fraction(p * n)})
        return out
    if x[0] != y[0]:
        return out
    _, a, b, n = x
    _, c, d, m = y
    if c == b:
        for k, v in _J_matrix_key(a, d, p).items():
            key = ("J", k[1], k[2], n + m)
            out[key] = out.get(key, ParamPoly()) + ParamPoly.const(v)
    if a == d:
        for k, v in _J_matrix_key(c, b, p).items():
            key = ("J", k[1], k[2], n + m)
            out[key] = out.get(key, ParamPoly()) - ParamPoly.const(v)
    if n == -m:
        cen = Fraction(1 if (a == d and c == b) else 0) - Fraction(1 if (c == d and a == b) else 0, p)
        if cen and n:
            out[("c",)] = out.get(("c",), ParamPoly()) + eps3(p) * (cen * n)
    return {k: v for k, v in out.items() if v}


def affine_image(key: LieKey, p: int) -> Dict[AffKey, ParamPoly]:
    """``z^n w^m ⊗ J ↦ J_{n−m}``, ``z^n w^m ⊗ 1 ↦ α_{n−m}`` (n ≠ m), ``z^n w^n ⊗ 1 ↦ (1/(n+1))(p/eps2)``."""
    n, m, X = key
    if X[0] == "J":
        return {("J", X[1], X[2], n - m): ONE}
    if n != m:
        return {("alpha", n - m): ONE}
    return {("c",): ParamPoly({(0, -1): Fraction(p, n + 1)})}


def _affine_of(x: LieElt, p: int) -> Dict[AffKey, ParamPoly]:
    out: Dict[AffKey, ParamPoly] = {}
    for key, c in x.terms.items():
        c = c if isinstance(c, ParamPoly) else ParamPoly.const(c)
        for k, v in affine_image(key, p).items():
            out[k] = out.get(k, ParamPoly()) + v * c
    return {k: v for k, v in out.items() if v}


@dataclass
class AffineReport:
    p: int
    index_cap: int
    checked: int
    failures: List[str]
    sl_level: Optional[ParamPoly]
    u1_level: ParamPoly

    @property
    def passed(self) -> bool:
        return not self.failures and self.u1_level == ParamPoly({(0, -1): Fraction(self.p)}) and \
            (self.p == 1 or self.sl_level == eps3(self.p))

    def to_json(self) -> dict:
        return {"name": f"affine-map p={self.p}", "p": self.p, "index_cap": self.index_cap,
                "checked": self.checked, "failures": self.failures[:20], "n_failures": len(self.failures),
                "sl_level": None if self.sl_level is None else str(self.sl_level),
                "u1_level": str(self.u1_level), "passed": self.passed}


def affine_map_check(p: int, index_cap: int = 4) -> AffineReport:
    """The affine map preserves brackets on all basis pairs with n, m ≤ index_cap."""
    if index_cap < 2:
        raise ValueError("index_cap must be at least 2")
    basis = lie_basis(p, index_cap)
    fails, count = [], 0
    for x in basis:
        for y in basis:
            count += 1
            lhs = _affine_of(lie_bracket(LieElt({x: ONE}), LieElt({y: ONE}), p), p)
            rhs: Dict[AffKey, ParamPoly] = {}
            for kx, cx in affine_image(x, p).items():
                for ky, cy in affine_image(y, p).items():
                    for k, v in affine_bracket(kx, ky, p).items():
                        rhs[k] = rhs.get(k, ParamPoly()) + v * cx * cy
            rhs = {k: v for k, v in rhs.items() if v}
            if lhs != rhs:
                fails.append(f"{x}, {y}")
    # levels read off [J^1_2 z, J^2_1 w] → eps3 and [z⊗1, w⊗1] → p/eps2
    u1 = affine_bracket(("alpha", 1), ("alpha", -1), p).get(("c",), ParamPoly())
    sl = None
    if p >= 2:
        sl = affine_bracket(("J", 1, 2, 1), ("J", 2, 1, -1), p).get(("c",), ParamPoly())
    return AffineReport(p, index_cap, count, fails, sl, u1)


# ---------------------------------------------------------------------------
# Degeneration of the commutator table
# ---------------------------------------------------------------------------


def scale_half_power(g: Gen) -> int:
    """Exponent h with ``g = (p t00/eps2)^{h/2} g̃``: n+m for J, n+m+2δ_{n,m} for t."""
    if g.is_t:
        return g.n + g.m + (2 if g.n == g.m else 0)
    return g.n + g.m


def _lie_key_of(g: Gen) -> LieKey:
    return (g.n, g.m, ("1",) if g.is_t else ("J", g.a, g.b))


@dataclass
class DegenerationReport:
    p: int
    index_cap: int
    checked: int
    failures: List[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"name": f"degeneration p={self.p}", "p": self.p, "index_cap": self.index_cap,
                "checked": self.checked, "failures": self.failures[:20], "n_failures": len(self.failures),
                "passed": self.passed}


def degenerate(x: Elt, h_total: int, p: int) -> Tuple[LieElt, List[str]]:
    """Rescale ``x`` (a bracket of generators with total half-power h_total) and
    drop every term with a negative net half-power of ``t00``.

    Returns the surviving linear part as a Lie element, and problems found
    (positive net powers or surviving products).
    """
    out = LieElt()
    problems = []
    for w, c in x.terms.items():
        net = sum(scale_half_power(g) for g in w) - h_total
        if net < 0:
            continue
        if net > 0:
            problems.append(f"positive power {net} on {'*'.join(g.label() for g in w)}")
            continue
        if len(w) != 1:
            problems.append(f"surviving product {'*'.join(g.label() for g in w) or '1'}")
            continue
        out.iadd(LieElt({_lie_key_of(w[0]): c}))
    return out, problems


def degeneration_check(p: int, index_cap: int = 3, eng: Optional[DDCA] = None) -> DegenerationReport:
    """Windowed degeneration of table commutators equals the Lie bracket (n, m ≤ index_cap)."""
    eng = eng or DDCA(p)
    gens = [g for g in generators(p, 2 * index_cap + 2) if g.n <= index_cap and g.m <= index_cap
            and not (g.is_t and g.n == 0 and g.m == 0)]
    fails, count = [], 0
    for i, g1 in enumerate(gens):
        for g2 in gens[i + 1:]:
            count += 1
            val = eng.comm(g1, g2)
            got, problems = degenerate(val, scale_half_power(g1) + scale_half_power(g2), p)
            want = lie_bracket(LieElt({_lie_key_of(g1): ONE}), LieElt({_lie_key_of(g2): ONE}), p)
            want = LieElt({k: v for k, v in want.terms.items()})
            if problems or got != want:
                fails.append(f"[{g1.label()}, {g2.label()}]: {problems or 'bracket mismatch'}")
    return DegenerationReport(p, index_cap, count, fails)


def table_json(table: CommutatorTable) -> str:
    return json.dumps(table.to_json(), sort_keys=True)
