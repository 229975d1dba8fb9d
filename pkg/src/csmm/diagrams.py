"""Gauge-invariant diagram engine.

Physical states are combinations of products of two kinds of invariants:

* loops ``Tr(Z†^a)`` for ``a ≥ 1``;
* ε-contractions ``C = ε^{i_1…i_N} Π_r (λ†^{f_r} Z†^{n_r})_{i_r}``, stored
  as a sorted tuple of N chains ``(n_r, f_r)``.  Sorting a chain list
  picks up the sign of the permutation and repeated chains give zero.

A term is ``(loops, cs)`` with a rational coefficient.  Gauge-invariant
operators built from traced words of ``Z``/``Z†`` (optionally capped by
``λ†^a … λ_b``) act on these terms by cutting one ``Z†`` out of an
invariant and reconnecting the open strand, which avoids expanding states
into monomials.  States can be reduced to a canonical form (symmetric
functions for p = 1, an evaluation polynomial in general) for exact
zero tests and basis coordinates.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterable, Optional, Sequence, Tuple

from .exact import Number, as_rational
from .fock import FockPolynomial, ModelParams, DegenerateGroundError, epsilon_contraction, trace_power_creation
from .symfun import PowerPoly, c_to_schur, pp_add, pp_mul, power_sum_in_N_vars, schur_in_power_sums

Chain = Tuple[int, int]  # (power n, flavor f)
CTuple = Tuple[Chain, ...]
Term = Tuple[Tuple[int, ...], Tuple[CTuple, ...]]


def canonical_c(chains: Sequence[Chain]) -> Tuple[int, CTuple]:
    """Sort a chain list; returns (sign, sorted tuple), sign 0 if a chain repeats."""
    lst = list(chains)
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


def _insert(others: CTuple, ch: Chain) -> Tuple[int, CTuple]:
    """Place ``ch`` in front of the sorted ``others`` and re-sort."""
    q = 0
    for o in others:
        if o == ch:
            return 0, others
        if o < ch:
            q += 1
        else:
            break
    return (-1) ** q, others[:q] + (ch,) + others[q:]


def _add_loop(loops: Tuple[int, ...], a: int) -> Tuple[int, ...]:
    return tuple(sorted(loops + (a,)))


def _remove_at(t: tuple, i: int) -> tuple:
    return t[:i] + t[i + 1:]


def _sorted_cs(cs: Iterable[CTuple]) -> Tuple[CTuple, ...]:
    return tuple(sorted(cs))


class DiagramState:
    """Linear combination of invariant products, at fixed model parameters."""

    __slots__ = ("params", "terms")

    def __init__(self, params: ModelParams, terms: Optional[Dict[Term, Fraction]] = None):
        self.params = params
        self.terms: Dict[Term, Fraction] = {}
        if terms:
            for key, c in terms.items():
                c = as_rational(c)
                if c != 0:
                    self.terms[key] = c

    @classmethod
    def _raw(cls, params: ModelParams, terms: Dict[Term, Fraction]) -> "DiagramState":
        out = cls.__new__(cls)
        out.params = params
        out.terms = {k: v for k, v in terms.items() if v != 0}
        return out

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero_structurally(self) -> bool:
        return not self.terms

    def __add__(self, other: "DiagramState") -> "DiagramState":
        if other.params != self.params:
            raise ValueError("parameter mismatch")
        acc = dict(self.terms)
        for k, v in other.terms.items():
            acc[k] = acc.get(k, 0) + v
        return DiagramState._raw(self.params, acc)

    def __neg__(self) -> "DiagramState":
        return DiagramState._raw(self.params, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "DiagramState") -> "DiagramState":
        return self + (-other)

    def scale(self, c: Number) -> "DiagramState":
        c = as_rational(c)
        return DiagramState._raw(self.params, {k: v * c for k, v in self.terms.items()})

    def __rmul__(self, c: Number) -> "DiagramState":
        return self.scale(c)

    def energies(self) -> set:
        return {sum(loops) + sum(n for C in cs for n, _ in C) for loops, cs in self.terms}

    def __repr__(self) -> str:
        return f"DiagramState({self.params}, {len(self.terms)} terms)"

    # multiplication by invariants ----------------------------------------
    def times_trace_power(self, a: int) -> "DiagramState":
        """Multiply by ``Tr(Z†^a)`` (the scalar N when a = 0)."""
        if a == 0:
            return self.scale(self.params.N)
        return DiagramState._raw(self.params, {(_add_loop(l, a), cs): v for (l, cs), v in self.terms.items()})

    def times_loops(self, loops: Sequence[int]) -> "DiagramState":
        out = self
        for a in loops:
            out = out.times_trace_power(a)
        return out

    # conversion --------------------------------------------------------------
    def to_fock(self) -> FockPolynomial:
        """Expand into creation monomials (small N only)."""
        params = self.params
        acc = FockPolynomial.zero(params)
        loop_cache: Dict[int, FockPolynomial] = {}
        c_cache: Dict[CTuple, FockPolynomial] = {}
        for (loops, cs), coef in self.terms.items():
            st = FockPolynomial.vacuum(params)
            for a in loops:
                if a not in loop_cache:
                    loop_cache[a] = trace_power_creation(params, a)
                st = st.multiply(loop_cache[a])
            for C in cs:
                if C not in c_cache:
                    c_cache[C] = epsilon_contraction(params, [(f, n) for n, f in C])
                st = st.multiply(c_cache[C])
            acc = acc + st.scale(coef)
        return acc


# ---------------------------------------------------------------------------
# Ground states
# ---------------------------------------------------------------------------


def ground_c_label(params: ModelParams, tail_flavors: Sequence[int] = ()) -> Tuple[int, CTuple]:
    """One ε-factor of the ground state as (coefficient, canonical chains)."""
    N, p = params.N, params.p
    if p == 1:
        return 1, tuple((n, 1) for n in range(N))
    m, q = divmod(N, p)
    chains = [(n, a) for n in range(m) for a in range(1, p + 1)] + [(m, a) for a in tail_flavors]
    sign, C = canonical_c(chains)
    return sign * factorial(p) ** m, C


def ground_diagram(params: ModelParams, flavor_labels: Optional[Sequence[Sequence[int]]] = None) -> DiagramState:
    """The ground state as a diagram state; matches :func:`csmm.fock.ground_state`."""
    N, p, k = params.N, params.p, params.k
    q = N % p
    if p > 1 and q != 0 and flavor_labels is None:
        raise DegenerateGroundError(f"N={N} is not divisible by p={p}; pass flavor_labels")
    coef = Fraction(1)
    cs = []
    for r in range(k):
        tail = flavor_labels[r] if (p > 1 and q) else ()
        if len(tail) != q and p > 1:
            raise ValueError(f"flavor_labels rows must have length {q}")
        c, C = ground_c_label(params, tail)
        coef *= c
        cs.append(C)
    if coef == 0:
        return DiagramState(params)
    return DiagramState(params, {((), _sorted_cs(cs)): coef})


def basis_diagram(params: ModelParams, c: Sequence[int]) -> DiagramState:
    """``Π_i Tr(Z†^i)^{c_i}`` times the ground state (unnormalized)."""
    g = ground_diagram(params)
    loops = [i + 1 for i, ci in enumerate(c) for _ in range(ci)]
    return g.times_loops(loops)


# ---------------------------------------------------------------------------
# Word application
# ---------------------------------------------------------------------------
#
# While a word is being applied, every term carries a "cut": the partially
# applied open strand.  ('L', s) is a strand (Z†^s)^x_y between the current
# left index x and the closing index y.  ('C', others, fd, d, s) means one
# ε-factor has an open slot (kept at position 0, the other N-1 chains
# sorted in ``others``) joined to x by (Z†^s), while a chain
# (λ†^{fd} Z†^d)_y dangles at the closing index.

_Work = Dict[Tuple[tuple, Tuple[int, ...], Tuple[CTuple, ...]], Fraction]


def _acc(out: _Work, key, v: Fraction) -> None:
    out[key] = out.get(key, 0) + v


def _step_zdag(work: _Work) -> _Work:
    out: _Work = {}
    for (cut, loops, cs), v in work.items():
        if cut[0] == "L":
            ncut = ("L", cut[1] + 1)
        else:
            ncut = cut[:4] + (cut[4] + 1,)
        _acc(out, (ncut, loops, cs), v)
    return out


def _step_z(work: _Work, N: int) -> _Work:
    out: _Work = {}
    for (cut, loops, cs), v in work.items():
        s = cut[-1]
        # (a) a Z† on the open strand: a loop splits off
        for u in range(s):
            ncut = cut[:-1] + (s - 1 - u,)
            if u == 0:
                _acc(out, (ncut, loops, cs), v * N)
            else:
                _acc(out, (ncut, _add_loop(loops, u), cs), v)
        # (b) a Z† inside a loop: the loop is absorbed into the strand
        prev = None
        for idx, a in enumerate(loops):
            if a == prev:
                continue
            prev = a
            mult = a * loops.count(a)
            ncut = cut[:-1] + (s + a - 1,)
            _acc(out, (ncut, _remove_at(loops, idx), cs), v * mult)
        if cut[0] == "L":
            # (c) a Z† inside a chain of an uncut ε-factor: that factor becomes cut
            for j, C in enumerate(cs):
                rest_cs = _remove_at(cs, j)
                for r, (n2, f2) in enumerate(C):
                    if n2 == 0:
                        continue
                    others = _remove_at(C, r)
                    sgn = -1 if r % 2 else 1
                    for u in range(n2):
                        ncut = ("C", others, f2, u + s, n2 - 1 - u)
                        _acc(out, (ncut, loops, rest_cs), v * sgn)
            continue
        _, others, fd, d, _ = cut
        # (c) chain in another ε-factor: close the current slot, cut the other factor
        for j, C in enumerate(cs):
            rest_cs = _remove_at(cs, j)
            for r, (n2, f2) in enumerate(C):
                if n2 == 0:
                    continue
                new_others = _remove_at(C, r)
                sgn_r = -1 if r % 2 else 1
                for u in range(n2):
                    sq, closed = _insert(others, (u + s, f2))
                    if sq == 0:
                        continue
                    ncs = _sorted_cs(rest_cs + (closed,))
                    ncut = ("C", new_others, fd, d, n2 - 1 - u)
                    _acc(out, (ncut, loops, ncs), v * sq * sgn_r)
        # (d) chain in the cut factor itself: close the slot, the cut moves
        for r, (n2, f2) in enumerate(others):
            if n2 == 0:
                continue
            remaining = _remove_at(others, r)
            sgn_r = -1 if (r + 1) % 2 else 1
            for u in range(n2):
                sq, new_others = _insert(remaining, (u + s, f2))
                if sq == 0:
                    continue
                ncut = ("C", new_others, fd, d, n2 - 1 - u)
                _acc(out, (ncut, loops, cs), v * sq * sgn_r)
        # (e) a Z† on the dangling chain: the cut factor closes, a plain strand remains
        for u in range(d):
            sq, closed = _insert(others, (u + s, fd))
            if sq == 0:
                continue
            ncs = _sorted_cs(cs + (closed,))
            _acc(out, (("L", d - 1 - u), loops, ncs), v * sq)
    return out


def _close(work: _Work, N: int) -> Dict[Term, Fraction]:
    out: Dict[Term, Fraction] = {}
    for (cut, loops, cs), v in work.items():
        if cut[0] == "L":
            s = cut[1]
            if s == 0:
                key = (loops, cs)
                out[key] = out.get(key, 0) + v * N
            else:
                key = (_add_loop(loops, s), cs)
                out[key] = out.get(key, 0) + v
        else:
            _, others, fd, d, s = cut
            sq, closed = _insert(others, (d + s, fd))
            if sq == 0:
                continue
            key = (loops, _sorted_cs(cs + (closed,)))
            out[key] = out.get(key, 0) + v * sq
    return {k: v for k, v in out.items() if v != 0}


def _run_word(work: _Work, word: str, N: int) -> _Work:
    for letter in reversed(word):
        if letter == "D":
            work = _step_zdag(work)
        elif letter == "Z":
            work = _step_z(work, N)
        else:
            raise ValueError(f"unknown letter {letter!r}")
        work = {k: v for k, v in work.items() if v != 0}
    return work


def apply_trace_word(word: str, state: DiagramState) -> DiagramState:
    """Apply ``Tr(word)`` for a word in letters ``Z`` and ``D`` (= Z†)."""
    work: _Work = {}
    for (loops, cs), v in state.terms.items():
        work[(("L", 0), loops, cs)] = v
    work = _run_word(work, word, state.params.N)
    return DiagramState._raw(state.params, _close(work, state.params.N))


def apply_lambda_word(word: str, a: int, b: int, state: DiagramState) -> DiagramState:
    """Apply ``λ†^a · word · λ_b`` (``λ_b`` acts first)."""
    p = state.params.p
    if not (1 <= a <= p and 1 <= b <= p):
        raise ValueError(f"flavor indices ({a},{b}) out of range for p={p}")
    work: _Work = {}
    for (loops, cs), v in state.terms.items():
        for j, C in enumerate(cs):
            rest_cs = _remove_at(cs, j)
            for r, (n, f) in enumerate(C):
                if f != b:
                    continue
                sgn = -1 if r % 2 else 1
                key = (("C", _remove_at(C, r), a, 0, n), loops, rest_cs)
                _acc(work, key, v * sgn)
    work = _run_word(work, word, state.params.N)
    return DiagramState._raw(state.params, _close(work, state.params.N))


# ---------------------------------------------------------------------------
# Canonical forms
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _c_in_power_sums(C: CTuple, N: int) -> Tuple[Tuple[Tuple[int, ...], Fraction], ...]:
    sign, mu = c_to_schur([n for n, _ in C])
    if sign == 0:
        return ()
    return tuple((k, sign * v) for k, v in sorted(schur_in_power_sums(mu, N).items()))


def to_power_sums(state: DiagramState) -> PowerPoly:
    """Canonical form of a p = 1 state: the polynomial in ``p_1 … p_N`` obtained
    by dividing its evaluation at ``Z† = diag(x)``, ``λ† = (1,…,1)`` by ``Δ(x)^k``.

    For the basis ``Π Tr(Z†^i)^{c_i} |ground⟩`` the keys are exactly the
    vectors ``c``, so this is the coordinate map onto that basis.
    """
    params = state.params
    if params.p != 1:
        raise ValueError("the power-sum canonical form is only defined for p = 1")
    N, k = params.N, params.k
    out: PowerPoly = {}
    for (loops, cs), coef in state.terms.items():
        if len(cs) != k:
            raise ValueError(f"term has {len(cs)} ε-factors, a physical p=1 state has k={k}")
        poly = {(0,) * N: coef}
        for a in loops:
            poly = pp_mul(poly, power_sum_in_N_vars(a, N))
        for C in cs:
            poly = pp_mul(poly, dict(_c_in_power_sums(C, N)))
            if not poly:
                break
        out = pp_add(out, poly)
    return out


# Evaluation polynomials: variables x_1..x_N then y_{a,i} for a = 2..p.

Poly = Dict[Tuple[int, ...], Fraction]


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for k1, v1 in a.items():
        for k2, v2 in b.items():
            k = tuple(x + y for x, y in zip(k1, k2))
            out[k] = out.get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v}


@lru_cache(maxsize=None)
def _perms_with_sign(N: int) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    out = []
    for perm in itertools.permutations(range(N)):
        sign, _ = canonical_c(perm)
        out.append((perm, sign))
    return tuple(out)


@lru_cache(maxsize=None)
def _c_eval(C: CTuple, N: int, p: int) -> Tuple[Tuple[Tuple[int, ...], Fraction], ...]:
    nvars = N + (p - 1) * N
    acc: Poly = {}
    for perm, sign in _perms_with_sign(N):
        exp = [0] * nvars
        for r, i in enumerate(perm):
            n, f = C[r]
            exp[i] += n
            if f > 1:
                exp[N + (f - 2) * N + i] += 1
        key = tuple(exp)
        acc[key] = acc.get(key, 0) + sign
    return tuple(sorted((k, Fraction(v)) for k, v in acc.items() if v))


@lru_cache(maxsize=None)
def _loop_eval(a: int, N: int, p: int) -> Tuple[Tuple[Tuple[int, ...], Fraction], ...]:
    nvars = N + (p - 1) * N
    out = []
    for i in range(N):
        exp = [0] * nvars
        exp[i] = a
        out.append((tuple(exp), Fraction(1)))
    return tuple(out)


def evaluation_polynomial(state: DiagramState) -> Poly:
    """Evaluate at ``Z† = diag(x)``, ``λ†^1 = (1,…,1)``, ``λ†^a = (y_{a,i})``.

    The slice meets a dense set of orbits of the gauge group, so a state
    that transforms by a character of the gauge group vanishes exactly when
    this polynomial does.
    """
    params = state.params
    N, p = params.N, params.p
    nvars = N + (p - 1) * N
    out: Poly = {}
    for (loops, cs), coef in state.terms.items():
        poly: Poly = {(0,) * nvars: coef}
        for C in cs:
            poly = _poly_mul(poly, dict(_c_eval(C, N, p)))
            if not poly:
                break
        for a in loops:
            if not poly:
                break
            poly = _poly_mul(poly, dict(_loop_eval(a, N, p)))
        for key, v in poly.items():
            out[key] = out.get(key, 0) + v
    return {k: v for k, v in out.items() if v != 0}


def canonical_form(state: DiagramState):
    """A structural canonical form: equal forms iff equal states."""
    if state.params.p == 1:
        return ("p", tuple(sorted(to_power_sums(state).items())))
    return ("x", tuple(sorted(evaluation_polynomial(state).items())))


def is_zero(state: DiagramState) -> bool:
    if not state.terms:
        return True
    if state.params.p == 1:
        return not to_power_sums(state)
    return not evaluation_polynomial(state)


def ratio_to(state: DiagramState, reference: DiagramState) -> Optional[Fraction]:
    """The scalar r with ``state = r · reference``, or None if not proportional."""
    if state.params.p == 1:
        a, b = to_power_sums(state), to_power_sums(reference)
    else:
        a, b = evaluation_polynomial(state), evaluation_polynomial(reference)
    if not b:
        raise ValueError("reference state is zero")
    key = next(iter(b))
    r = a.get(key, Fraction(0)) / b[key]
    for k, v in b.items():
        if a.get(k, 0) != r * v:
            return None
    if any(k not in b for k in a):
        return None
    return r
