"""Gauge-invariant operators, physical spanning sets and relation checks.

Operators are described by small immutable specs (``E``, ``T``, ``Mu``
and their sums, products, commutators and scalar multiples) and can act
on either a :class:`~csmm.fock.FockPolynomial` or a
:class:`~csmm.diagrams.DiagramState`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import diagrams as dg
from . import fock
from .exact import as_rational, rational_to_str
from .fock import FockPolynomial, ModelParams
from .relations import FAMILIES, RelationInstance, relation_instances, relation_terms

State = Union[FockPolynomial, dg.DiagramState]


# ---------------------------------------------------------------------------
# Operator specs
# ---------------------------------------------------------------------------


class GaugeOpSpec:
    """Base class of operator descriptors; supports +, -, scalar * and operator *."""

    def __add__(self, other: "GaugeOpSpec") -> "GaugeOpSpec":
        return Sum((self, other))

    def __sub__(self, other: "GaugeOpSpec") -> "GaugeOpSpec":
        return Sum((self, ScalarMul(Fraction(-1), other)))

    def __neg__(self) -> "GaugeOpSpec":
        return ScalarMul(Fraction(-1), self)

    def __mul__(self, other) -> "GaugeOpSpec":
        if isinstance(other, GaugeOpSpec):
            return Product((self, other))
        return ScalarMul(as_rational(other), self)

    def __rmul__(self, other) -> "GaugeOpSpec":
        return ScalarMul(as_rational(other), self)


@dataclass(frozen=True)
class E(GaugeOpSpec):
    """``e^a_{b;n,m} = λ†^a Sym(Z^n Z†^m) λ_b``."""

    a: int
    b: int
    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("e-generator indices must be non-negative")


@dataclass(frozen=True)
class T(GaugeOpSpec):
    """``t_{n,m} = Tr Sym(Z^n Z†^m)``; ``T(0,0)`` is the scalar N."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("t-generator indices must be non-negative")


@dataclass(frozen=True)
class Mu(GaugeOpSpec):
    """Moment map component ``μ^i_j`` (monomial states only)."""

    i: int
    j: int


@dataclass(frozen=True)
class Product(GaugeOpSpec):
    """Operator product; the rightmost factor acts first."""

    factors: Tuple[GaugeOpSpec, ...]


@dataclass(frozen=True)
class Commutator(GaugeOpSpec):
    left: GaugeOpSpec
    right: GaugeOpSpec


@dataclass(frozen=True)
class ScalarMul(GaugeOpSpec):
    c: Fraction
    op: GaugeOpSpec


@dataclass(frozen=True)
class Sum(GaugeOpSpec):
    ops: Tuple[GaugeOpSpec, ...]


ZERO_OP = Sum(())


def symbol_to_op(sym) -> GaugeOpSpec:
    if sym[0] == "e":
        return E(*sym[1:])
    if sym[0] == "t":
        return T(*sym[1:])
    raise ValueError(f"unknown generator symbol {sym!r}")


# ---------------------------------------------------------------------------
# Symmetrized words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymWordExpansion:
    """``Sym(Z^n Z†^m)`` as a uniform average of words in ``Z`` and ``D`` (= Z†)."""

    n: int
    m: int
    words: Tuple[Tuple[Fraction, str], ...]


def build_sym(n: int, m: int) -> SymWordExpansion:
    """All ``binom(n+m, n)`` interleavings, each with weight ``1/binom(n+m, n)``."""
    if n < 0 or m < 0:
        raise ValueError("indices must be non-negative")
    L = n + m
    w = Fraction(1, comb(L, n))
    words = []
    for zpos in itertools.combinations(range(L), n):
        zs = set(zpos)
        words.append((w, "".join("Z" if i in zs else "D" for i in range(L))))
    words.sort(key=lambda cw: cw[1])
    return SymWordExpansion(n, m, tuple(words))


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------


def _state_key(state: State):
    return frozenset(state.terms.items())


def _zero_like(state: State) -> State:
    if isinstance(state, FockPolynomial):
        return FockPolynomial.zero(state.params)
    return dg.DiagramState(state.params)


class OpEvaluator:
    """Applies operator specs to states, memoizing generator actions."""

    def __init__(self, cache: bool = True):
        self.cache_enabled = cache
        self._cache: Dict[tuple, State] = {}

    def clear(self) -> None:
        self._cache.clear()

    def _basic(self, op: GaugeOpSpec, state: State) -> State:
        if self.cache_enabled:
            key = (op, type(state), state.params, _state_key(state))
            hit = self._cache.get(key)
            if hit is not None:
                return hit
        out = self._basic_uncached(op, state)
        if self.cache_enabled:
            self._cache[key] = out
        return out

    @staticmethod
    def _basic_uncached(op: GaugeOpSpec, state: State) -> State:
        params = state.params
        if isinstance(op, T):
            if op.n == 0 and op.m == 0:
                return state.scale(params.N)
            acc = _zero_like(state)
            for w, word in build_sym(op.n, op.m).words:
                if isinstance(state, FockPolynomial):
                    acc = acc + fock.apply_word(word, state).scale(w)
                else:
                    acc = acc + dg.apply_trace_word(word, state).scale(w)
            return acc
        if isinstance(op, E):
            if not (1 <= op.a <= params.p and 1 <= op.b <= params.p):
                raise fock.IndexRangeError(f"{op} out of range for p={params.p}")
            acc = _zero_like(state)
            for w, word in build_sym(op.n, op.m).words:
                if isinstance(state, FockPolynomial):
                    acc = acc + fock.apply_word(word, state, ("lambda", op.a, op.b)).scale(w)
                else:
                    acc = acc + dg.apply_lambda_word(word, op.a, op.b, state).scale(w)
            return acc
        if isinstance(op, Mu):
            if not isinstance(state, FockPolynomial):
                raise TypeError("the moment map acts on monomial states only")
            return fock.moment_map_apply(op.i, op.j, state)
        raise TypeError(f"not a basic operator: {op!r}")

    def apply(self, op: GaugeOpSpec, state: State) -> State:
        if isinstance(op, (T, E, Mu)):
            return self._basic(op, state)
        if isinstance(op, Product):
            for f in reversed(op.factors):
                state = self.apply(f, state)
            return state
        if isinstance(op, ScalarMul):
            return self.apply(op.op, state).scale(op.c)
        if isinstance(op, Sum):
            acc = _zero_like(state)
            for o in op.ops:
                acc = acc + self.apply(o, state)
            return acc
        if isinstance(op, Commutator):
            return self.apply(op.left, self.apply(op.right, state)) - self.apply(op.right, self.apply(op.left, state))
        raise TypeError(f"unknown operator spec {op!r}")


_DEFAULT = OpEvaluator(cache=False)


def apply_op(op: GaugeOpSpec, state: State, evaluator: Optional[OpEvaluator] = None) -> State:
    """Apply an operator spec to a state (products act right to left)."""
    return (evaluator or _DEFAULT).apply(op, state)


def energy_shift(op: GaugeOpSpec) -> Optional[int]:
    """Energy change of a homogeneous spec (None if mixed)."""
    if isinstance(op, (T, E)):
        return op.m - op.n
    if isinstance(op, Mu):
        return 0
    if isinstance(op, Product):
        return sum(energy_shift(f) for f in op.factors)
    if isinstance(op, ScalarMul):
        return energy_shift(op.op)
    if isinstance(op, Commutator):
        return energy_shift(op.left) + energy_shift(op.right)
    if isinstance(op, Sum):
        shifts = {energy_shift(o) for o in op.ops}
        return shifts.pop() if len(shifts) == 1 else None
    return None


# ---------------------------------------------------------------------------
# Physicality and zero tests
# ---------------------------------------------------------------------------


def state_is_physical(state: State) -> bool:
    if isinstance(state, FockPolynomial):
        return bool(fock.is_physical(state))
    k = state.params.k
    return all(len(cs) == k for (_, cs) in state.terms)


def state_is_zero(state: State) -> bool:
    if isinstance(state, FockPolynomial):
        return state.is_zero()
    return dg.is_zero(state)


def witness_term(state: State) -> Optional[str]:
    """A human-readable nonzero component of a residual."""
    if isinstance(state, FockPolynomial):
        t = state.max_abs_term()
        return None if t is None else f"{t[1]} * {t[0]}"
    if state.params.p == 1:
        pp = dg.to_power_sums(state)
        if not pp:
            return None
        key, val = max(pp.items(), key=lambda kv: (abs(kv[1]), kv[0]))
        return f"{rational_to_str(val)} * p^{list(key)} |ground>"
    ev = dg.evaluation_polynomial(state)
    if not ev:
        return None
    key, val = max(ev.items(), key=lambda kv: (abs(kv[1]), kv[0]))
    return f"{rational_to_str(val)} * x^{list(key)}"


class NonPhysicalStateError(ValueError):
    """A relation check was asked to run on a state that violates the Gauss law."""


# ---------------------------------------------------------------------------
# Spanning sets
# ---------------------------------------------------------------------------


def _canonical_vector(state: dg.DiagramState) -> Dict:
    if state.params.p == 1:
        return dg.to_power_sums(state)
    return dg.evaluation_polynomial(state)


class _Echelon:
    """Incremental exact row reduction of sparse vectors."""

    def __init__(self):
        self.rows: Dict = {}  # pivot key -> normalized row

    def reduce(self, vec: Dict) -> Dict:
        v = dict(vec)
        for piv in sorted(self.rows):
            if v.get(piv, 0) != 0:
                f = v[piv]
                for key, val in self.rows[piv].items():
                    nv = v.get(key, 0) - f * val
                    if nv == 0:
                        v.pop(key, None)
                    else:
                        v[key] = nv
        return v

    def add(self, vec: Dict) -> bool:
        v = self.reduce(vec)
        if not v:
            return False
        piv = min(v)
        inv = 1 / v[piv]
        row = {k: val * inv for k, val in v.items()}
        for other_piv, other in list(self.rows.items()):
            if other.get(piv, 0) != 0:
                f = other[piv]
                for key, val in row.items():
                    nv = other.get(key, 0) - f * val
                    if nv == 0:
                        other.pop(key, None)
                    else:
                        other[key] = nv
        self.rows[piv] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)


def p1_basis_labels(N: int, E_max: int) -> List[Tuple[int, ...]]:
    """Vectors ``c`` (length N) with ``Σ i c_i ≤ E_max``, ordered by energy then reverse-lex."""
    from .symfun import partitions

    out = []
    for e in range(E_max + 1):
        for lam in partitions(e, max_part=N):
            c = [0] * N
            for part in lam:
                c[part - 1] += 1
            out.append(tuple(c))
    return out


def physical_spanning_set(params: ModelParams, E_max: int, generator_policy: str = "default",
                          flavor_labels=None) -> List[dg.DiagramState]:
    """Physical states up to ``E_max`` quanta above the ground state.

    For p = 1 this is the basis ``Π Tr(Z†^i)^{c_i} |ground⟩``.  For p > 1 it
    is the ground state acted on by words in ``t_{0,j}`` (j ≥ 1) and
    ``e^a_{b;0,j}`` (j ≥ 0), reduced to a linearly independent subset.
    """
    if E_max < 0:
        raise ValueError("E_max must be non-negative")
    if params.p == 1 and generator_policy == "default":
        g = dg.ground_diagram(params)
        return [g.times_loops([i + 1 for i, ci in enumerate(c) for _ in range(ci)])
                for c in p1_basis_labels(params.N, E_max)]
    g = dg.ground_diagram(params, flavor_labels)
    ev = OpEvaluator()
    ech = _Echelon()
    ech.add(_canonical_vector(g))
    found = [(0, g)]
    frontier = [(0, g)]
    while frontier:
        new = []
        for e0, st in frontier:
            for j in range(0, E_max - e0 + 1):
                ops: List[GaugeOpSpec] = []
                if j >= 1:
                    ops.append(T(0, j))
                ops.extend(E(a, b, 0, j) for a in range(1, params.p + 1) for b in range(1, params.p + 1))
                for op in ops:
                    img = ev.apply(op, st)
                    if not img.terms:
                        continue
                    if ech.add(_canonical_vector(img)):
                        found.append((e0 + j, img))
                        new.append((e0 + j, img))
        frontier = new
    found.sort(key=lambda es: es[0])
    return [s for _, s in found]


def span_rank(states: Sequence[dg.DiagramState]) -> int:
    ech = _Echelon()
    for s in states:
        ech.add(_canonical_vector(s))
    return ech.rank


# ---------------------------------------------------------------------------
# Relation verification
# ---------------------------------------------------------------------------


@dataclass
class RelationReport:
    family: str
    indices: Tuple[int, ...]
    flavors: Tuple[int, ...]
    params: ModelParams
    states_checked: int
    residual_zero: bool
    witness_term: Optional[str] = None
    witness_state: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.residual_zero

    def to_json(self) -> dict:
        out = {
            "family": self.family,
            "indices": list(self.indices),
            "flavors": list(self.flavors),
            "params": self.params.to_json(),
            "states_checked": self.states_checked,
            "residual_zero": self.residual_zero,
        }
        if self.witness_term is not None:
            out["witness_term"] = self.witness_term
            out["witness_state"] = self.witness_state
        return out


def relation_operator(inst: RelationInstance, params: ModelParams) -> GaugeOpSpec:
    """``LHS - RHS`` of a relation as an operator spec at ``eps1 = 1, eps2 = k + p``."""
    terms = relation_terms(inst, params.p, Fraction(1), Fraction(params.eps2))
    ops = []
    for c, word in terms:
        c = as_rational(c)
        if c == 0:
            continue
        ops.append(ScalarMul(c, Product(tuple(symbol_to_op(s) for s in word))))
    return Sum(tuple(ops))


def verify_relation(family, params: ModelParams, states: Sequence[State], evaluator: Optional[OpEvaluator] = None,
                    indices: Optional[Tuple[int, int]] = None, flavors: Tuple[int, ...] = ()) -> RelationReport:
    """Apply ``LHS - RHS`` of one relation instance to each state and test for exact zero.

    ``family`` is either a :class:`RelationInstance` or a family name used
    with ``indices`` and ``flavors``.
    """
    if isinstance(family, RelationInstance):
        inst = family
    else:
        if indices is None:
            raise ValueError("indices are required with a family name")
        inst = RelationInstance(family, tuple(flavors), tuple(indices))
    for i, s in enumerate(states):
        if s.params != params:
            raise ValueError("state parameters differ from the requested parameters")
        if not state_is_physical(s):
            raise NonPhysicalStateError(f"state {i} is not physical; relations hold only on physical states")
    ev = evaluator or OpEvaluator()
    op = relation_operator(inst, params)
    for i, s in enumerate(states):
        r = ev.apply(op, s)
        if not state_is_zero(r):
            return RelationReport(inst.family, inst.indices, inst.flavors, params, i + 1, False, witness_term(r), i)
    return RelationReport(inst.family, inst.indices, inst.flavors, params, len(states), True)


def verify_all_relations(params: ModelParams, states: Sequence[State], families: Sequence[str] = FAMILIES,
                         max_e_index: int = 3, max_t_index: int = 4,
                         evaluator: Optional[OpEvaluator] = None) -> List[RelationReport]:
    ev = evaluator or OpEvaluator()
    reports = []
    for fam in families:
        cap = max_t_index if fam.endswith("t") and fam.startswith("R_t") and fam[-1] == "t" else max_e_index
        for inst in relation_instances(fam, params.p, cap):
            reports.append(verify_relation(inst, params, states, ev))
    return reports


# ---------------------------------------------------------------------------
# Trace identity of the moment map, checked with explicit index sums
# ---------------------------------------------------------------------------


def _open(word: str, state: FockPolynomial) -> Dict[Tuple[int, int], FockPolynomial]:
    return fock.apply_word(word, state, "open") if word else {
        (i, i): state for i in range(1, state.params.N + 1)}


def _matrix_chain(state: FockPolynomial, pieces: Sequence) -> Dict[Tuple[int, int], FockPolynomial]:
    """Apply a product of matrix-valued operators ``P_1 P_2 … P_r`` (P_r acts first).

    Each piece is either a word string or a callable ``(j, k, state) -> state``
    giving the operator component ``P^j_k``.  Returns the matrix of results.
    """
    N = state.params.N
    # current: (left index, right index) -> state, for the product of the pieces applied so far
    current: Dict[Tuple[int, int], FockPolynomial] = {(i, i): state for i in range(1, N + 1)}
    for piece in reversed(pieces):
        nxt: Dict[Tuple[int, int], FockPolynomial] = {}
        for (x, y), st in current.items():
            if isinstance(piece, str):
                comps = _open(piece, st)
                for (a, b), res in comps.items():
                    if b == x and not res.is_zero():
                        key = (a, y)
                        nxt[key] = nxt[key] + res if key in nxt else res
            else:
                for a in range(1, N + 1):
                    res = piece(a, x, st)
                    if not res.is_zero():
                        key = (a, y)
                        nxt[key] = nxt[key] + res if key in nxt else res
        current = nxt
    return current


def _trace_chain(state: FockPolynomial, pieces: Sequence) -> FockPolynomial:
    acc = FockPolynomial.zero(state.params)
    for (x, y), st in _matrix_chain(state, pieces).items():
        if x == y:
            acc = acc + st
    return acc


def _zz_commutator(j: int, k: int, st: FockPolynomial) -> FockPolynomial:
    N = st.params.N
    acc = FockPolynomial.zero(st.params)
    for l in range(1, N + 1):
        acc = acc + fock.apply_symbols([fock.Z(j, l), fock.ZDag(l, k)], st)
        acc = acc - fock.apply_symbols([fock.ZDag(j, l), fock.Z(l, k)], st)
    return acc


def _eps2_minus_lamlamdag(j: int, k: int, st: FockPolynomial) -> FockPolynomial:
    acc = st.scale(st.params.eps2) if j == k else FockPolynomial.zero(st.params)
    for a in range(1, st.params.p + 1):
        acc = acc - fock.apply_symbols([fock.Lam(a, j), fock.LamDag(a, k)], st)
    return acc


@dataclass
class Prop53Report:
    states_checked: int
    passed: bool
    witness: Optional[str] = None


def prop53_check(A_word: str, B_word: str, params: ModelParams, states: Sequence[FockPolynomial]) -> Prop53Report:
    """Check ``Tr(A[Z,Z†]B) = Tr(A(eps2 - λλ†)B) + eps1 TrA TrB`` on physical states.

    ``A_word`` and ``B_word`` are matrix words in ``Z``/``D`` (empty string =
    identity matrix); operator order is as written, so B acts first.
    """
    for i, s in enumerate(states):
        if not fock.is_physical(s):
            raise NonPhysicalStateError(f"state {i} is not physical")
    for i, s in enumerate(states):
        lhs = _trace_chain(s, [A_word, _zz_commutator, B_word])
        rhs = _trace_chain(s, [A_word, _eps2_minus_lamlamdag, B_word])
        trb = fock.apply_word(B_word, s) if B_word else s.scale(params.N)
        rhs = rhs + (fock.apply_word(A_word, trb) if A_word else trb.scale(params.N))
        diff = lhs - rhs
        if not diff.is_zero():
            t = diff.max_abs_term()
            return Prop53Report(i + 1, False, f"{t[1]} * {t[0]}")
    return Prop53Report(len(states), True)
