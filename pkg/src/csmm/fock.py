"""Bosonic Fock-space engine.

A state is an exact polynomial in the creation symbols ``Z†(i,j)`` and
``λ†(a,i)`` applied to the vacuum.  Annihilators act as partial
derivatives: ``Z(i,j)`` is ``∂/∂Z†(j,i)`` and ``λ(a,i)`` is ``∂/∂λ†(a,i)``
(the commutator scale ``eps1`` is fixed to 1).

Indices in the public API are 1-based.  Internally a monomial is a sorted
tuple of integer variable codes: ``Z†(i,j)`` has code ``(i-1)*N + (j-1)``
and ``λ†(a,i)`` has code ``N*N + (a-1)*N + (i-1)``.
"""
from __future__ import annotations

import itertools
import json
from bisect import insort
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .exact import Number, as_rational

Monomial = Tuple[int, ...]


class IndexRangeError(ValueError):
    """An index is outside the range allowed by the model parameters."""


class ParamsMismatchError(ValueError):
    """Two states with different model parameters were combined."""


class DegenerateGroundError(ValueError):
    """The ground state is degenerate and needs explicit flavor labels."""


@dataclass(frozen=True)
class ModelParams:
    """Gauge rank N, flavor count p and level k.

    The deformation parameters are fixed to ``eps1 = 1`` and
    ``eps2 = k + p``, so ``eps3 = eps2 - p*eps1 = k``.
    """

    N: int
    p: int = 1
    k: int = 1

    def __post_init__(self):
        if not (isinstance(self.N, int) and self.N >= 1):
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not (isinstance(self.p, int) and self.p >= 1):
            raise ValueError(f"p must be a positive integer, got {self.p!r}")
        if not (isinstance(self.k, int) and self.k >= 0):
            raise ValueError(f"k must be a non-negative integer, got {self.k!r}")

    @property
    def eps1(self) -> int:
        return 1

    @property
    def eps2(self) -> int:
        return self.k + self.p

    @property
    def eps3(self) -> int:
        return self.k

    @property
    def omega(self) -> int:
        return 1

    def to_json(self) -> dict:
        return {"N": self.N, "p": self.p, "k": self.k}


# ---------------------------------------------------------------------------
# Symbols and monomials
# ---------------------------------------------------------------------------

SYMBOL_KINDS = ("Z", "ZDag", "Lam", "LamDag")


@dataclass(frozen=True)
class ElementarySymbol:
    """One of ``Z(i,j)``, ``ZDag(i,j)``, ``Lam(a,i)``, ``LamDag(a,i)`` (1-based)."""

    kind: str
    first: int
    second: int

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise ValueError(f"unknown symbol kind {self.kind!r}")

    def check(self, params: ModelParams) -> None:
        lim1 = params.p if self.kind in ("Lam", "LamDag") else params.N
        if not (1 <= self.first <= lim1 and 1 <= self.second <= params.N):
            raise IndexRangeError(f"{self} out of range for {params}")

    def __str__(self) -> str:
        return f"{self.kind}({self.first},{self.second})"


def Z(i: int, j: int) -> ElementarySymbol:
    return ElementarySymbol("Z", i, j)


def ZDag(i: int, j: int) -> ElementarySymbol:
    return ElementarySymbol("ZDag", i, j)


def Lam(a: int, i: int) -> ElementarySymbol:
    return ElementarySymbol("Lam", a, i)


def LamDag(a: int, i: int) -> ElementarySymbol:
    return ElementarySymbol("LamDag", a, i)


@dataclass(frozen=True)
class CreationMonomial:
    """Readable view of a monomial: sorted Z† pairs and λ† pairs (1-based)."""

    zdag: Tuple[Tuple[int, int], ...]
    lamdag: Tuple[Tuple[int, int], ...]

    @property
    def energy(self) -> int:
        return len(self.zdag)

    @property
    def lambda_count(self) -> int:
        return len(self.lamdag)


def _zcode(N: int, i: int, j: int) -> int:
    return i * N + j


def _lcode(N: int, a: int, i: int) -> int:
    return N * N + a * N + i


def decode_monomial(N: int, mono: Monomial) -> CreationMonomial:
    z, l = [], []
    for v in mono:
        if v < N * N:
            z.append((v // N + 1, v % N + 1))
        else:
            w = v - N * N
            l.append((w // N + 1, w % N + 1))
    return CreationMonomial(tuple(z), tuple(l))


def encode_monomial(N: int, cm: CreationMonomial) -> Monomial:
    codes = [_zcode(N, i - 1, j - 1) for i, j in cm.zdag] + [_lcode(N, a - 1, i - 1) for a, i in cm.lamdag]
    return tuple(sorted(codes))


def _mul_var(mono: Monomial, v: int) -> Monomial:
    lst = list(mono)
    insort(lst, v)
    return tuple(lst)


def _del_var(mono: Monomial, v: int) -> Tuple[int, Monomial]:
    """Derivative of a monomial by a variable: (multiplicity, monomial with one copy removed)."""
    c = mono.count(v)
    if c == 0:
        return 0, mono
    idx = mono.index(v)
    return c, mono[:idx] + mono[idx + 1:]


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


class FockPolynomial:
    """Exact linear combination of creation monomials applied to the vacuum."""

    __slots__ = ("params", "_terms")

    def __init__(self, params: ModelParams, terms: Optional[Mapping[Monomial, Number]] = None):
        self.params = params
        clean: Dict[Monomial, Fraction] = {}
        if terms:
            for m, c in terms.items():
                c = as_rational(c)
                if c != 0:
                    clean[tuple(m)] = c
        self._terms = clean

    @classmethod
    def vacuum(cls, params: ModelParams) -> "FockPolynomial":
        return cls(params, {(): 1})

    @classmethod
    def zero(cls, params: ModelParams) -> "FockPolynomial":
        return cls(params)

    @classmethod
    def _raw(cls, params: ModelParams, terms: Dict[Monomial, Fraction]) -> "FockPolynomial":
        out = cls.__new__(cls)
        out.params = params
        out._terms = {m: c for m, c in terms.items() if c != 0}
        return out

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return self._terms

    def readable_terms(self) -> Dict[CreationMonomial, Fraction]:
        return {decode_monomial(self.params.N, m): c for m, c in self._terms.items()}

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def _check(self, other: "FockPolynomial") -> None:
        if self.params != other.params:
            raise ParamsMismatchError(f"{self.params} vs {other.params}")

    def __add__(self, other: "FockPolynomial") -> "FockPolynomial":
        self._check(other)
        acc = dict(self._terms)
        for m, c in other._terms.items():
            acc[m] = acc.get(m, 0) + c
        return FockPolynomial._raw(self.params, acc)

    def __neg__(self) -> "FockPolynomial":
        return FockPolynomial._raw(self.params, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other: "FockPolynomial") -> "FockPolynomial":
        return self + (-other)

    def scale(self, c: Number) -> "FockPolynomial":
        c = as_rational(c)
        return FockPolynomial._raw(self.params, {m: v * c for m, v in self._terms.items()})

    def __rmul__(self, c: Number) -> "FockPolynomial":
        return self.scale(c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FockPolynomial):
            return NotImplemented
        return self.params == other.params and self._terms == other._terms

    def __hash__(self):  # pragma: no cover - mutable-looking container, hash by content
        return hash((self.params, frozenset(self._terms.items())))

    def multiply(self, other: "FockPolynomial") -> "FockPolynomial":
        """Product of two creation polynomials (both applied to the vacuum)."""
        self._check(other)
        acc: Dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(sorted(m1 + m2))
                acc[m] = acc.get(m, 0) + c1 * c2
        return FockPolynomial._raw(self.params, acc)

    def gradings(self) -> set:
        """The set of (energy, lambda-count) bidegrees present."""
        NN = self.params.N ** 2
        return {(sum(1 for v in m if v < NN), sum(1 for v in m if v >= NN)) for m in self._terms}

    def max_abs_term(self) -> Optional[Tuple[CreationMonomial, Fraction]]:
        if not self._terms:
            return None
        m, c = max(self._terms.items(), key=lambda mc: (abs(mc[1]), mc[0]))
        return decode_monomial(self.params.N, m), c

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        terms = []
        for m in sorted(self._terms):
            cm = decode_monomial(self.params.N, m)
            c = self._terms[m]
            terms.append({
                "zdag": [list(x) for x in cm.zdag],
                "lamdag": [list(x) for x in cm.lamdag],
                "num": str(c.numerator),
                "den": str(c.denominator),
            })
        return {"params": self.params.to_json(), "terms": terms}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict) -> "FockPolynomial":
        params = ModelParams(**data["params"])
        terms = {}
        for t in data["terms"]:
            cm = CreationMonomial(tuple(tuple(x) for x in t["zdag"]), tuple(tuple(x) for x in t["lamdag"]))
            terms[encode_monomial(params.N, cm)] = Fraction(int(t["num"]), int(t["den"]))
        return cls(params, terms)

    @classmethod
    def loads(cls, text: str) -> "FockPolynomial":
        return cls.from_json(json.loads(text))

    def __repr__(self) -> str:
        return f"FockPolynomial({self.params}, {len(self._terms)} terms)"


# ---------------------------------------------------------------------------
# Elementary actions
# ---------------------------------------------------------------------------


def apply_symbol(s: ElementarySymbol, state: FockPolynomial) -> FockPolynomial:
    """Apply one creation or annihilation symbol to a state."""
    params = state.params
    s.check(params)
    N = params.N
    i, j = s.first - 1, s.second - 1
    if s.kind == "ZDag":
        v = _zcode(N, i, j)
        return FockPolynomial._raw(params, {_mul_var(m, v): c for m, c in state.terms.items()})
    if s.kind == "LamDag":
        v = _lcode(N, i, j)
        return FockPolynomial._raw(params, {_mul_var(m, v): c for m, c in state.terms.items()})
    # Z(i,j) differentiates by Z†(j,i); Lam(a,i) by λ†(a,i)
    v = _zcode(N, j, i) if s.kind == "Z" else _lcode(N, i, j)
    acc: Dict[Monomial, Fraction] = {}
    for m, c in state.terms.items():
        mult, rest = _del_var(m, v)
        if mult:
            acc[rest] = acc.get(rest, 0) + c * mult
    return FockPolynomial._raw(params, acc)


def apply_symbols(symbols: Sequence[ElementarySymbol], state: FockPolynomial) -> FockPolynomial:
    """Apply an operator product; the rightmost symbol acts first."""
    for s in reversed(symbols):
        state = apply_symbol(s, state)
    return state


# Open-strand propagation.  A strand entry is keyed by (left index, right
# index, monomial); letters act on the left end.

_Strand = Dict[Tuple[int, int, Monomial], Fraction]


def _letter_step(N: int, letter: str, strand: _Strand) -> _Strand:
    out: _Strand = {}
    if letter == "D":
        for (x, y, m), c in strand.items():
            for xn in range(N):
                key = (xn, y, _mul_var(m, _zcode(N, xn, x)))
                out[key] = out.get(key, 0) + c
    elif letter == "Z":
        for (x, y, m), c in strand.items():
            lo, hi = x * N, x * N + N
            prev = None
            for idx, v in enumerate(m):
                if v < lo or v >= hi or v == prev:
                    continue
                prev = v
                mult = m.count(v)
                rest = m[:idx] + m[idx + 1:]
                key = (v - lo, y, rest)
                out[key] = out.get(key, 0) + c * mult
    else:
        raise ValueError(f"unknown word letter {letter!r}")
    return out


def normalize_word(word: Union[str, Sequence[str]]) -> str:
    """Accept 'Z'/'D' strings or sequences of 'Z'/'ZDag' names; return a 'Z'/'D' string."""
    if isinstance(word, str):
        w = word
    else:
        w = "".join("D" if x in ("D", "ZDag", "Zd") else "Z" if x == "Z" else "?" for x in word)
    if any(ch not in "ZD" for ch in w):
        raise ValueError(f"word must consist of Z and Z† letters, got {word!r}")
    return w


def apply_word(word, state: FockPolynomial, closure="trace"):
    """Apply a matrix word of Z and Z† letters with deferred index contraction.

    ``closure`` selects the contraction pattern:

    * ``"trace"``: the operator ``Tr(word)``; returns a FockPolynomial.
    * ``("lambda", a, b)``: the operator ``λ†^a · word · λ_b``; returns a FockPolynomial.
    * ``"open"``: returns ``{(i, j): FockPolynomial}`` for the matrix element
      ``(word)^i_j`` with 1-based free indices.

    The leftmost letter is the leftmost operator, so letters act right to left.
    """
    params = state.params
    N = params.N
    w = normalize_word(word)
    strand: _Strand = {}
    if closure in ("trace", "open"):
        for y in range(N):
            for m, c in state.terms.items():
                strand[(y, y, m)] = c
    elif isinstance(closure, tuple) and closure[0] == "lambda":
        _, a, b = closure
        if not (1 <= a <= params.p and 1 <= b <= params.p):
            raise IndexRangeError(f"flavor indices ({a},{b}) out of range for p={params.p}")
        for m, c in state.terms.items():
            for y in range(N):
                mult, rest = _del_var(m, _lcode(N, b - 1, y))
                if mult:
                    key = (y, 0, rest)
                    strand[key] = strand.get(key, 0) + c * mult
    else:
        raise ValueError(f"unknown closure {closure!r}")
    for letter in reversed(w):
        strand = _letter_step(N, letter, strand)
    if closure == "open":
        out: Dict[Tuple[int, int], Dict[Monomial, Fraction]] = {}
        for (x, y, m), c in strand.items():
            d = out.setdefault((x + 1, y + 1), {})
            d[m] = d.get(m, 0) + c
        return {ij: FockPolynomial._raw(params, d) for ij, d in out.items()}
    acc: Dict[Monomial, Fraction] = {}
    if closure == "trace":
        for (x, y, m), c in strand.items():
            if x == y:
                acc[m] = acc.get(m, 0) + c
    else:
        a = closure[1]
        for (x, _, m), c in strand.items():
            mm = _mul_var(m, _lcode(N, a - 1, x))
            acc[mm] = acc.get(mm, 0) + c
    return FockPolynomial._raw(params, acc)


def apply_scalar_word(word, state: FockPolynomial, closure="trace") -> FockPolynomial:
    """Like :func:`apply_word` but refuses an open contraction pattern."""
    if closure == "open":
        raise ValueError("an open index pattern cannot produce a scalar operator")
    return apply_word(word, state, closure)


# ---------------------------------------------------------------------------
# Moment map and physicality
# ---------------------------------------------------------------------------


def moment_map_apply(i: int, j: int, state: FockPolynomial) -> FockPolynomial:
    """Apply ``μ^i_j = :[Z,Z†]:^i_j + Σ_a λ^i_a λ†^a_j - eps2 δ^i_j``.

    The normal-ordered commutator is ``Σ_k (Z†^k_j Z^i_k - Z†^i_k Z^k_j)``;
    the flavor term keeps the annihilator on the left, so it equals
    ``Σ_a λ†^a_j λ^i_a + p δ^i_j``.
    """
    params = state.params
    N, p = params.N, params.p
    if not (1 <= i <= N and 1 <= j <= N):
        raise IndexRangeError(f"moment map indices ({i},{j}) out of range for N={N}")
    i0, j0 = i - 1, j - 1
    acc: Dict[Monomial, Fraction] = {}

    def add_derivation(src: int, dst: int, sign: int):
        for m, c in state.terms.items():
            mult, rest = _del_var(m, src)
            if mult:
                mm = _mul_var(rest, dst)
                acc[mm] = acc.get(mm, 0) + sign * c * mult

    for k in range(N):
        # Z†^k_j Z^i_k : Z^i_k = ∂/∂Z†(k,i)
        add_derivation(_zcode(N, k, i0), _zcode(N, k, j0), 1)
        # -Z†^i_k Z^k_j : Z^k_j = ∂/∂Z†(j,k)
        add_derivation(_zcode(N, j0, k), _zcode(N, i0, k), -1)
    for a in range(p):
        add_derivation(_lcode(N, a, i0), _lcode(N, a, j0), 1)
    if i == j:
        shift = p - params.eps2
        for m, c in state.terms.items():
            acc[m] = acc.get(m, 0) + shift * c
    return FockPolynomial._raw(params, acc)


@dataclass
class PhysicalityReport:
    physical: bool
    lambda_count_ok: bool
    worst_component: Optional[Tuple[int, int]] = None
    worst_term: Optional[Tuple[CreationMonomial, Fraction]] = None

    def __bool__(self) -> bool:
        return self.physical


def is_physical(state: FockPolynomial) -> PhysicalityReport:
    """Check the Gauss law ``μ^i_j |s⟩ = 0`` for all i, j and the λ†-count ``kN``."""
    params = state.params
    N = params.N
    want = params.k * N
    lam_ok = all(c == want for _, c in state.gradings()) if not state.is_zero() else True
    worst = None
    worst_term = None
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            r = moment_map_apply(i, j, state)
            if not r.is_zero():
                t = r.max_abs_term()
                if worst_term is None or abs(t[1]) > abs(worst_term[1]):
                    worst, worst_term = (i, j), t
    return PhysicalityReport(worst is None and lam_ok, lam_ok, worst, worst_term)


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------


def _multiplicity_factor(m: Monomial) -> int:
    f = 1
    for _, grp in itertools.groupby(m):
        f *= factorial(len(list(grp)))
    return f


def inner_product(a: FockPolynomial, b: FockPolynomial) -> Fraction:
    """Fock pairing ``⟨a|b⟩`` with real rational coefficients."""
    if a.params != b.params:
        raise ParamsMismatchError(f"{a.params} vs {b.params}")
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = Fraction(0)
    for m, c in small.terms.items():
        d = large.terms.get(m)
        if d is not None:
            total += c * d * _multiplicity_factor(m)
    return total


# ---------------------------------------------------------------------------
# Ground states
# ---------------------------------------------------------------------------


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def chain_vector(params: ModelParams, flavor: int, power: int) -> List[Dict[Monomial, Fraction]]:
    """The row vector ``(λ†^flavor Z†^power)_i`` for each i, as creation polynomials."""
    N = params.N
    vec = [{(_lcode(N, flavor - 1, i),): Fraction(1)} for i in range(N)]
    for _ in range(power):
        new = [dict() for _ in range(N)]
        for j in range(N):
            for m, c in vec[j].items():
                for i in range(N):
                    mm = _mul_var(m, _zcode(N, j, i))
                    new[i][mm] = new[i].get(mm, 0) + c
        vec = new
    return vec


def epsilon_contraction(params: ModelParams, chains: Sequence[Tuple[int, int]]) -> FockPolynomial:
    """``ε^{i_1…i_N} Π_r (λ†^{f_r} Z†^{n_r})_{i_r}`` for chains ``[(f_r, n_r)]`` (flavor, power)."""
    N = params.N
    if len(chains) != N:
        raise ValueError(f"need exactly N={N} chains")
    vecs = [chain_vector(params, f, n) for f, n in chains]
    acc: Dict[Monomial, Fraction] = {}
    for perm in itertools.permutations(range(N)):
        sign = _perm_sign(perm)
        partial: Dict[Monomial, Fraction] = {(): Fraction(sign)}
        for r, i in enumerate(perm):
            nxt: Dict[Monomial, Fraction] = {}
            for m1, c1 in partial.items():
                for m2, c2 in vecs[r][i].items():
                    mm = tuple(sorted(m1 + m2))
                    nxt[mm] = nxt.get(mm, 0) + c1 * c2
            partial = nxt
        for m, c in partial.items():
            acc[m] = acc.get(m, 0) + c
    return FockPolynomial._raw(params, acc)


def _block_chain_terms(p: int, powers: Sequence[int]) -> List[Tuple[int, List[Tuple[int, int]]]]:
    """Expand the flavor ε-tensors of consecutive blocks into signed chain lists."""
    terms: List[Tuple[int, List[Tuple[int, int]]]] = [(1, [])]
    for n in powers:
        nxt = []
        for fperm in itertools.permutations(range(1, p + 1)):
            s = _perm_sign([f - 1 for f in fperm])
            for sign, chains in terms:
                nxt.append((sign * s, chains + [(f, n) for f in fperm]))
        terms = nxt
    return terms


def ground_state(params: ModelParams, flavor_labels: Optional[Sequence[Sequence[int]]] = None) -> FockPolynomial:
    """The minimal-energy physical state, expanded into monomials.

    For ``p = 1`` this is the k-th power of ``ε (λ†)(λ†Z†)…(λ†Z†^{N-1})``.
    For ``p > 1`` and ``N = mp + q`` each of the k factors contracts the
    flavor blocks ``B(0) … B(m-1)`` and, when ``q > 0``, q extra chains
    ``λ†^{a_s} Z†^m`` whose flavors are given row by row in ``flavor_labels``
    (one row of length q per factor).
    """
    N, p, k = params.N, params.p, params.k
    m, q = divmod(N, p)
    if p > 1 and q != 0 and flavor_labels is None:
        raise DegenerateGroundError(
            f"N={N} is not divisible by p={p}; the ground states form a family, "
            "pass flavor_labels (k rows of length N mod p) to choose one"
        )
    if flavor_labels is not None:
        if len(flavor_labels) != k or any(len(row) != q for row in flavor_labels):
            raise ValueError(f"flavor_labels must be {k} rows of length {q}")
    factors = []
    for r in range(k):
        if p == 1:
            factors.append(epsilon_contraction(params, [(1, n) for n in range(N)]))
            continue
        tail = [(a, m) for a in (flavor_labels[r] if flavor_labels is not None else [])]
        acc = FockPolynomial.zero(params)
        for sign, chains in _block_chain_terms(p, range(m)):
            acc = acc + epsilon_contraction(params, chains + tail).scale(sign)
        factors.append(acc)
    out = FockPolynomial.vacuum(params)
    for f in factors:
        out = out.multiply(f)
    return out


def trace_power_creation(params: ModelParams, n: int) -> FockPolynomial:
    """``Tr(Z†^n)`` applied to the vacuum (``N`` times the vacuum for n = 0)."""
    return apply_word("D" * n, FockPolynomial.vacuum(params))
