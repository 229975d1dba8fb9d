"""Exact arithmetic substrate.

Rationals are Python's ``fractions.Fraction``.  On top of that this module
provides polynomials in the two formal deformation parameters, numbers that
carry a tracked half-integer power of N, and an exact Gaussian-elimination
solver.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

Rational = Fraction
Number = Union[int, Fraction]


def as_rational(x: Number) -> Fraction:
    """Coerce an int or Fraction (or an ``"a/b"`` string) to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not exact numbers")
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"cannot treat {type(x).__name__} as an exact rational")


def rational_arith(a: Number, b: Number, op: str) -> Fraction:
    """Apply ``op`` in {add, sub, mul, div} to two exact rationals.

    Division by zero raises ``ZeroDivisionError``.
    """
    a, b = as_rational(a), as_rational(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError("exact division by zero")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def rational_to_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# Polynomials in the deformation parameters (eps1, eps2)
# ---------------------------------------------------------------------------

Exponent = Tuple[int, int]


class ParamPoly:
    """Sparse polynomial in ``eps1`` and ``eps2`` with rational coefficients.

    Terms are stored as a sorted tuple of ``((i, j), coefficient)`` pairs
    meaning ``coefficient * eps1**i * eps2**j``, so structural equality is
    mathematical equality.  Negative powers of ``eps2`` are allowed to
    express the ``p/eps2`` level of the affine target; ``is_polynomial``
    reports whether any occur.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[Exponent, Number]] = None):
        clean: Dict[Exponent, Fraction] = {}
        if terms:
            for exp, c in terms.items():
                c = as_rational(c)
                if c == 0:
                    continue
                i, j = exp
                if i < 0:
                    raise ValueError("negative powers of eps1 are not supported")
                clean[(int(i), int(j))] = c
        self._terms: Tuple[Tuple[Exponent, Fraction], ...] = tuple(sorted(clean.items()))
        self._hash: Optional[int] = None

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, c: Number) -> "ParamPoly":
        return cls({(0, 0): c})

    @classmethod
    def eps1(cls) -> "ParamPoly":
        return cls({(1, 0): 1})

    @classmethod
    def eps2(cls) -> "ParamPoly":
        return cls({(0, 1): 1})

    @classmethod
    def eps3(cls, p: int) -> "ParamPoly":
        """``eps2 - p * eps1``."""
        return cls({(0, 1): 1, (1, 0): -p})

    @classmethod
    def eps2_power(cls, j: int) -> "ParamPoly":
        return cls({(0, j): 1})

    # inspection ---------------------------------------------------------
    @property
    def terms(self) -> Dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_polynomial(self) -> bool:
        return all(j >= 0 for (_, j), _ in self._terms)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(i + j for (i, j), _ in self._terms)

    def constant_value(self) -> Optional[Fraction]:
        """The value if the polynomial is a constant, else ``None``."""
        if not self._terms:
            return Fraction(0)
        if len(self._terms) == 1 and self._terms[0][0] == (0, 0):
            return self._terms[0][1]
        return None

    def evaluate(self, eps1: Number, eps2: Number) -> Fraction:
        e1, e2 = as_rational(eps1), as_rational(eps2)
        total = Fraction(0)
        for (i, j), c in self._terms:
            if j < 0 and e2 == 0:
                raise ZeroDivisionError("eps2 = 0 in a Laurent term")
            total += c * e1 ** i * e2 ** j
        return total

    # arithmetic ---------------------------------------------------------
    @staticmethod
    def _coerce(other) -> "ParamPoly":
        if isinstance(other, ParamPoly):
            return other
        return ParamPoly.const(other)

    def __add__(self, other) -> "ParamPoly":
        other = self._coerce(other)
        acc = dict(self._terms)
        for e, c in other._terms:
            acc[e] = acc.get(e, 0) + c
        return ParamPoly(acc)

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        return ParamPoly({e: -c for e, c in self._terms})

    def __sub__(self, other) -> "ParamPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ParamPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ParamPoly":
        if not isinstance(other, ParamPoly):
            c = as_rational(other)
            return ParamPoly({e: v * c for e, v in self._terms})
        acc: Dict[Exponent, Fraction] = {}
        for (i1, j1), c1 in self._terms:
            for (i2, j2), c2 in other._terms:
                key = (i1 + i2, j1 + j2)
                acc[key] = acc.get(key, 0) + c1 * c2
        return ParamPoly(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ParamPoly":
        if n < 0:
            raise ValueError("negative powers are not supported")
        out = ParamPoly.const(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamPoly):
            try:
                other = ParamPoly.const(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __repr__(self) -> str:
        return f"ParamPoly({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for (i, j), c in self._terms:
            mon = []
            if i:
                mon.append("e1" if i == 1 else f"e1^{i}")
            if j:
                mon.append("e2" if j == 1 else f"e2^{j}")
            coef = rational_to_str(c)
            parts.append(coef if not mon else f"{coef}*{'*'.join(mon)}")
        return " + ".join(parts)

    # serialization ------------------------------------------------------
    def to_json(self) -> List[List]:
        return [[i, j, rational_to_str(c)] for (i, j), c in self._terms]

    @classmethod
    def from_json(cls, data: Iterable[Sequence]) -> "ParamPoly":
        return cls({(int(i), int(j)): Fraction(c) for i, j, c in data})


# ---------------------------------------------------------------------------
# Half-integer powers of N
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaledRational:
    """The number ``value * N**(half_power_of_N / 2)`` for a symbolic N.

    Zero is canonically ``ScaledRational(0, 0)``.
    """

    value: Fraction
    half_power_of_N: int = 0

    def __post_init__(self):
        object.__setattr__(self, "value", as_rational(self.value))
        if self.value == 0:
            object.__setattr__(self, "half_power_of_N", 0)

    def __mul__(self, other) -> "ScaledRational":
        if isinstance(other, ScaledRational):
            return ScaledRational(self.value * other.value, self.half_power_of_N + other.half_power_of_N)
        return ScaledRational(self.value * as_rational(other), self.half_power_of_N)

    __rmul__ = __mul__

    def __neg__(self) -> "ScaledRational":
        return ScaledRational(-self.value, self.half_power_of_N)

    def is_zero(self) -> bool:
        return self.value == 0

    def square_at(self, N: int) -> Fraction:
        """The exact rational square of the number at a concrete N."""
        return self.value ** 2 * Fraction(N) ** self.half_power_of_N

    def at(self, N: int) -> Tuple[Fraction, int]:
        """Exact value at a concrete N as ``(rational, r)`` meaning ``rational * sqrt(N)**r``, r in {0, 1}."""
        q, r = divmod(self.half_power_of_N, 2)
        return self.value * Fraction(N) ** q, r

    def to_float(self, N: float) -> float:
        """Decimal convenience rendering; never used in checks."""
        return float(self.value) * float(N) ** (self.half_power_of_N / 2)

    def __str__(self) -> str:
        v = rational_to_str(self.value)
        if self.half_power_of_N == 0:
            return v
        return f"{v}*N^({self.half_power_of_N}/2)"


# ---------------------------------------------------------------------------
# Exact linear algebra
# ---------------------------------------------------------------------------


class InconsistentSystemError(ValueError):
    """Raised when ``A x = b`` has no solution.

    ``row`` is the index of an original equation that reduces to ``0 = residual``.
    """

    def __init__(self, row: int, residual: Fraction):
        super().__init__(f"inconsistent system: equation {row} reduces to 0 = {residual}")
        self.row = row
        self.residual = residual


@dataclass(frozen=True)
class SolveResult:
    x: Tuple[Fraction, ...]
    rank: int
    deficient: bool

    def __iter__(self):
        return iter(self.x)

    def __len__(self):
        return len(self.x)

    def __getitem__(self, i):
        return self.x[i]


MatrixLike = Union[Sequence[Sequence[Number]], Mapping[Tuple[int, int], Number]]


def _dense_rows(A: MatrixLike, ncols: Optional[int] = None) -> List[List[Fraction]]:
    if isinstance(A, Mapping):
        if not A:
            return []
        nrows = max(i for i, _ in A) + 1
        nc = ncols if ncols is not None else max(j for _, j in A) + 1
        rows = [[Fraction(0)] * nc for _ in range(nrows)]
        for (i, j), v in A.items():
            rows[i][j] = as_rational(v)
        return rows
    return [[as_rational(v) for v in row] for row in A]


def _row_reduce(rows: List[List[Fraction]]) -> Tuple[List[int], List[int]]:
    """In-place reduced row echelon form; returns (pivot columns, pivot row order)."""
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(nrows):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return pivots, list(range(r))


def matrix_rank(A: MatrixLike) -> int:
    rows = _dense_rows(A)
    if not rows:
        return 0
    pivots, _ = _row_reduce(rows)
    return len(pivots)


def determinant(A: Sequence[Sequence[Number]]) -> Fraction:
    rows = _dense_rows(A)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    det = Fraction(1)
    for c in range(n):
        pr = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if pr is None:
            return Fraction(0)
        if pr != c:
            rows[c], rows[pr] = rows[pr], rows[c]
            det = -det
        det *= rows[c][c]
        inv = 1 / rows[c][c]
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                f = rows[i][c] * inv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return det


def solve_exact(A: MatrixLike, b: Sequence[Number]) -> SolveResult:
    """Solve ``A x = b`` exactly over the rationals.

    ``A`` may be a list of rows or a sparse ``{(row, col): value}`` map and
    may have more rows than columns.  An inconsistent system raises
    :class:`InconsistentSystemError`; a rank-deficient consistent system
    returns one solution (free variables set to zero) with
    ``deficient=True``.  The returned solution is verified by substitution.
    """
    bvec = [as_rational(v) for v in b]
    if isinstance(A, Mapping):
        ncols = (max(j for _, j in A) + 1) if A else 0
        rows = _dense_rows(A, ncols)
        while len(rows) < len(bvec):
            rows.append([Fraction(0)] * ncols)
    else:
        rows = _dense_rows(A)
        ncols = len(rows[0]) if rows else 0
    if len(rows) != len(bvec):
        raise ValueError("row count of A does not match length of b")
    original = [list(r) for r in rows]
    # the last column records the original equation index for error reports
    aug = [r + [bv, Fraction(k)] for k, (r, bv) in enumerate(zip(rows, bvec))]
    nrows = len(aug)
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, nrows) if aug[i][c] != 0), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [v * inv for v in aug[r][:ncols + 1]] + [aug[r][ncols + 1]]
        for i in range(nrows):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * bb for a, bb in zip(aug[i][:ncols + 1], aug[r][:ncols + 1])] + [aug[i][ncols + 1]]
        pivots.append(c)
        r += 1
    for i in range(r, nrows):
        if aug[i][ncols] != 0:
            raise InconsistentSystemError(int(aug[i][ncols + 1]), aug[i][ncols])
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = aug[i][ncols]
    for i, row in enumerate(original):
        if sum((a * xv for a, xv in zip(row, x)), Fraction(0)) != bvec[i]:
            raise ArithmeticError("back-substitution check failed")  # pragma: no cover
    rank = len(pivots)
    return SolveResult(tuple(x), rank, rank < ncols)


def nullspace(A: Sequence[Sequence[Number]]) -> List[List[Fraction]]:
    """A basis of the right null space of ``A``."""
    rows = _dense_rows(A)
    if not rows:
        return []
    ncols = len(rows[0])
    pivots, _ = _row_reduce(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -rows[i][f]
        basis.append(v)
    return basis
