"""The p = 1 representation on the trace basis and its large-N behaviour.

States are ``|c⟩ = Π_i Tr(Z†^i)^{c_i} |ground⟩`` (stored unnormalized) and
are identified with monomials ``p_1^{c_1} … p_N^{c_N}``.  Matrices of the
operators ``t_{m,n}`` are computed exactly; normalizations by powers of
``N`` (and of ``k+1`` for the rescaled basis) are applied through a ledger
so that every stored number stays rational.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from . import diagrams as dg
from .exact import ScaledRational, determinant, rational_to_str, solve_exact
from .fock import FockPolynomial, ModelParams, inner_product
from .observables import Commutator, GaugeOpSpec, OpEvaluator, T, p1_basis_labels
from .symfun import partition_count

Vector = Tuple[int, ...]


# ---------------------------------------------------------------------------
# Basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class BasisState:
    """A trace-basis label ``c = (c_1, …, c_N)``."""

    c: Vector

    @property
    def energy(self) -> int:
        return sum((i + 1) * ci for i, ci in enumerate(self.c))

    @property
    def N(self) -> int:
        return len(self.c)

    def label(self) -> str:
        parts = [f"p{i + 1}" + (f"^{ci}" if ci > 1 else "") for i, ci in enumerate(self.c) if ci]
        return "*".join(parts) if parts else "1"

    def realize(self, params: ModelParams) -> dg.DiagramState:
        return dg.basis_diagram(params, self.c)

    def realize_fock(self, params: ModelParams) -> FockPolynomial:
        return self.realize(params).to_fock()


def basis_states(N: int, k: int, E: int) -> List[BasisState]:
    """All labels with energy ≤ E (parts ≤ N), by energy then reverse-lexicographic partition order."""
    if N < 1 or E < 0:
        raise ValueError("need N ≥ 1 and E ≥ 0")
    return [BasisState(c) for c in p1_basis_labels(N, E)]


def basis_dimension(N: int, E: int) -> int:
    """``dim H^{≤E}_N``: partitions of 0..E with parts ≤ N."""
    return sum(partition_count(e, max_part=N) for e in range(E + 1))


def gram_matrix(basis: Sequence[BasisState], params: ModelParams) -> List[List[Fraction]]:
    """Exact Fock inner products of the realized basis (monomial engine)."""
    states = [b.realize_fock(params) for b in basis]
    n = len(states)
    G = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            # states of different energy share no monomial, and the pairing is symmetric
            if basis[i].energy == basis[j].energy:
                G[i][j] = G[j][i] = inner_product(states[i], states[j])
    return G


def gram_determinant(basis: Sequence[BasisState], params: ModelParams) -> Fraction:
    return determinant(gram_matrix(basis, params))


class OutsideSpanError(ValueError):
    """The state has components outside the requested basis."""

    def __init__(self, message: str, residual=None):
        super().__init__(message)
        self.residual = residual


def express_in_basis(state: Union[dg.DiagramState, FockPolynomial], basis: Sequence[BasisState]) -> List[Fraction]:
    """Exact coordinates of a physical p = 1 state in the trace basis.

    Diagram states are read off from their power-sum canonical form.
    Monomial states are solved from the Gram system and certified by
    re-expansion.
    """
    if isinstance(state, dg.DiagramState):
        pp = dg.to_power_sums(state)
        index = {b.c: i for i, b in enumerate(basis)}
        out = [Fraction(0)] * len(basis)
        extra = {}
        for key, v in pp.items():
            if key in index:
                out[index[key]] = v
            else:
                extra[key] = v
        if extra:
            raise OutsideSpanError(f"{len(extra)} components outside the basis", extra)
        return out
    params = state.params
    real = [b.realize_fock(params) for b in basis]
    G = [[inner_product(a, b) for b in real] for a in real]
    rhs = [inner_product(a, state) for a in real]
    x = list(solve_exact(G, rhs).x)
    recon = FockPolynomial.zero(params)
    for xi, r in zip(x, real):
        recon = recon + r.scale(xi)
    if not (recon - state).is_zero():
        raise OutsideSpanError("state is not in the span of the basis", recon - state)
    return x


# ---------------------------------------------------------------------------
# Differential-operator forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiffOpTerm:
    """``coef · p^mult · ∂^deriv`` with multiplications to the left."""

    coef: ScaledRational
    mult: Vector
    deriv: Vector


@dataclass
class DiffOpForm:
    terms: List[DiffOpTerm] = field(default_factory=list)

    def add(self, coef: ScaledRational, mult: Dict[int, int] = None, deriv: Dict[int, int] = None, N: int = None) -> "DiffOpForm":
        def vec(d):
            v = [0] * N
            for i, e in (d or {}).items():
                v[i - 1] += e
            return tuple(v)

        self.terms.append(DiffOpTerm(coef, vec(mult), vec(deriv)))
        return self

    def apply_to(self, c: Vector) -> Dict[Vector, ScaledRational]:
        """Image of the monomial ``p^c`` as ``{c': coefficient}`` (coefficients summed per half-power)."""
        out: Dict[Tuple[Vector, int], Fraction] = {}
        for t in self.terms:
            f = Fraction(1)
            ok = True
            new = list(c)
            for i, d in enumerate(t.deriv):
                if d:
                    if c[i] < d:
                        ok = False
                        break
                    for j in range(d):
                        f *= c[i] - j
                    new[i] -= d
            if not ok:
                continue
            for i, mlt in enumerate(t.mult):
                new[i] += mlt
            key = (tuple(new), t.coef.half_power_of_N)
            out[key] = out.get(key, 0) + f * t.coef.value
        res: Dict[Vector, ScaledRational] = {}
        for (v, hp), val in out.items():
            if val:
                if v in res:
                    raise ValueError("mixed half-powers in one entry; use entry_at")
                res[v] = ScaledRational(val, hp)
        return res

    def entry_at(self, row: Vector, col: Vector, N: int) -> Tuple[Fraction, int]:
        """The exact value at a concrete N as ``(q, r)`` meaning ``q · √N^r`` with r ∈ {0, 1}."""
        total = {0: Fraction(0), 1: Fraction(0)}
        for t in self.terms:
            new = list(col)
            f = Fraction(1)
            ok = True
            for i, d in enumerate(t.deriv):
                if d:
                    if col[i] < d:
                        ok = False
                        break
                    for j in range(d):
                        f *= col[i] - j
                    new[i] -= d
            if not ok:
                continue
            for i, mlt in enumerate(t.mult):
                new[i] += mlt
            if tuple(new) != tuple(row):
                continue
            q, r = t.coef.at(N)
            total[r] += f * q
        if total[0] and total[1]:
            raise ValueError("entry mixes integer and half-integer powers of N")
        return (total[1], 1) if total[1] else (total[0], 0)


def p_shift_sum(N: int, E: int, down: bool, coef: ScaledRational) -> DiffOpForm:
    """``coef · Σ_i i p_{i∓1} ∂_i`` (``down``: Σ_{i≥2} i p_{i-1}∂_i, else Σ_{i≥1} i p_{i+1}∂_i)."""
    form = DiffOpForm()
    for i in range(1, N + 1):
        if down and i >= 2:
            form.add(coef * i, {i - 1: 1}, {i: 1}, N=N)
        if not down and i + 1 <= N:
            form.add(coef * i, {i + 1: 1}, {i: 1}, N=N)
    return form


def leading_diff_form(m: int, n: int, N: int, k: int) -> DiffOpForm:
    """The large-N leading differential operator of ``t_{m,n}`` in the normalized basis."""
    form = DiffOpForm()
    if m < n:
        if n - m <= N:
            form.add(ScaledRational(Fraction((k + 1) ** m), m + n), {n - m: 1}, None, N=N)
    elif m == n:
        form.add(ScaledRational(Fraction((k + 1) ** n, n + 1), 2 * n + 2), None, None, N=N)
    else:
        if m - n <= N:
            form.add(ScaledRational(Fraction((k + 1) ** (m - 1) * (m - n)), m + n), None, {m - n: 1}, N=N)
    return form


# ---------------------------------------------------------------------------
# Representation matrices
# ---------------------------------------------------------------------------


@dataclass
class RepMatrix:
    """Exact matrix of an operator between truncated trace-basis spaces.

    ``raw[(i, j)]`` is the coefficient of ``rows[i]`` in ``op · cols[j]``
    in the unnormalized basis.  ``energy_shift`` is the operator's energy
    change, so the normalized entry (basis ``N^{-E/2}|c⟩``) is
    ``raw · N^{energy_shift/2}``.
    """

    label: str
    N: int
    k: int
    E: int
    energy_shift: int
    rows: List[BasisState]
    cols: List[BasisState]
    raw: Dict[Tuple[int, int], Fraction]

    def entry(self, i: int, j: int) -> Fraction:
        return self.raw.get((i, j), Fraction(0))

    def normalized(self, i: int, j: int) -> ScaledRational:
        return ScaledRational(self.entry(i, j), self.energy_shift)

    def row_index(self) -> Dict[Vector, int]:
        return {b.c: i for i, b in enumerate(self.rows)}

    def to_rows(self) -> List[List[Fraction]]:
        return [[self.entry(i, j) for j in range(len(self.cols))] for i in range(len(self.rows))]

    def to_csv(self, m: int = None, n: int = None, predicted: Optional[DiffOpForm] = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["m", "n", "k", "E", "N", "row_state", "col_state", "raw_num", "raw_den",
                    "ledger_halfpower", "predicted", "residual"])
        for i, r in enumerate(self.rows):
            for j, c in enumerate(self.cols):
                v = self.entry(i, j)
                pred = predicted.entry_at(r.c, c.c, self.N) if predicted else (Fraction(0), 0)
                if not v and not pred[0]:
                    continue
                # residual in units of √N^{pred r}: normalized raw minus prediction
                res = ""
                if predicted is not None:
                    q, rr = _normalized_at(v, self.energy_shift, self.N)
                    if rr == pred[1] or not pred[0] or not q:
                        res = rational_to_str(q - pred[0]) + ("*sqrt(N)" if (rr if q else pred[1]) else "")
                w.writerow([m, n, self.k, self.E, self.N, r.label(), c.label(), v.numerator, v.denominator,
                            self.energy_shift, _fmt_at(pred), res])
        return buf.getvalue()


def _normalized_at(raw: Fraction, shift: int, N: int) -> Tuple[Fraction, int]:
    return ScaledRational(raw, shift).at(N)


def _fmt_at(qr: Tuple[Fraction, int]) -> str:
    q, r = qr
    return rational_to_str(q) + ("*sqrt(N)" if r and q else "")


class RepContext:
    """Caches realized basis states and operator images for one (N, k)."""

    def __init__(self, N: int, k: int):
        self.params = ModelParams(N, 1, k)
        self.evaluator = OpEvaluator()
        self._real: Dict[Vector, dg.DiagramState] = {}

    def realize(self, b: BasisState) -> dg.DiagramState:
        st = self._real.get(b.c)
        if st is None:
            st = self._real[b.c] = b.realize(self.params)
        return st

    def matrix(self, op: GaugeOpSpec, shift: int, E: int, label: str) -> RepMatrix:
        N, k = self.params.N, self.params.k
        cols = basis_states(N, k, E)
        rows = basis_states(N, k, max(E + shift, 0))
        index = {b.c: i for i, b in enumerate(rows)}
        raw: Dict[Tuple[int, int], Fraction] = {}
        for j, b in enumerate(cols):
            img = self.evaluator.apply(op, self.realize(b))
            for key, v in dg.to_power_sums(img).items():
                if key not in index:
                    raise OutsideSpanError(f"image of {b.label()} leaves H^(<= {E + shift})")
                raw[(index[key], j)] = v
        return RepMatrix(label, N, k, E, shift, rows, cols, raw)


_CONTEXTS: Dict[Tuple[int, int], RepContext] = {}


def context(N: int, k: int) -> RepContext:
    ctx = _CONTEXTS.get((N, k))
    if ctx is None:
        ctx = _CONTEXTS[(N, k)] = RepContext(N, k)
    return ctx


def rep_matrix(m: int, n: int, N: int, k: int, E: int) -> RepMatrix:
    """Matrix of ``t_{m,n}`` from ``H^{≤E}_N`` to ``H^{≤E+n-m}_N`` (unnormalized basis)."""
    if E < 0:
        raise ValueError("E must be non-negative")
    return context(N, k).matrix(T(m, n), n - m, E, f"t[{m},{n}]")


def commutator_matrix(a: Tuple[int, int], b: Tuple[int, int], N: int, k: int, E: int) -> RepMatrix:
    """Matrix of ``[t_a, t_b]``, computed by exact action on states (no truncation artefacts)."""
    shift = (a[1] - a[0]) + (b[1] - b[0])
    return context(N, k).matrix(Commutator(T(*a), T(*b)), shift, E, f"[t{list(a)},t{list(b)}]")


def form_matrix_at(form: DiffOpForm, rows: Sequence[BasisState], cols: Sequence[BasisState], N: int):
    return {(i, j): form.entry_at(r.c, c.c, N) for i, r in enumerate(rows) for j, c in enumerate(cols)}


# ---------------------------------------------------------------------------
# Representation formulas for t_{1,0}, t_{2,1}, t_{1,2}
# ---------------------------------------------------------------------------


def t10_formula(N: int) -> DiffOpForm:
    """``√N ∂_1 + (1/√N) Σ_{i≥2} i p_{i-1} ∂_i``."""
    form = DiffOpForm().add(ScaledRational(1, 1), None, {1: 1}, N=N)
    form.terms.extend(p_shift_sum(N, 0, True, ScaledRational(1, -1)).terms)
    return form


def t21_formula(N: int, k: int) -> DiffOpForm:
    """``(N(k+1) - k) t_{1,0} + (k+1)√N Σ_{i≥2} i p_{i-1} ∂_i`` (leading part, O(1/√N) dropped)."""
    form = DiffOpForm()
    for t in t10_formula(N).terms:
        form.terms.append(DiffOpTerm(ScaledRational(t.coef.value * (k + 1), t.coef.half_power_of_N + 2), t.mult, t.deriv))
        form.terms.append(DiffOpTerm(ScaledRational(-k * t.coef.value, t.coef.half_power_of_N), t.mult, t.deriv))
    form.terms.extend(p_shift_sum(N, 0, True, ScaledRational(k + 1, 1)).terms)
    return form


def t12_formula(N: int, k: int) -> DiffOpForm:
    """``(k+1)√N^3 p_1 - k√N p_1 + √N Σ_{i≥1} i p_{i+1} ∂_i``."""
    form = DiffOpForm()
    form.add(ScaledRational(k + 1, 3), {1: 1}, None, N=N)
    form.add(ScaledRational(-k, 1), {1: 1}, None, N=N)
    form.terms.extend(p_shift_sum(N, 0, False, ScaledRational(1, 1)).terms)
    return form


@dataclass
class FormulaComparison:
    """Normalized matrix minus a predicted form, reported per N.

    ``remainder_sq[N]`` is the largest squared entry of the remainder and
    ``exact[N]`` says whether the remainder vanishes identically.
    """

    label: str
    k: int
    E: int
    remainder_sq: Dict[int, Fraction]
    exact: Dict[int, bool]

    def to_json(self) -> dict:
        return {"label": self.label, "k": self.k, "E": self.E,
                "remainder_sq": {str(N): rational_to_str(v) for N, v in self.remainder_sq.items()},
                "exact": {str(N): v for N, v in self.exact.items()}}


def compare_with_form(m: int, n: int, N: int, k: int, E: int, form: DiffOpForm) -> Tuple[Fraction, bool, Dict]:
    """Largest squared entry of ``normalized(t_{m,n}) - form`` at this N (exact)."""
    M = rep_matrix(m, n, N, k, E)
    worst = Fraction(0)
    residual = {}
    for i, r in enumerate(M.rows):
        for j, c in enumerate(M.cols):
            q, rr = _normalized_at(M.entry(i, j), M.energy_shift, N)
            pq, pr = form.entry_at(r.c, c.c, N)
            if q and pq and rr != pr:
                raise ValueError("matrix entry and prediction have different √N parity")
            diff = q - pq
            if diff:
                parity = rr if q else pr
                sq = diff * diff * (N if parity else 1)
                residual[(r.c, c.c)] = (diff, parity)
                worst = max(worst, sq)
    return worst, not residual, residual


def formula_report(which: str, k: int, E: int, N_range: Iterable[int]) -> FormulaComparison:
    """Compare ``t_{1,0}``, ``t_{2,1}`` or ``t_{1,2}`` with its closed differential-operator form."""
    rem, exact = {}, {}
    for N in N_range:
        if which == "t10":
            form, mn = t10_formula(N), (1, 0)
        elif which == "t21":
            form, mn = t21_formula(N, k), (2, 1)
        elif which == "t12":
            form, mn = t12_formula(N, k), (1, 2)
        else:
            raise ValueError(which)
        worst, ok, _ = compare_with_form(*mn, N, k, E, form)
        rem[N], exact[N] = worst, ok
    return FormulaComparison(which, k, E, rem, exact)


# ---------------------------------------------------------------------------
# Large-N asymptotics
# ---------------------------------------------------------------------------


def _interpolate(xs: Sequence[int], ys: Sequence[Fraction]) -> List[Fraction]:
    """Coefficients (constant first) of the interpolating polynomial."""
    n = len(xs)
    A = [[Fraction(x) ** d for d in range(n)] for x in xs]
    return list(solve_exact(A, list(ys)).x)


def _eval(coeffs: Sequence[Fraction], x: int) -> Fraction:
    return sum(c * Fraction(x) ** d for d, c in enumerate(coeffs))


@dataclass
class AsymptoticReport:
    m: int
    n: int
    k: int
    E: int
    branch: str
    error_half_power: int
    scaled_residual: Dict[int, Fraction]
    decay_ok: bool
    interpolation: str
    leading_ok: Optional[bool]
    leading_details: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.decay_ok and self.leading_ok is not False

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "k": self.k, "E": self.E, "branch": self.branch,
                "error_half_power": self.error_half_power,
                "scaled_residual": {str(N): rational_to_str(v) for N, v in self.scaled_residual.items()},
                "decay_ok": self.decay_ok, "interpolation": self.interpolation,
                "leading_ok": self.leading_ok, "leading_details": self.leading_details, "passed": self.passed}


def branch_of(m: int, n: int) -> str:
    return "creation" if m < n else ("diagonal" if m == n else "annihilation")


def _leading_raw_degree(m: int, n: int) -> int:
    """Power of N carried by the leading raw entry."""
    return n + 1 if m == n else m


def _top_half(Ns: Sequence[int]) -> List[int]:
    Ns = sorted(Ns)
    return Ns[len(Ns) // 2:]


def _trim(c: Vector) -> Vector:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _pad(c: Vector, N: int) -> Vector:
    return tuple(c) + (0,) * (N - len(c))


def _energy(c: Vector) -> int:
    return sum((i + 1) * ci for i, ci in enumerate(c))


def _non_increasing(vals: Sequence[Fraction]) -> bool:
    return all(a >= b for a, b in zip(vals, vals[1:]))


def asymptotic_check(m: int, n: int, k: int, E: int, N_range: Sequence[int]) -> AsymptoticReport:
    """Check the large-N leading form of ``t_{m,n}`` on ``H^{≤E}``.

    For each N the normalized matrix minus the leading form is divided by
    the stated error order (``√N^{m+n-2}`` off the diagonal branch,
    ``√N^{2n}`` on it); the largest entry of the result must be
    non-increasing over the upper half of ``N_range``.  Where enough sample
    points exist, every raw entry is interpolated as a polynomial in N
    (validated on an extra point) and its top coefficient compared with the
    predicted one.
    """
    Ns = sorted(N_range)
    if any(N < E for N in Ns):
        raise ValueError("all N must satisfy N ≥ E")
    branch = branch_of(m, n)
    lead_hp = 2 * n + 2 if m == n else m + n
    err_hp = lead_hp - 2
    mats = {N: rep_matrix(m, n, N, k, E) for N in Ns}
    scaled = {}
    for N in Ns:
        M = mats[N]
        form = leading_diff_form(m, n, N, k)
        worst = Fraction(0)
        for i, r in enumerate(M.rows):
            for j, c in enumerate(M.cols):
                # (raw·N^{shift/2} − P·N^{lead/2}) / N^{err/2} is rational and equals N·(raw/N^d − P)
                pq, _ = form.entry_at(r.c, c.c, 1)  # coefficient of √N^{lead_hp}
                value = N * (M.entry(i, j) / Fraction(N) ** _leading_raw_degree(m, n) - pq)
                worst = max(worst, abs(value))
        scaled[N] = worst
    top = _top_half(Ns)
    decay_ok = _non_increasing([scaled[N] for N in top])

    # guarded interpolation of raw entries in N, restricted to entries whose
    # row and column energies are at most min(N) (the stable region)
    deg = max(m + n, _leading_raw_degree(m, n))
    details: List[str] = []
    if len(Ns) < deg + 2:
        interp, leading_ok = "insufficient-range", None
    else:
        fit_N, check_N = Ns[:deg + 1], Ns[deg + 1:]
        tables = {N: {(_trim(mats[N].rows[i].c), _trim(mats[N].cols[j].c)): v for (i, j), v in mats[N].raw.items()}
                  for N in Ns}
        stable = Ns[0]
        labels = sorted({key for tab in tables.values() for key in tab
                         if _energy(key[0]) <= stable and _energy(key[1]) <= stable})
        leading_ok, interp = True, "exact"
        lead_deg = _leading_raw_degree(m, n)
        N0 = Ns[0]
        for rc, cc in labels:
            ys = [tables[N].get((rc, cc), Fraction(0)) for N in Ns]
            coeffs = _interpolate(fit_N, ys[:deg + 1])
            if any(_eval(coeffs, N) != y for N, y in zip(check_N, ys[deg + 1:])):
                interp, leading_ok = "not-polynomial", None
                details.append(f"entry {rc}<-{cc} is not a degree-{deg} polynomial in N")
                break
            pred, _ = leading_diff_form(m, n, N0, k).entry_at(_pad(rc, N0), _pad(cc, N0), 1)
            got = coeffs[lead_deg] if lead_deg < len(coeffs) else Fraction(0)
            if any(coeffs[lead_deg + 1:]) or got != pred:
                leading_ok = False
                details.append(f"entry {rc}<-{cc}: N^{lead_deg} coefficient {got}, predicted {pred}")
        details.append(f"{len(labels)} stable entries interpolated")
    return AsymptoticReport(m, n, k, E, branch, err_hp, scaled, decay_ok, interp, leading_ok, details)


@dataclass
class CommutatorRateReport:
    generator: str
    m: int
    n: int
    k: int
    E: int
    error_half_power: int
    scaled_residual: Dict[int, Fraction]
    decay_ok: bool

    @property
    def passed(self) -> bool:
        return self.decay_ok

    def to_json(self) -> dict:
        return {"generator": self.generator, "m": self.m, "n": self.n, "k": self.k, "E": self.E,
                "error_half_power": self.error_half_power,
                "scaled_residual": {str(N): rational_to_str(v) for N, v in self.scaled_residual.items()},
                "decay_ok": self.decay_ok, "passed": self.passed}


def commutator_rate_check(generator: str, m: int, n: int, k: int, E: int, N_range: Sequence[int]) -> CommutatorRateReport:
    """Check ``[t_{2,1}, t_{m,n}] - (2n-m) t_{m+1,n}`` or ``[t_{1,2}, t_{m,n}] - (n-2m) t_{m,n+1}``.

    The residual (normalized basis) is divided by its stated order,
    ``√N^{m+n-1}`` in general and ``√N^{m+n+1}`` on the special line
    (m+1 = n for t_{2,1}, m = n+1 for t_{1,2}); the largest entry must be
    non-increasing over the upper half of ``N_range``.
    """
    if generator == "t21":
        g, target, coef = (2, 1), (m + 1, n), 2 * n - m
        special = m + 1 == n
    elif generator == "t12":
        g, target, coef = (1, 2), (m, n + 1), n - 2 * m
        special = m == n + 1
    else:
        raise ValueError("generator must be 't21' or 't12'")
    err_hp = m + n + 1 if special else m + n - 1
    shift = (g[1] - g[0]) + (n - m)
    scaled = {}
    for N in sorted(N_range):
        C = commutator_matrix(g, (m, n), N, k, E)
        Tm = rep_matrix(*target, N, k, E)
        tidx = {(Tm.rows[i].c, Tm.cols[j].c): v for (i, j), v in Tm.raw.items()}
        worst = Fraction(0)
        keys = {(C.rows[i].c, C.cols[j].c): v for (i, j), v in C.raw.items()}
        for key in set(keys) | set(tidx):
            raw = keys.get(key, Fraction(0)) - coef * tidx.get(key, Fraction(0))
            if not raw:
                continue
            # raw · N^{shift/2} / N^{err/2}; shift − err is even by construction
            val = abs(raw) * Fraction(N) ** ((shift - err_hp) // 2)
            worst = max(worst, val)
        scaled[N] = worst
    top = _top_half(sorted(N_range))
    return CommutatorRateReport(generator, m, n, k, E, err_hp, scaled, _non_increasing([scaled[N] for N in top]))


# ---------------------------------------------------------------------------
# Rescaled operators and the current algebra
# ---------------------------------------------------------------------------


def rescaled_entry(M: RepMatrix, i: int, j: int, m: int, n: int) -> Fraction:
    """Entry of ``((k+1)N)^{-(m+n+2δ)/2} t_{m,n}`` in the basis ``((k+1)N)^{-E/2}|c⟩`` (rational)."""
    delta = 1 if m == n else 0
    return M.entry(i, j) / Fraction((M.k + 1) * M.N) ** (m + delta)


@dataclass
class CurrentAlgebraReport:
    k: int
    E: int
    central_charge_target: Fraction
    diagonal_residual: Dict[int, Dict[int, Fraction]]
    commutator_residual: Dict[Tuple[int, int, int], Dict[int, Fraction]]
    decay_ok: bool
    details: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.decay_ok

    def to_json(self) -> dict:
        return {
            "k": self.k, "E": self.E, "c": rational_to_str(self.central_charge_target),
            "diagonal_residual": {str(n): {str(N): rational_to_str(v) for N, v in d.items()}
                                  for n, d in self.diagonal_residual.items()},
            "commutator_residual": {f"{a},{b},{n}": {str(N): rational_to_str(v) for N, v in d.items()}
                                    for (a, b, n), d in self.commutator_residual.items()},
            "decay_ok": self.decay_ok, "details": self.details, "passed": self.passed,
        }


def _inverse_N_certificate(tables: Dict[int, Dict[Tuple[Vector, Vector], Fraction]], s: int, k: int,
                           target: Fraction) -> Tuple[Optional[bool], str]:
    """Exact O(1/N) certificate for ``raw/((k+1)N)^s - target·δ``.

    Each stable raw entry is interpolated as a polynomial in N of degree s
    and validated on the remaining sample points.  The residual is O(1/N)
    exactly when the ``N^s`` coefficient equals ``target·(k+1)^s`` on the
    diagonal and vanishes off it.
    """
    Ns = sorted(tables)
    if len(Ns) < s + 2:
        return None, "insufficient-range"
    stable = Ns[0]
    labels = sorted({key for tab in tables.values() for key in tab
                     if _energy(key[0]) <= stable and _energy(key[1]) <= stable})
    for rc, cc in labels:
        ys = [tables[N].get((rc, cc), Fraction(0)) for N in Ns]
        coeffs = _interpolate(Ns[:s + 1], ys[:s + 1])
        if any(_eval(coeffs, N) != y for N, y in zip(Ns[s + 1:], ys[s + 1:])):
            return None, f"entry {rc}<-{cc} is not a degree-{s} polynomial in N"
        want = target * (k + 1) ** s if rc == cc else Fraction(0)
        if coeffs[s] != want:
            return False, (f"entry {rc}<-{cc}: limit {coeffs[s] / (k + 1) ** s}, "
                           f"expected {want / (k + 1) ** s}")
    return True, f"{len(labels)} entries certified O(1/N)"


def _trimmed_table(M: RepMatrix) -> Dict[Tuple[Vector, Vector], Fraction]:
    return {(_trim(M.rows[i].c), _trim(M.cols[j].c)): v for (i, j), v in M.raw.items()}


def _sup_residual(M: RepMatrix, s: int, target: Fraction) -> Fraction:
    scale = Fraction((M.k + 1) * M.N) ** s
    rindex = M.row_index()
    worst = Fraction(0)
    for j, col in enumerate(M.cols):
        i_diag = rindex.get(col.c)
        for i in range(len(M.rows)):
            v = M.entry(i, j) / scale - (target if i == i_diag else 0)
            worst = max(worst, abs(v))
    return worst


@dataclass
class LimitSeries:
    """Sup-norm residuals of one rescaled quantity plus its O(1/N) certificate."""

    residual: Dict[int, Fraction]
    certified: Optional[bool]
    note: str

    @property
    def ok(self) -> bool:
        top = _top_half(sorted(self.residual))
        return bool(self.certified) and _non_increasing([self.residual[N] for N in top])


def _limit_series(mats: Dict[int, RepMatrix], s: int, k: int, target: Fraction) -> LimitSeries:
    res = {N: _sup_residual(M, s, target) for N, M in mats.items()}
    cert, note = _inverse_N_certificate({N: _trimmed_table(M) for N, M in mats.items()}, s, k, target)
    return LimitSeries(res, cert, note)


def current_algebra_report(k: int, E: int, N_range: Sequence[int], n_max: int = 2) -> CurrentAlgebraReport:
    """Rescaled large-N limits on ``H^{≤E}``.

    Checks ``(n+1) t̃_{n,n} → 1/(k+1)`` for n ≤ n_max and
    ``[t̃_{b+n,b}, t̃_{a,a+n}] → (n/(k+1))·1`` for 1 ≤ n ≤ n_max (lowering
    operator first, so the limit is ``[α̃_n, α̃_{-n}] = c·n``).  Each sup-norm
    residual must shrink over the upper half of the range and carry an exact
    O(1/N) certificate.
    """
    if E < 3:
        raise ValueError("current_algebra_report needs E ≥ 3")
    c = Fraction(1, k + 1)
    Ns = sorted(N_range)
    diag: Dict[int, Dict[int, Fraction]] = {}
    comm: Dict[Tuple[int, int, int], Dict[int, Fraction]] = {}
    details: List[str] = []
    ok = True
    for n in range(0, n_max + 1):
        mats = {N: rep_matrix(n, n, N, k, E) for N in Ns}
        # (n+1)·raw/((k+1)N)^{n+1} → c is the same as raw/((k+1)N)^{n+1} → c/(n+1)
        ser = _limit_series(mats, n + 1, k, c / (n + 1))
        diag[n] = {N: (n + 1) * v for N, v in ser.residual.items()}
        details.append(f"(n+1) t~[{n},{n}]: {ser.note}")
        ok = ok and ser.ok
    for n in range(1, n_max + 1):
        for a, b in [(0, 0), (1, 0), (0, 1)]:
            mats = {N: commutator_matrix((b + n, b), (a, a + n), N, k, E) for N in Ns}
            ser = _limit_series(mats, a + b + n, k, Fraction(n, k + 1))
            comm[(a, b, n)] = ser.residual
            details.append(f"[t~[{b + n},{b}], t~[{a},{a + n}]]: {ser.note}")
            ok = ok and ser.ok
    return CurrentAlgebraReport(k, E, c, diag, comm, ok, details)


def export_csv(m: int, n: int, k: int, E: int, N: int) -> str:
    """CSV dump of ``t_{m,n}`` with the leading-form prediction and residual per entry."""
    M = rep_matrix(m, n, N, k, E)
    return M.to_csv(m, n, leading_diff_form(m, n, N, k))
