"""Ground-state moments: Catalan limits, the ``t_{1,2}`` ground identity,
the moment recursion and the filling factor.

Expectation values are exact rationals.  With the diagram engine the
expectation of an operator is read off as the coefficient of the ground
state in the ground-energy component of ``op|ground⟩``; that sector is one
dimensional (p = 1, or p > 1 with N divisible by p) and states of other
energies are orthogonal to it.  The Fock engine computes the same number
through inner products and serves as a cross-check.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence

from . import diagrams as dg
from . import fock
from .exact import rational_to_str
from .fock import ModelParams
from .observables import E, GaugeOpSpec, OpEvaluator, T, Commutator, ScalarMul, Sum, apply_op, physical_spanning_set


def _term_energy(term) -> int:
    loops, cs = term
    return sum(loops) + sum(n for C in cs for n, _ in C)


def expectation(op: GaugeOpSpec, params: ModelParams, engine: str = "diagram",
                evaluator: Optional[OpEvaluator] = None) -> Fraction:
    """``⟨g|op|g⟩ / ⟨g|g⟩`` on the ground state (exact)."""
    if engine == "fock":
        g = fock.ground_state(params)
        return fock.inner_product(g, apply_op(op, g, evaluator)) / fock.inner_product(g, g)
    if engine != "diagram":
        raise ValueError(f"unknown engine {engine!r}")
    g = dg.ground_diagram(params)
    out = apply_op(op, g, evaluator)
    e0 = min(g.energies())
    comp = dg.DiagramState(params, {t: v for t, v in out.terms.items() if _term_energy(t) == e0})
    if not comp.terms:
        return Fraction(0)
    r = dg.ratio_to(comp, g)
    if r is None:
        raise ValueError("ground-energy sector is not one dimensional for these parameters")
    return r


def moment(n: int, params: ModelParams, evaluator: Optional[OpEvaluator] = None) -> Fraction:
    """``d(n) = ⟨t_{n,n}⟩`` on the normalized ground state."""
    return expectation(T(n, n), params, evaluator=evaluator)


def rescaled_moment(n: int, d: Fraction, N: int, p: int, k: int) -> Fraction:
    """``(n+1)·t̃_{n,n}`` expectation: ``(n+1)·d·(p/((k+p)N))^{n+1}``."""
    return (n + 1) * d * Fraction(p, (k + p) * N) ** (n + 1)


# ---------------------------------------------------------------------------
# C/N decay test
# ---------------------------------------------------------------------------


def _top_half(Ns: Sequence[int]) -> List[int]:
    Ns = sorted(Ns)
    return Ns[len(Ns) // 2:]


def _non_increasing(vals: Sequence[Fraction]) -> bool:
    return all(b <= a for a, b in zip(vals, vals[1:]))


def inverse_N_decay(residual: Dict[int, Fraction]) -> bool:
    """Exact heuristic for ``r_N = C/N + O(1/N²)`` over the upper half of the range.

    Requires ``|r_N|`` non-increasing and ``N²·|Δ(N·r_N)|`` non-increasing,
    where Δ is the difference between consecutive sample points.  The second
    condition says ``N·r_N`` settles with increments of order ``1/N²``.
    """
    top = _top_half(residual)
    if len(top) < 3:
        return False
    if not _non_increasing([abs(residual[N]) for N in top]):
        return False
    s = {N: N * residual[N] for N in top}
    incs = [abs(s[b] - s[a]) * b * b for a, b in zip(top, top[1:])]
    return _non_increasing(incs)


# ---------------------------------------------------------------------------
# Catalan limits
# ---------------------------------------------------------------------------


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


@dataclass
class MomentReport:
    """Ground moments ``d(n)``, their rescaled values and residuals to ``p/(k+p)``."""

    p: int
    k: int
    n_max: int
    N_range: List[int]
    values: Dict[int, Dict[int, Fraction]]
    rescaled: Dict[int, Dict[int, Fraction]]
    residual: Dict[int, Dict[int, Fraction]]
    decay_ok: Dict[int, bool]
    d0_ok: bool
    positive: bool
    B_field: Fraction = Fraction(1)

    @property
    def limit(self) -> Fraction:
        return Fraction(self.p, self.k + self.p)

    @property
    def passed(self) -> bool:
        return self.d0_ok and self.positive and all(self.decay_ok.values())

    def to_json(self) -> dict:
        def fmt(d):
            return {str(n): {str(N): rational_to_str(v) for N, v in row.items()} for n, row in d.items()}
        return {
            "p": self.p, "k": self.k, "n_max": self.n_max, "N_range": self.N_range,
            "limit": rational_to_str(self.limit), "B_field": rational_to_str(self.B_field),
            "values": fmt(self.values), "rescaled": fmt(self.rescaled), "residual": fmt(self.residual),
            "decay_ok": {str(n): v for n, v in self.decay_ok.items()},
            "d0_ok": self.d0_ok, "positive": self.positive, "passed": self.passed,
        }

    def to_csv(self) -> str:
        """Resolvent coefficient table: one row per (n, N)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "catalan", "target_limit", "N", "moment", "rescaled", "residual", "residual_float"])
        for n in sorted(self.values):
            for N in sorted(self.values[n]):
                w.writerow([n, catalan(n), rational_to_str(Fraction(1, n + 1)), N,
                            rational_to_str(self.values[n][N]), rational_to_str(self.rescaled[n][N]),
                            rational_to_str(self.residual[n][N]), f"{float(self.residual[n][N]):.6g}"])
        return buf.getvalue()


def catalan_check(k: int, n_max: int, N_range: Sequence[int], p: int = 1, B: Fraction = Fraction(1)) -> MomentReport:
    """Check ``(n+1)·t̃_{n,n} → p/(k+p)`` with C/N residual decay for 1 ≤ n ≤ n_max.

    In the unrescaled form this is ``(n+1)·d(n)·(p/((k+p)N))^n / N → 1``:
    the limits ``1/(n+1) = C_n / binom(2n, n)`` are the Catalan moments.
    For p > 1 only N divisible by p are sampled.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    Ns = sorted(N for N in N_range if N % p == 0)
    ev = OpEvaluator()
    values: Dict[int, Dict[int, Fraction]] = {n: {} for n in range(n_max + 1)}
    for N in Ns:
        params = ModelParams(N, p, k)
        for n in range(n_max + 1):
            values[n][N] = moment(n, params, ev)
        ev.clear()
    rescaled = {n: {N: rescaled_moment(n, v, N, p, k) for N, v in row.items()} for n, row in values.items()}
    lim = Fraction(p, k + p)
    residual = {n: {N: v - lim for N, v in row.items()} for n, row in rescaled.items()}
    decay_ok = {n: inverse_N_decay(residual[n]) for n in range(1, n_max + 1)}
    d0_ok = all(values[0][N] == N for N in Ns)
    positive = all(v > 0 for row in values.values() for v in row.values())
    return MomentReport(p, k, n_max, Ns, values, rescaled, residual, decay_ok, d0_ok, positive, Fraction(B))


# ---------------------------------------------------------------------------
# Exact ground identities
# ---------------------------------------------------------------------------


@dataclass
class GroundIdentityReport:
    p: int
    M: int
    k: int
    factor: int
    residual_zero: bool
    witness: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.residual_zero

    def to_json(self) -> dict:
        return {"p": self.p, "M": self.M, "k": self.k, "N": self.p * self.M, "factor": self.factor,
                "residual_zero": self.residual_zero, "witness": self.witness, "passed": self.passed}


def lemma_c1_check(p: int, M: int, k: int) -> GroundIdentityReport:
    """``t_{1,2}|g⟩ = (k(M−1)+N)·t_{0,1}|g⟩`` on the ground state with N = pM."""
    if p < 1 or M < 1:
        raise ValueError("p and M must be positive")
    N = p * M
    params = ModelParams(N, p, k)
    factor = k * (M - 1) + N
    g = dg.ground_diagram(params)
    res = apply_op(T(1, 2), g) - apply_op(T(0, 1), g).scale(factor)
    zero = dg.is_zero(res)
    witness = None
    if not zero:
        witness = f"nonzero residual with {len(res.terms)} diagram terms"
    return GroundIdentityReport(p, M, k, factor, zero, witness)


@dataclass
class RecursionReport:
    """Residual ``(k(M−1)+N)(n+1)d(n) − (n+2)d(n+1)`` relative to ``N^{n+2}``."""

    p: int
    k: int
    n_max: int
    moments: Dict[int, Dict[int, Fraction]]
    scaled_residual: Dict[int, Dict[int, Fraction]]
    d0_ok: bool
    decay_ok: Dict[int, bool]

    @property
    def passed(self) -> bool:
        return self.d0_ok and all(self.decay_ok.values())

    def to_json(self) -> dict:
        return {
            "p": self.p, "k": self.k, "n_max": self.n_max,
            "moments": {str(n): {str(N): rational_to_str(v) for N, v in r.items()} for n, r in self.moments.items()},
            "scaled_residual": {str(n): {str(N): rational_to_str(v) for N, v in r.items()}
                                for n, r in self.scaled_residual.items()},
            "d0_ok": self.d0_ok, "decay_ok": {str(n): v for n, v in self.decay_ok.items()}, "passed": self.passed,
        }


def prop_c2_recursion_check(p: int, k: int, M_range: Sequence[int], n_max: int) -> RecursionReport:
    """Check that the moment recursion holds to leading order in N.

    The residual divided by ``N^{n+2}`` (the order of each side) must shrink
    strictly in absolute value over the upper half of the sampled N = pM, or
    vanish identically.
    """
    Ms = sorted(M_range)
    ev = OpEvaluator()
    mom: Dict[int, Dict[int, Fraction]] = {n: {} for n in range(n_max + 2)}
    for M in Ms:
        N = p * M
        params = ModelParams(N, p, k)
        for n in range(n_max + 2):
            mom[n][N] = moment(n, params, ev)
        ev.clear()
    scaled: Dict[int, Dict[int, Fraction]] = {}
    decay: Dict[int, bool] = {}
    for n in range(n_max + 1):
        scaled[n] = {}
        for M in Ms:
            N = p * M
            r = (k * (M - 1) + N) * (n + 1) * mom[n][N] - (n + 2) * mom[n + 1][N]
            scaled[n][N] = r / Fraction(N) ** (n + 2)
        vals = [abs(scaled[n][N]) for N in _top_half([p * M for M in Ms])]
        decay[n] = all(v == 0 for v in vals) or (len(vals) >= 2 and all(b < a for a, b in zip(vals, vals[1:])))
    d0_ok = all(mom[0][p * M] == p * M for M in Ms)
    return RecursionReport(p, k, n_max, mom, scaled, d0_ok, decay)


# ---------------------------------------------------------------------------
# Filling factor
# ---------------------------------------------------------------------------


def filling_factor_report(p: int, k: int, B: Fraction = Fraction(1),
                          moments_report: Optional[MomentReport] = None) -> dict:
    """Droplet radius, flux count and filling factor from the moment limit.

    ``R² = 2(k+p)N/(pB)``, ``N_B = (k+p)N/p`` and ``ν = N/N_B = p/(k+p)``.
    The result is conditional on the moment checks; pass their report to
    record whether that condition holds.
    """
    B = Fraction(B)
    if B <= 0:
        raise ValueError("B must be positive")
    if p < 1 or k < 0:
        raise ValueError("need p ≥ 1 and k ≥ 0")
    cond = None if moments_report is None else moments_report.passed
    return {
        "p": p, "k": k, "B": rational_to_str(B),
        "R_squared_per_N": rational_to_str(Fraction(2 * (k + p), p) / B),
        "N_B_per_N": rational_to_str(Fraction(k + p, p)),
        "nu": rational_to_str(Fraction(p, k + p)),
        "status": "derived, conditional on catalan_check pass",
        "condition_met": cond,
    }


# ---------------------------------------------------------------------------
# Exploratory probe for p > 1
# ---------------------------------------------------------------------------


def _J(a: int, b: int, n: int, m: int, p: int, k: int) -> GaugeOpSpec:
    """``J^a_{b;n,m} = e^a_{b;n,m} − (ε₃/p) δ^a_b t_{n,m}`` with ε₃ = k."""
    if a != b:
        return E(a, b, n, m)
    return Sum((E(a, b, n, m), ScalarMul(Fraction(-k, p), T(n, m))))


def conjecture_probe_p2(p: int, k: int, M_range: Sequence[int], E_max: int = 1, n_max: int = 2) -> dict:
    """Trend tables for rescaled ground moments and flavor-current matrix elements.

    For each N = pM this records ``(n+1)·t̃_{n,n}`` against ``p/(k+p)`` and,
    on the physical spanning set of energy ≤ E_max, the ratio of
    ``[J^1_{2;1,0}, J^2_{1;0,1}]`` to N when the image is proportional to the
    input state (None otherwise).  No pass/fail is attached.
    """
    if p < 2:
        raise ValueError("the probe is meant for p ≥ 2")
    rows = []
    op = Commutator(_J(1, 2, 1, 0, p, k), _J(2, 1, 0, 1, p, k))
    for M in sorted(M_range):
        N = p * M
        params = ModelParams(N, p, k)
        ev = OpEvaluator()
        resc = {str(n): rational_to_str(rescaled_moment(n, moment(n, params, ev), N, p, k))
                for n in range(1, n_max + 1)}
        ratios = []
        for st in physical_spanning_set(params, E_max):
            r = dg.ratio_to(apply_op(op, st, ev), st)
            ratios.append(None if r is None else rational_to_str(r / N))
        rows.append({"M": M, "N": N, "rescaled_moments": resc, "current_ratio_over_N": ratios})
    return {"p": p, "k": k, "target": rational_to_str(Fraction(p, k + p)), "E_max": E_max, "rows": rows}
