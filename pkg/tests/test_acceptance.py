"""Acceptance suite: nine end-to-end criteria at their full parameter windows.

Each test prints one ``[i] <title>: PASS|FAIL`` line (also repeated in the
pytest terminal summary) and then asserts.  Run directly with
``python3 tests/test_acceptance.py`` to get only the summary lines.
"""
from __future__ import annotations

import sys
import time
from fractions import Fraction
from typing import Dict, List, Tuple

import pytest

from csmm import ddca as dd
from csmm import hilbert as hb
from csmm import moments as mo
from csmm.fock import ModelParams
from csmm.observables import OpEvaluator, physical_spanning_set, verify_relation
from csmm.relations import FAMILIES, T_FAMILIES, relation_instances
from csmm.symfun import CLabel, character_orthogonality, mn_expand, power_times_c

from oracles import (bounded_partition_count, partitions_of, power_times_alternant, power_times_schur)

RELATION_PARAMS = [(2, 1, 1), (3, 1, 1), (3, 1, 2), (2, 2, 1), (4, 2, 1)]

RESULTS: Dict[int, Tuple[str, bool, str]] = {}
_ENGINES: Dict[int, dd.DDCA] = {}


def _engine(p: int) -> dd.DDCA:
    if p not in _ENGINES:
        _ENGINES[p] = dd.DDCA(p)
    return _ENGINES[p]


def summary_line(num: int) -> str:
    title, passed, detail = RESULTS[num]
    return f"[{num}] {title}: {'PASS' if passed else 'FAIL'} ({detail})"


def _record(num: int, title: str, failures: List[str], started: float) -> None:
    passed = not failures
    detail = f"{time.perf_counter() - started:.1f}s"
    if failures:
        detail += "; " + "; ".join(failures[:6]) + (f"; +{len(failures) - 6} more" if len(failures) > 6 else "")
    RESULTS[num] = (title, passed, detail)
    print(summary_line(num))
    assert passed, summary_line(num)


def test_relation_families_exact():
    started = time.perf_counter()
    failures = []
    for N, p, k in RELATION_PARAMS:
        params = ModelParams(N, p, k)
        states = physical_spanning_set(params, 4)
        ev = OpEvaluator()
        for fam in FAMILIES:
            for inst in relation_instances(fam, p, 4 if fam in T_FAMILIES else 3):
                if not verify_relation(inst, params, states, ev).passed:
                    failures.append(f"{inst.label()} at {(N, p, k)}")
    _record(1, "relation families exact on physical spanning sets", failures, started)


def test_trace_basis_dimension_and_gram():
    started = time.perf_counter()
    failures = []
    E = 4
    for N, k in [(3, 1), (4, 1), (3, 2)]:
        basis = hb.basis_states(N, k, E)
        want = sum(bounded_partition_count(e, N) for e in range(E + 1))
        if len(basis) != want or hb.basis_dimension(N, E) != want:
            failures.append(f"dim at N={N}: {len(basis)} vs {want}")
        if N >= E and want != 12:
            failures.append(f"dim at N={N} is {want}, expected 12")
        if hb.gram_determinant(basis, ModelParams(N, 1, k)) == 0:
            failures.append(f"singular Gram matrix at (N,k)=({N},{k})")
    for e_cap in range(E + 1):
        dims = {hb.basis_dimension(N, e_cap) for N in range(max(e_cap, 1), e_cap + 5)}
        if len(dims) != 1:
            failures.append(f"dimension not stable for E={e_cap}: {sorted(dims)}")
    _record(2, "trace basis: dimension, stability and nonsingular Gram", failures, started)


def test_large_N_leading_forms():
    started = time.perf_counter()
    failures = []
    Ns = list(range(4, 9))
    pairs = [(m, s - m) for s in range(4) for m in range(s + 1)]
    for k in (1, 2):
        for m, n in pairs:
            rep = hb.asymptotic_check(m, n, k, 4, Ns)
            if not rep.passed:
                tail = {N: float(rep.scaled_residual[N]) for N in (6, 7, 8)}
                failures.append(f"t[{m},{n}] k={k} {rep.branch}: decay {rep.decay_ok}, leading {rep.leading_ok}, "
                                f"scaled residual {tail}")
        for gen in ("t21", "t12"):
            for m, n in pairs:
                rep = hb.commutator_rate_check(gen, m, n, k, 4, Ns)
                if not rep.passed:
                    tail = {N: float(rep.scaled_residual[N]) for N in (6, 7, 8)}
                    failures.append(f"[{gen}, t[{m},{n}]] k={k}: scaled residual {tail}")
    _record(3, "large-N leading forms and commutator rates", failures, started)


def test_representation_formulas():
    started = time.perf_counter()
    failures = []
    for k in (1, 2):
        for E in range(5):
            rep = hb.formula_report("t10", k, E, range(3, 7))
            if not all(rep.exact.values()):
                failures.append(f"t10 not exact at k={k}, E={E}")
        for which in ("t21", "t12"):
            # the remainder's squared sup norm must fall like 1/N once N ≥ E
            rep = hb.formula_report(which, k, 4, range(4, 7))
            scaled = [N * rep.remainder_sq[N] for N in sorted(rep.remainder_sq)]
            if not all(a >= b for a, b in zip(scaled, scaled[1:])):
                failures.append(f"{which} k={k}: N*|R|^2 = {[str(v) for v in scaled]}")
    _record(4, "closed forms of t10, t21, t12", failures, started)


def test_border_strip_rule():
    started = time.perf_counter()
    failures = []
    for total in range(1, 8):
        for n in range(1, total + 1):
            for mu in partitions_of(total - n):
                if mn_expand(n, mu) != power_times_schur(n, mu):
                    failures.append(f"p_{n} * s_{mu}")
    want = {CLabel((0, 2, 3)): -1, CLabel((0, 1, 4)): 1}
    if power_times_c(2, CLabel((0, 1, 2))) != want:
        failures.append("Tr(Z†²)·C(0,1,2) example")
    oracle = {CLabel(e): c for e, c in power_times_alternant(2, (0, 1, 2)).items()}
    if oracle != want:
        failures.append("Tr(Z†²)·C(0,1,2) disagrees with the alternant oracle")
    for n in range(1, 6):
        if not character_orthogonality(n):
            failures.append(f"orthogonality for S_{n}")
    _record(5, "border-strip rule, worked example, character orthogonality", failures, started)


def test_large_N_commutator_table():
    started = time.perf_counter()
    failures = []
    for p in (1, 2):
        eng = _engine(p)
        table = dd.build_table(p, 6, eng)
        for check in (dd.antisymmetry_check(eng, table), dd.jacobi_check(eng, p, 6)):
            if not check.passed:
                failures.append(f"{check.name} p={p}: {check.failures[:2]}")
        for g1, g2 in sorted(k for k, tag in table.provenance.items() if tag == "derived"):
            rep = dd.leading_check(g1, g2, eng)
            if not rep.passed:
                failures.append(f"leading law {rep.pair}")
        for N, pp, k in RELATION_PARAMS:
            if pp != p:
                continue
            params = ModelParams(N, p, k)
            rep = dd.finite_N_check(eng, params, physical_spanning_set(params, 4), 5)
            if not rep.passed:
                failures.append(f"{rep.name}: {rep.failures[:2]}")
    _record(6, "commutator table: antisymmetry, Jacobi, leading law, finite N", failures, started)


def test_scaling_limit_lie_algebra():
    started = time.perf_counter()
    failures = []
    for p in (1, 2, 3):
        rep = dd.lie_jacobi_check(p, 4)
        if not rep.passed:
            failures.append(f"Lie Jacobi p={p}: {rep.failures[:2]}")
        aff = dd.affine_map_check(p, 4)
        if not aff.passed:
            failures.append(f"affine map p={p}: {aff.failures[:2]} levels {aff.sl_level}, {aff.u1_level}")
    for p in (1, 2):
        deg = dd.degeneration_check(p, 3, _engine(p))
        if not deg.passed:
            failures.append(f"degeneration p={p}: {deg.failures[:2]}")
    _record(7, "scaling-limit Lie algebra, affine map, table degeneration", failures, started)


def test_ground_state_moments():
    started = time.perf_counter()
    failures = []
    for p, M, k in [(1, 3, 1), (2, 2, 1), (2, 3, 1), (3, 2, 1)]:
        if not mo.lemma_c1_check(p, M, k).passed:
            failures.append(f"t12 ground identity at (p,M,k)=({p},{M},{k})")
        if mo.moment(0, ModelParams(p * M, p, k)) != p * M:
            failures.append(f"d(0) != N at (p,M,k)=({p},{M},{k})")
    for k in (1, 2):
        rep = mo.catalan_check(k, 3, range(2, 9))
        if not rep.passed:
            failures.append(f"Catalan limits k={k}: decay {rep.decay_ok}, d0 {rep.d0_ok}")
        ff = mo.filling_factor_report(1, k, Fraction(1), rep)
        if ff["condition_met"] is not True or ff["nu"] != str(Fraction(1, k + 1)):
            failures.append(f"filling factor k={k}: {ff['nu']}, condition {ff['condition_met']}")
    _record(8, "ground-state identities, Catalan limits, filling factor", failures, started)


def test_current_algebra_emergence():
    started = time.perf_counter()
    rep = hb.current_algebra_report(1, 4, range(4, 9), n_max=2)
    failures = [] if rep.passed else [d for d in rep.details if "certified" not in d] or ["residual not decaying"]
    _record(9, "rescaled commutators converge to the u(1) current algebra", failures, started)


if __name__ == "__main__":
    tests = [test_relation_families_exact, test_trace_basis_dimension_and_gram, test_large_N_leading_forms,
             test_representation_formulas, test_border_strip_rule, test_large_N_commutator_table,
             test_scaling_limit_lie_algebra, test_ground_state_moments, test_current_algebra_emergence]
    ok = True
    for t in tests:
        try:
            t()
        except AssertionError:
            ok = False
    sys.exit(0 if ok else 1)
