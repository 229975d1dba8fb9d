from __future__ import annotations

from fractions import Fraction

import pytest

from csmm import hilbert as hb
from csmm.exact import ScaledRational
from csmm.fock import FockPolynomial, ModelParams
from csmm.observables import T, apply_op

from oracles import bounded_partition_count


@pytest.mark.parametrize("N,E,expected", [(5, 4, 12), (4, 4, 12), (2, 3, 6), (3, 2, 4), (1, 3, 4)])
def test_basis_dimension_matches_bounded_partitions(N, E, expected):
    assert hb.basis_dimension(N, E) == expected
    assert expected == sum(bounded_partition_count(e, N) for e in range(E + 1))
    assert len(hb.basis_states(N, 1, E)) == expected


def test_basis_state_labels_and_energy():
    b = hb.BasisState((2, 0, 1))
    assert b.energy == 5 and b.N == 3
    assert b.label() == "p1^2*p3"
    assert hb.BasisState((0, 0)).label() == "1"
    with pytest.raises(ValueError):
        hb.basis_states(0, 1, 2)


@pytest.mark.parametrize("N,k,E", [(3, 1, 3), (2, 2, 2)])
def test_gram_matrix_nonsingular_and_symmetric(N, k, E):
    basis = hb.basis_states(N, k, E)
    G = hb.gram_matrix(basis, ModelParams(N, 1, k))
    assert all(G[i][j] == G[j][i] for i in range(len(G)) for j in range(len(G)))
    assert hb.gram_determinant(basis, ModelParams(N, 1, k)) != 0


def test_express_in_basis_round_trip_for_both_engines():
    P = ModelParams(3, 1, 1)
    basis = hb.basis_states(3, 1, 3)
    coeffs = [Fraction(i + 1, 3) if i % 2 else Fraction(0) for i in range(len(basis))]
    fock = FockPolynomial.zero(P)
    for c, b in zip(coeffs, basis):
        fock = fock + b.realize_fock(P).scale(c)
    assert hb.express_in_basis(fock, basis) == coeffs
    diagram = apply_op(T(0, 1), basis[2].realize(P))
    x = hb.express_in_basis(diagram, basis)
    assert sum(1 for v in x if v) == 1


def test_express_in_basis_rejects_states_outside_the_span():
    P = ModelParams(3, 1, 1)
    small = hb.basis_states(3, 1, 1)
    big = hb.basis_states(3, 1, 2)[-1].realize(P)
    with pytest.raises(hb.OutsideSpanError):
        hb.express_in_basis(big, small)
    with pytest.raises(hb.OutsideSpanError):
        hb.express_in_basis(big.to_fock(), small)


def test_t01_is_multiplication_by_p1():
    M = hb.rep_matrix(0, 1, 3, 1, 3)
    assert M.energy_shift == 1
    idx = M.row_index()
    for j, col in enumerate(M.cols):
        target = (col.c[0] + 1,) + col.c[1:]
        for i in range(len(M.rows)):
            assert M.entry(i, j) == (1 if i == idx[target] else 0)


@pytest.mark.parametrize("k", [1, 2])
def test_t10_formula_is_exact(k):
    rep = hb.formula_report("t10", k, 3, [3, 4, 5])
    assert all(rep.exact.values())
    assert all(v == 0 for v in rep.remainder_sq.values())


def test_t21_and_t12_remainders_shrink():
    for which in ("t21", "t12"):
        rep = hb.formula_report(which, 1, 2, [3, 4, 5, 6])
        vals = [N * rep.remainder_sq[N] for N in sorted(rep.remainder_sq)]
        assert all(a >= b for a, b in zip(vals, vals[1:])), (which, vals)
    with pytest.raises(ValueError):
        hb.formula_report("t33", 1, 2, [3])


def test_diff_op_form_entries():
    f = hb.t10_formula(4)
    # √N ∂_1 on p_1 gives √N
    assert f.entry_at((0, 0, 0, 0), (1, 0, 0, 0), 4) == (Fraction(1), 1)
    # (1/√N)·2 p_1 ∂_2 on p_2 gives 2/√N = (1/2)·√N at N = 4 in the ledger form
    q, r = f.entry_at((1, 0, 0, 0), (0, 1, 0, 0), 4)
    assert ScaledRational(2, -1).at(4) == (q, r)


def test_branch_names():
    assert hb.branch_of(0, 1) == "creation"
    assert hb.branch_of(2, 2) == "diagonal"
    assert hb.branch_of(2, 1) == "annihilation"


def test_asymptotic_check_creation_and_annihilation():
    rep = hb.asymptotic_check(0, 1, 1, 3, [3, 4, 5, 6])
    assert rep.passed and rep.leading_ok
    rep = hb.asymptotic_check(1, 0, 1, 3, [3, 4, 5, 6])
    assert rep.decay_ok
    assert rep.to_json()["branch"] == "annihilation"
    with pytest.raises(ValueError):
        hb.asymptotic_check(1, 1, 1, 4, [3, 4])


def test_commutator_rate_check_runs():
    rep = hb.commutator_rate_check("t21", 0, 1, 1, 2, [3, 4, 5, 6])
    assert rep.error_half_power == 2
    assert set(rep.scaled_residual) == {3, 4, 5, 6}
    with pytest.raises(ValueError):
        hb.commutator_rate_check("t33", 0, 1, 1, 2, [3])


def test_current_algebra_small_window():
    rep = hb.current_algebra_report(1, 3, [3, 4, 5, 6], n_max=1)
    assert rep.passed, rep.details
    assert rep.central_charge_target == Fraction(1, 2)
    with pytest.raises(ValueError):
        hb.current_algebra_report(1, 2, [3, 4])


def test_export_csv_header():
    text = hb.export_csv(1, 0, 1, 2, 3)
    assert text.splitlines()[0].split(",")[:6] == ["m", "n", "k", "E", "N", "row_state"]
