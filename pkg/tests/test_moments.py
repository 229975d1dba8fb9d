from __future__ import annotations

import json
from fractions import Fraction

import pytest

from csmm import moments as mo
from csmm.fock import ModelParams
from csmm.observables import T

from oracles import catalan, single_oscillator_sym11_vacuum


@pytest.mark.parametrize("k", [1, 2])
def test_single_matrix_site_matches_one_oscillator(k):
    assert mo.moment(1, ModelParams(1, 1, k)) == single_oscillator_sym11_vacuum()


@pytest.mark.parametrize("N,p,k", [(3, 1, 1), (2, 1, 2), (2, 2, 1)])
def test_zeroth_moment_is_N_and_t01_vanishes(N, p, k):
    P = ModelParams(N, p, k)
    assert mo.moment(0, P) == N
    assert mo.expectation(T(0, 1), P) == 0
    assert mo.expectation(T(1, 0), P) == 0


@pytest.mark.parametrize("params,n", [(ModelParams(2, 1, 1), 1), (ModelParams(2, 1, 1), 2), (ModelParams(2, 2, 1), 1)])
def test_diagram_and_fock_expectations_agree(params, n):
    assert mo.expectation(T(n, n), params) == mo.expectation(T(n, n), params, engine="fock")
    with pytest.raises(ValueError):
        mo.expectation(T(n, n), params, engine="nope")


def test_catalan_numbers_and_rescaling():
    assert [mo.catalan(n) for n in range(8)] == [catalan(n) for n in range(8)]
    assert mo.rescaled_moment(1, Fraction(3), 2, 1, 1) == 2 * 3 * Fraction(1, 4) ** 2


@pytest.mark.parametrize("p,M,k", [(1, 3, 1), (2, 2, 1), (1, 2, 2)])
def test_ground_identity_t12(p, M, k):
    rep = mo.lemma_c1_check(p, M, k)
    assert rep.passed
    assert rep.factor == k * (M - 1) + p * M
    with pytest.raises(ValueError):
        mo.lemma_c1_check(0, M, k)


def test_inverse_N_decay_heuristic():
    assert mo.inverse_N_decay({N: Fraction(3, N) + Fraction(1, N * N) for N in range(2, 9)})
    assert not mo.inverse_N_decay({N: Fraction(N) for N in range(2, 9)})
    assert not mo.inverse_N_decay({2: Fraction(1), 3: Fraction(1, 2)})


def test_catalan_check_small_range_and_report_formats():
    rep = mo.catalan_check(1, 2, [2, 3, 4, 5, 6, 7])
    assert rep.passed
    assert rep.limit == Fraction(1, 2)
    data = rep.to_json()
    assert json.loads(json.dumps(data)) == data
    assert rep.to_csv().splitlines()[0].startswith("n,catalan,target_limit,N")
    with pytest.raises(ValueError):
        mo.catalan_check(1, 0, [2, 3])


@pytest.mark.parametrize("p,k,nu", [(1, 1, "1/2"), (1, 2, "1/3"), (2, 1, "2/3"), (3, 2, "3/5")])
def test_filling_factor(p, k, nu):
    rep = mo.filling_factor_report(p, k)
    assert rep["nu"] == nu
    assert rep["condition_met"] is None
    with pytest.raises(ValueError):
        mo.filling_factor_report(p, k, Fraction(0))


def test_moment_recursion_at_p2():
    rep = mo.prop_c2_recursion_check(2, 1, [1, 2, 3], 1)
    assert rep.d0_ok
    data = rep.to_json()
    assert json.loads(json.dumps(data)) == data


def test_conjecture_probe():
    empty = mo.conjecture_probe_p2(2, 1, [])
    assert empty["rows"] == [] and empty["target"] == "2/3"
    rep = mo.conjecture_probe_p2(2, 1, [1, 2], E_max=1, n_max=1)
    assert [r["N"] for r in rep["rows"]] == [2, 4]
    assert json.loads(json.dumps(rep)) == rep
    with pytest.raises(ValueError):
        mo.conjecture_probe_p2(1, 1, [1])
