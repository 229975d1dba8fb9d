from __future__ import annotations

from fractions import Fraction

import pytest

from csmm.fock import (DegenerateGroundError, FockPolynomial, IndexRangeError, Lam, LamDag, ModelParams, Z, ZDag,
                       apply_symbol, apply_symbols, apply_word, ground_state, inner_product, is_physical,
                       moment_map_apply, trace_power_creation)
from oracles import wick_pairings


def vac(N=2, p=1, k=1):
    return FockPolynomial.vacuum(ModelParams(N, p, k))


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0)
    P = ModelParams(3, 2, 1)
    assert (P.eps1, P.eps2, P.eps3) == (1, 3, 1)


def test_apply_symbol_contractions():
    v = vac(3)
    assert apply_symbol(Z(1, 1), apply_symbol(ZDag(1, 1), v)) == v
    assert apply_symbol(Z(1, 2), apply_symbol(ZDag(1, 2), v)).is_zero()
    assert apply_symbol(Z(2, 1), apply_symbol(ZDag(1, 2), v)) == v
    trz = FockPolynomial.zero(v.params)
    for j in range(1, 4):
        trz = trz + apply_symbol(ZDag(j, j), v)
    total = FockPolynomial.zero(v.params)
    for i in range(1, 4):
        total = total + apply_symbol(Z(i, i), trz)
    assert total == v.scale(3)
    with pytest.raises(IndexRangeError):
        apply_symbol(Z(4, 1), v)
    with pytest.raises(IndexRangeError):
        apply_symbol(Lam(2, 1), v)


def test_apply_word_traces():
    v3 = vac(3)
    assert apply_word("Z", apply_word("D", v3)) == v3.scale(3)
    v2 = vac(2)
    assert apply_word("D", v2) == apply_symbol(ZDag(1, 1), v2) + apply_symbol(ZDag(2, 2), v2)
    assert apply_word("ZD", v2) == v2.scale(4)
    assert apply_word("DZ", v2).is_zero()


def test_moment_map_on_vacuum_and_ground():
    v = vac(2, 1, 1)
    # the annihilator-left flavor term gives (p - eps2) = -k on the vacuum
    assert moment_map_apply(1, 1, v) == v.scale(-1)
    assert moment_map_apply(1, 2, v).is_zero()
    g = ground_state(ModelParams(2, 1, 1))
    for i in (1, 2):
        for j in (1, 2):
            assert moment_map_apply(i, j, g).is_zero()


def test_is_physical():
    assert is_physical(ground_state(ModelParams(2, 1, 1)))
    v = vac(2)
    assert not is_physical(apply_symbol(ZDag(1, 1), v))
    P = ModelParams(3, 1, 1)
    assert is_physical(apply_word("D", ground_state(P)))


def test_inner_product_wick():
    v = vac(2)
    a = apply_symbol(ZDag(1, 2), v)
    assert inner_product(a, a) == 1
    b = apply_symbols([ZDag(1, 1), ZDag(1, 1)], v)
    assert inner_product(b, b) == wick_pairings(2)
    assert inner_product(apply_symbol(ZDag(1, 1), v), apply_symbol(ZDag(2, 2), v)) == 0


def test_ground_state_examples():
    P = ModelParams(1, 1, 2)
    g = ground_state(P)
    assert g == apply_symbols([LamDag(1, 1), LamDag(1, 1)], FockPolynomial.vacuum(P))
    P = ModelParams(2, 1, 1)
    g = ground_state(P)
    v = FockPolynomial.vacuum(P)
    # ε_{ij} λ†_i (λ†Z†)_j: two ε terms, each expanded over the inner index
    want = FockPolynomial.zero(P)
    for (i, j), s in (((1, 2), 1), ((2, 1), -1)):
        for m in (1, 2):
            want = want + apply_symbols([LamDag(1, i), LamDag(1, m), ZDag(m, j)], v).scale(s)
    assert g == want
    g22 = ground_state(ModelParams(2, 2, 1))
    assert is_physical(g22)
    with pytest.raises(DegenerateGroundError):
        ground_state(ModelParams(3, 2, 1))


def test_serialization_round_trip():
    g = ground_state(ModelParams(2, 1, 1))
    assert FockPolynomial.loads(g.dumps()) == g
    assert trace_power_creation(ModelParams(2), 0) == vac(2).scale(2)
