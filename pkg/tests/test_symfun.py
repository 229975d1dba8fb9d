from __future__ import annotations

import random
from fractions import Fraction
from math import factorial

import pytest

from csmm.symfun import (CLabel, c_to_schur, char_value, character_orthogonality, character_table,
                         character_table_csv, mn_expand, partition_count, partitions, power_sum_in_N_vars,
                         power_times_c, schur_in_power_sums, schur_to_c, z_factor)
from oracles import (class_sizes, frobenius_character, partitions_of, power_times_alternant, power_times_schur)


def test_partitions_and_counts():
    assert list(partitions(3)) == [(3,), (2, 1), (1, 1, 1)]
    assert partition_count(4, max_part=2) == 3
    for n in range(7):
        assert sorted(partitions(n)) == sorted(partitions_of(n))


def test_mn_expand_examples():
    assert mn_expand(1, ()) == {(1,): 1}
    assert mn_expand(2, (1,)) == {(3,): 1, (1, 1, 1): -1}
    assert mn_expand(2, (1,), num_rows_cap=2) == {(3,): 1}
    with pytest.raises(ValueError):
        mn_expand(0, (1,))


@pytest.mark.parametrize("total", range(1, 6))
def test_mn_expand_matches_bialternant_oracle(total):
    for n in range(1, total + 1):
        for mu in partitions_of(total - n):
            assert mn_expand(n, mu) == power_times_schur(n, mu), (n, mu)


def test_c_label_dictionary():
    assert c_to_schur(CLabel((0, 1, 2))) == (1, ())
    assert c_to_schur(CLabel((1, 3, 8, 5, 7))) == (1, (4, 4, 3, 2, 1))
    assert c_to_schur(CLabel((0, 1, 1)))[0] == 0
    assert schur_to_c((4, 4, 3, 2, 1), 5) == CLabel((1, 3, 5, 7, 8))
    with pytest.raises(ValueError):
        CLabel((-1, 0))


def test_power_times_c_examples():
    assert power_times_c(2, CLabel((0, 1, 2))) == {CLabel((0, 2, 3)): -1, CLabel((0, 1, 4)): 1}
    assert power_times_c(1, CLabel((0, 1))) == {CLabel((0, 2)): 1}


def test_power_times_c_matches_determinant_oracle():
    rng = random.Random(3)
    for _ in range(20):
        N = rng.randint(1, 4)
        ex = tuple(sorted(rng.sample(range(7), N)))
        n = rng.randint(1, 3)
        want = power_times_alternant(n, ex)
        got = {lab.exponents: c for lab, c in power_times_c(n, CLabel(ex)).items()}
        assert got == want, (n, ex)


def test_c_to_schur_intertwines_mn_expand():
    rng = random.Random(5)
    for _ in range(20):
        N = rng.randint(1, 4)
        ex = tuple(sorted(rng.sample(range(6), N)))
        n = rng.randint(1, 3)
        sign, mu = c_to_schur(CLabel(ex))
        lhs = {}
        for lab, c in power_times_c(n, CLabel(ex)).items():
            s, nu = c_to_schur(lab)
            lhs[nu] = lhs.get(nu, 0) + c * s
        rhs = {nu: sign * c for nu, c in mn_expand(n, mu, num_rows_cap=N).items()}
        assert {k: v for k, v in lhs.items() if v} == rhs


def test_character_values():
    for mu in partitions(4):
        assert char_value((4,), mu) == 1
    assert char_value((1, 1), (2,)) == -1
    with pytest.raises(ValueError):
        char_value((2,), (1,))


@pytest.mark.parametrize("n", range(1, 6))
def test_characters_match_frobenius_and_orthogonality(n):
    sizes = class_sizes(n)
    rows, cols, table = character_table(n)
    for i, nu in enumerate(rows):
        for j, mu in enumerate(cols):
            assert table[i][j] == frobenius_character(nu, mu)
    for mu in cols:
        assert z_factor(mu) == factorial(n) // sizes[mu]
    assert character_orthogonality(n)


def test_character_table_csv():
    text = character_table_csv(3)
    assert text.splitlines()[0] == "nu\\mu,3,2 1,1 1 1"
    assert text.splitlines()[2] == "2 1,-1,0,2"


def test_schur_in_power_sums_uses_characters():
    # s_λ = Σ_μ χ^λ(μ) p_μ / z_μ when the number of variables is at least |λ|
    for lam in partitions(3):
        got = schur_in_power_sums(lam, 3)
        want = {}
        for mu in partitions(3):
            key = tuple(mu.count(i + 1) for i in range(3))
            want[key] = Fraction(char_value(lam, mu), z_factor(mu))
        assert got == {k: v for k, v in want.items() if v}


def test_power_sum_reduction_in_two_variables():
    # p_3 = (3/2) p_1 p_2 − (1/2) p_1^3 for two variables
    assert power_sum_in_N_vars(3, 2) == {(1, 1): Fraction(3, 2), (3, 0): Fraction(-1, 2)}
