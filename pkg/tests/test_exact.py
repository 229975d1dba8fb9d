from __future__ import annotations

from fractions import Fraction

import pytest

from csmm.exact import (InconsistentSystemError, ParamPoly, ScaledRational, determinant, matrix_rank, nullspace,
                        rational_arith, rational_to_str, solve_exact)


def test_rational_arith_examples():
    assert rational_arith(Fraction(1, 2), Fraction(1, 3), "add") == Fraction(5, 6)
    assert rational_arith(Fraction(2, 4), 1, "mul") == Fraction(1, 2)
    assert rational_arith(Fraction(3, 7), Fraction(7, 3), "mul") == 1
    assert rational_arith(1, 4, "div") == Fraction(1, 4)
    with pytest.raises(ZeroDivisionError):
        rational_arith(1, 0, "div")


def test_rational_to_str():
    assert rational_to_str(Fraction(-3, 6)) == "-1/2"
    assert rational_to_str(Fraction(4)) == "4"


def test_solve_exact_examples():
    assert list(solve_exact([[1, 0], [0, 1]], [Fraction(1, 2), Fraction(1, 3)]).x) == [Fraction(1, 2), Fraction(1, 3)]
    assert list(solve_exact([[2, 0], [0, 4]], [1, 1]).x) == [Fraction(1, 2), Fraction(1, 4)]
    with pytest.raises(InconsistentSystemError):
        solve_exact([[1, 1], [1, 1]], [1, 2])


def test_linear_algebra_helpers():
    A = [[1, 2, 3], [2, 4, 6], [1, 0, 1]]
    assert matrix_rank(A) == 2
    assert determinant(A) == 0
    assert determinant([[2, 1], [1, 1]]) == 1
    for v in nullspace(A):
        assert all(sum(Fraction(a) * x for a, x in zip(row, v)) == 0 for row in A)


def test_parampoly_arithmetic_and_canonical_equality():
    e1, e2 = ParamPoly.eps1(), ParamPoly.eps2()
    e3 = ParamPoly.eps3(2)
    assert e3 == e2 - e1 * 2
    assert (e2 + e1) * (e2 - e1) == e2 * e2 - e1 * e1
    assert (e3 - e3).is_zero()
    assert (e2 * e3).evaluate(1, 3) == 3
    assert ParamPoly.eps2_power(-1) * e2 == ParamPoly.const(1)
    assert not ParamPoly.eps2_power(-1).is_polynomial
    assert ParamPoly.from_json((e1 * e2 + 3).to_json()) == e1 * e2 + 3
    assert hash(e1 + e2) == hash(e2 + e1)


def test_scaled_rational_ledger():
    x = ScaledRational(Fraction(3), 3)  # 3·√N^3
    assert x.square_at(4) == 9 * 64
    assert x.at(4) == (Fraction(12), 1)  # 12·√4
    assert x.at(2)[1] == 1
