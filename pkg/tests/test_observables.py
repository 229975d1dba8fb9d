from __future__ import annotations

import random
from fractions import Fraction

import pytest

from csmm import diagrams as dg
from csmm.fock import FockPolynomial, ModelParams, apply_word, ground_state
from csmm.observables import (E, NonPhysicalStateError, OpEvaluator, Product, T, apply_op, build_sym,
                              physical_spanning_set, prop53_check, span_rank, verify_relation)
from csmm.relations import FAMILIES, RelationInstance, relation_instances


def test_build_sym_examples():
    assert build_sym(1, 1).words == ((Fraction(1, 2), "DZ"), (Fraction(1, 2), "ZD"))
    assert build_sym(2, 0).words == ((Fraction(1), "ZZ"),)
    s = build_sym(2, 1)
    assert len(s.words) == 3 and all(w == Fraction(1, 3) for w, _ in s.words)


def test_basic_operator_actions():
    P = ModelParams(2, 1, 1)
    v = FockPolynomial.vacuum(P)
    assert apply_op(T(1, 1), v) == v.scale(2)
    g = ground_state(P)
    assert apply_op(T(0, 1), g) == apply_word("D", g)
    assert apply_op(E(1, 1, 0, 0), g) == g.scale(2)
    assert apply_op(T(0, 0), g) == g.scale(2)


def test_physical_spanning_set_sizes():
    assert len(physical_spanning_set(ModelParams(3, 1, 1), 2)) == 4
    assert len(physical_spanning_set(ModelParams(1, 1, 1), 1)) == 2
    S = physical_spanning_set(ModelParams(2, 2, 1), 1)
    assert span_rank(S) == len(S)
    assert len(S) >= 2
    with pytest.raises(ValueError):
        physical_spanning_set(ModelParams(2, 1, 1), -1)


@pytest.mark.parametrize("params", [ModelParams(2, 1, 1), ModelParams(3, 1, 1), ModelParams(2, 1, 2), ModelParams(2, 2, 1)])
def test_diagram_engine_matches_fock_engine(params):
    rng = random.Random(7)
    states = physical_spanning_set(params, 2)
    ops = [T(1, 0), T(0, 1), T(1, 1), T(2, 1), T(1, 2), T(0, 2)]
    ops += [E(a, b, n, m) for a in range(1, params.p + 1) for b in range(1, params.p + 1)
            for n, m in ((0, 0), (1, 0), (0, 1), (1, 1))]
    for _ in range(25):
        op = Product(tuple(rng.choice(ops) for _ in range(rng.randint(1, 3))))
        st = rng.choice(states)
        via_diagram = apply_op(op, st).to_fock()
        via_fock = apply_op(op, st.to_fock())
        assert via_diagram == via_fock


def test_verify_relation_examples():
    P = ModelParams(2, 1, 1)
    S = physical_spanning_set(P, 3)
    assert verify_relation("R_t11e", P, S, indices=(1, 0), flavors=(1, 1)).passed
    assert verify_relation("R_t21t", P, S, indices=(0, 1)).passed
    P2 = ModelParams(2, 2, 1)
    S2 = physical_spanning_set(P2, 2)
    assert verify_relation("R_trace", P2, S2, indices=(0, 0)).passed


def test_all_families_small_window():
    P = ModelParams(2, 2, 1)
    S = physical_spanning_set(P, 2)
    ev = OpEvaluator()
    for fam in FAMILIES:
        for inst in relation_instances(fam, 2, 2):
            assert verify_relation(inst, P, S, ev).passed, inst.label()


def test_a_wrong_relation_is_caught():
    # the commutator [t_{1,1}, e] with the wrong sign of its right-hand side must fail
    P = ModelParams(2, 1, 1)
    S = physical_spanning_set(P, 2)
    inst = RelationInstance("R_t11e", (1, 1), (0, 1))
    from csmm.observables import relation_operator
    from csmm.observables import Commutator, ScalarMul
    bad = Commutator(T(1, 1), E(1, 1, 0, 1)) + ScalarMul(Fraction(1), E(1, 1, 0, 1))
    assert any(not dg.is_zero(apply_op(bad, s)) for s in S)
    assert all(dg.is_zero(apply_op(relation_operator(inst, P), s)) for s in S)


def test_non_physical_states_refused():
    P = ModelParams(2, 1, 1)
    with pytest.raises(NonPhysicalStateError):
        verify_relation("R_t11e", P, [FockPolynomial.vacuum(P)], indices=(1, 0), flavors=(1, 1))


def test_prop53_identity():
    P = ModelParams(2, 1, 1)
    states = [s.to_fock() for s in physical_spanning_set(P, 2)]
    assert prop53_check("", "", P, states).passed
    assert prop53_check("D", "", P, states).passed
    assert prop53_check("Z", "D", P, states).passed
    with pytest.raises(NonPhysicalStateError):
        prop53_check("", "", P, [FockPolynomial.vacuum(P)])
