from __future__ import annotations

import json
from fractions import Fraction

import pytest

from csmm import ddca as dd
from csmm.exact import ParamPoly
from csmm.fock import ModelParams
from csmm.observables import T, apply_op, physical_spanning_set


def test_generator_order_and_labels():
    gens = dd.generators(1, 3)
    assert gens == [dd.Tg(0, 0), dd.Tg(0, 1), dd.Tg(1, 0)]
    assert dd.Tg(2, 1).label() == "t[2,1]"
    assert dd.Jg(1, 2, 0, 1).label() == "J[1,2;0,1]"
    # no J generators at p = 1, and J^p_p is eliminated at p = 2
    assert all(g.is_t for g in dd.generators(1, 6))
    assert dd.Jg(1, 1, 0, 0) in dd.generators(2, 2)
    assert dd.Jg(2, 2, 0, 0) not in dd.generators(2, 2)
    assert dd.Gen.from_json(dd.Jg(1, 2, 3, 0).to_json()) == dd.Jg(1, 2, 3, 0)


def test_known_commutators():
    eng = dd.DDCA(1)
    assert eng.comm(dd.Tg(3, 0), dd.Tg(0, 2)) == dd.t_elt(2, 1).scale(6)
    assert eng.comm(dd.Tg(2, 0), dd.Tg(0, 2)) == dd.t_elt(1, 1).scale(4)
    assert eng.comm(dd.Tg(1, 0), dd.Tg(0, 1)) == dd.t_elt(0, 0)
    assert eng.comm(dd.Tg(0, 0), dd.Tg(2, 1)).is_zero()
    assert eng.comm(dd.Tg(0, 2), dd.Tg(3, 0)) == dd.t_elt(2, 1).scale(-6)


def test_t21_t12_leading_term():
    eng = dd.DDCA(1)
    val = eng.comm(dd.Tg(2, 1), dd.Tg(1, 2))
    assert val.coefficient((dd.Tg(2, 2),)) == ParamPoly.const(3)
    rep = dd.leading_check(dd.Tg(2, 1), dd.Tg(1, 2), eng)
    assert rep.passed and rep.residual_degree <= rep.bound


def test_t40_j01_leading_term_at_p2():
    eng = dd.DDCA(2)
    val = eng.comm(dd.Tg(4, 0), dd.Jg(1, 2, 0, 1))
    assert val == dd.J_elt(1, 2, 3, 0, 2).scale(4)
    assert eng.provenance[(dd.Tg(4, 0), dd.Jg(1, 2, 0, 1))] == "derived"


def test_normal_form_swaps_and_is_idempotent():
    eng = dd.DDCA(1)
    x = eng.product(dd.t_elt(1, 0), dd.t_elt(0, 1))
    assert x == dd.t_elt(0, 1) * dd.t_elt(1, 0) + dd.t_elt(0, 0)
    assert dd.is_normal(x)
    assert eng.normal_form(x) == x
    assert not dd.is_normal(dd.t_elt(1, 0) * dd.t_elt(0, 1))


def test_seed_window_and_degree_cap_errors():
    eng = dd.DDCA(2, seed_index_cap=1)
    with pytest.raises(dd.SeedWindowError, match="extend seed window"):
        eng.comm(dd.Tg(2, 1), dd.Jg(1, 2, 2, 0))
    with pytest.raises(dd.CapExceededError):
        dd.DDCA(1).derive_commutator(dd.Tg(3, 0), dd.Tg(3, 1), degree_cap=5)
    with pytest.raises(ValueError):
        dd.DDCA(0)


def test_seed_relations_contain_printed_families():
    seeds = dd.seed_relations(2, index_cap=2)
    assert (dd.Tg(2, 1), dd.Jg(1, 2, 0, 1)) in seeds
    assert (dd.Tg(3, 0), dd.Tg(0, 2)) in seeds
    assert len(dd.seed_version_hash()) >= 8


def test_table_json_round_trip():
    eng = dd.DDCA(2)
    table = dd.build_table(2, 5, eng)
    back = dd.CommutatorTable.from_json(json.loads(dd.table_json(table)))
    assert back.entries == table.entries
    assert back.provenance == table.provenance
    assert back.cache_key() == table.cache_key()
    assert table.cache_key().startswith("ddca-p2-cap5-")


@pytest.mark.parametrize("p,cap", [(1, 8), (2, 5)])
def test_antisymmetry_and_jacobi(p, cap):
    eng = dd.DDCA(p)
    table = dd.build_table(p, cap, eng)
    assert dd.antisymmetry_check(eng, table).passed
    assert dd.jacobi_check(eng, p, cap).passed


def test_every_derived_entry_obeys_the_leading_law():
    eng = dd.DDCA(2)
    table = dd.build_table(2, 5, eng)
    derived = [k for k, tag in table.provenance.items() if tag == "derived"]
    assert derived
    assert all(dd.leading_check(g1, g2, eng).passed for g1, g2 in derived)


def test_finite_N_agreement_on_selected_pairs():
    eng = dd.DDCA(1)
    P = ModelParams(3, 1, 1)
    states = physical_spanning_set(P, 3)
    pairs = [(dd.Tg(2, 1), dd.Tg(1, 2)), (dd.Tg(3, 0), dd.Tg(0, 3)), (dd.Tg(2, 2), dd.Tg(1, 2))]
    assert dd.finite_N_check(eng, P, states, pairs=pairs).passed


def test_finite_N_agreement_larger_p1_window():
    # the degree-5 window at p = 1 is tiny, so this covers products of index sum 5
    eng = dd.DDCA(1)
    P = ModelParams(3, 1, 1)
    rep = dd.finite_N_check(eng, P, physical_spanning_set(P, 3), max_degree=9)
    assert rep.passed and rep.checked > 200


def test_finite_N_agreement_p2():
    eng = dd.DDCA(2)
    P = ModelParams(2, 2, 1)
    assert dd.finite_N_check(eng, P, physical_spanning_set(P, 2), max_degree=4).passed
    with pytest.raises(ValueError):
        dd.finite_N_check(eng, ModelParams(2, 1, 1), [], max_degree=4)


def test_t00_evaluates_to_N():
    P = ModelParams(3, 1, 2)
    for st in physical_spanning_set(P, 2):
        assert dd.evaluate_finite_N(dd.t_elt(0, 0), P, st).to_fock() == apply_op(T(0, 0), st).to_fock()
        assert dd.evaluate_finite_N(dd.t_elt(0, 0), P, st).to_fock() == st.to_fock().scale(3)


def test_lie_bracket_examples():
    one = ("1",)
    # {z, w} = 1 with central term (1/p)·p for 1 ⊗ 1_p
    br = dd.lie_bracket(dd.lie_gen(1, 0, one), dd.lie_gen(0, 1, one), 1)
    assert br.terms == {(0, 0, one): 1}
    # gl_2 part: [z⊗E12, E21] = z⊗(E11 − E22) = z⊗2J11 in the trace-free basis
    br = dd.lie_bracket(dd.lie_gen(1, 0, ("J", 1, 2)), dd.lie_gen(0, 0, ("J", 2, 1)), 2)
    assert br.terms == {(1, 0, ("J", 1, 1)): 2}
    assert dd.poisson(2, 0, 0, 2) == (4, 1, 1)
    assert dd.poisson(1, 0, 1, 0) is None


@pytest.mark.parametrize("p", [1, 2])
def test_lie_jacobi_and_affine_map_small(p):
    assert dd.lie_jacobi_check(p, 2).passed
    rep = dd.affine_map_check(p, 2)
    assert rep.passed
    assert rep.u1_level == ParamPoly({(0, -1): Fraction(p)})
    if p >= 2:
        assert rep.sl_level == dd.eps3(p)
    with pytest.raises(ValueError):
        dd.affine_map_check(p, 1)


def test_degeneration_small_windows():
    assert dd.degeneration_check(1, 3).passed
    assert dd.degeneration_check(2, 1).passed
    assert dd.scale_half_power(dd.Tg(1, 1)) == 4
    assert dd.scale_half_power(dd.Jg(1, 2, 1, 1)) == 2


def test_degenerate_flags_surviving_products():
    x = dd.t_elt(1, 0) * dd.t_elt(0, 1)
    _, problems = dd.degenerate(x, 2, 1)
    assert problems
