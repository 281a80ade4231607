"""Comparative statics, audits and the generated scenarios."""

import numpy as np
import pytest

from discerning_market.analysis import (
    add_type_experiment,
    beneficial_ree_compare,
    beneficial_welfare_compare,
    expected_addon_audit,
    has_rational,
    is_rational,
    lower_bound_scenario,
    price_range_check,
    signal_premise_check,
    random_beneficial_spec,
    random_exploitative_spec,
    random_perfect_dag,
    sweep_add_type,
)
from discerning_market.beliefs import CausalDag, CognitiveType, DagError, is_perfect, validate_dag
from discerning_market.core import SpecError, StateSpace, Variant, check_conditions
from discerning_market.solver import solve

EXTENDED_CHAIN = [("theta1", "phi"), ("theta1", "theta2"), ("theta2", "q"), ("theta1", "w"), ("theta2", "w")]


def test_adding_a_type_lowers_addons(three_state_market):
    base = three_state_market.with_types([t for t in three_state_market.types if t.name in ("rational", "fully_coarse")])
    report = add_type_experiment(base, CognitiveType.of_subset("only_theta1", [0]))
    assert report.ok, report.violations()
    assert report.d_q_bar.max() <= 1e-9
    assert report.d_q_bar.min() < -0.05
    assert report.d_exante_loss is not None and report.d_exante_loss > 0
    assert [c.name for c in report.checks][-1] == "ex-ante consumer loss weakly rises"


def test_duplicate_type_changes_nothing(three_state_market):
    twin = CognitiveType.of_subset("only_theta1_again", [0])
    report = add_type_experiment(three_state_market, twin)
    assert report.ok
    np.testing.assert_allclose(report.d_q_bar, 0.0, atol=1e-12)
    np.testing.assert_allclose(report.d_h, 0.0, atol=1e-12)


def test_beneficial_add_type_is_not_monotone(beneficial_market):
    report = add_type_experiment(beneficial_market, CognitiveType.of_subset("rational", [0]))
    assert report.checks == []
    assert report.d_q_bar[0] > 0
    assert report.d_q_bar[1] < 0


def test_expected_addon_audit(three_state_market):
    report = expected_addon_audit(three_state_market)
    assert report.ok
    assert report.lower_bound <= report.exante_addon <= report.ree_level
    assert not report.singleton

    singleton = three_state_market.with_types([CognitiveType.of_subset("only_theta2", [1])])
    single = expected_addon_audit(singleton)
    assert single.singleton and single.ok
    assert single.exante_addon == pytest.approx(singleton.s_bar - singleton.delta, abs=1e-9)


def test_expected_addon_audit_rejects_beneficial(beneficial_market):
    with pytest.raises(SpecError, match="exploitative"):
        expected_addon_audit(beneficial_market)


def test_lower_bound_scenario_construction():
    spec = lower_bound_scenario(50, delta=1.0, s_bar=3.0)
    assert spec.space.size == 51
    assert spec.s_bar == pytest.approx(3.0, abs=1e-12)
    assert spec.mu[0] == pytest.approx(0.5, abs=0.02)
    assert check_conditions(spec).ree_condition
    assert spec.space.label(0) == ",".join(["0"] * 50)
    assert has_rational(spec)


def test_lower_bound_scenario_approaches_half_mean():
    spec = lower_bound_scenario(50, delta=1.0, s_bar=3.0)
    sol = solve(spec)
    assert sol.is_interior
    assert abs(sol.exante_addon - 1.5) / 1.5 < 0.05
    assert sol.q_bar[0] == pytest.approx(spec.S[0] - spec.delta, abs=1e-9)
    assert np.all(np.abs(sol.q_bar[1:] - 2.0) < 0.05)


@pytest.mark.parametrize("n, delta, s_bar", [(1, 1.0, 3.0), (5, 1.0, 4.5), (5, 1.0, 1.5), (5, -1.0, 3.0)])
def test_lower_bound_scenario_domain(n, delta, s_bar):
    with pytest.raises(SpecError):
        lower_bound_scenario(n, delta, s_bar)


def test_price_range_with_rational(three_state_market):
    report = price_range_check(three_state_market)
    assert report.rational_present and report.ok
    assert report.upper == pytest.approx(0.0)
    assert report.lower == pytest.approx(2 * 2 - 1 - 4.01)
    assert not report.rigid


def test_price_range_rigid_singleton(three_state_market):
    coarse = three_state_market.with_types([CognitiveType.of_subset("fully_coarse", [])])
    report = price_range_check(coarse)
    assert report.rigid and report.rigid_matches_ree
    assert report.checks == []
    assert "no rational type" in report.notice


def test_beneficial_ree_compare(beneficial_market, beneficial_rational_market):
    report = beneficial_ree_compare(beneficial_rational_market)
    assert report.ok and report.checks
    assert report.q_bar[1] == pytest.approx(report.ree_q_bar[1], abs=1e-9)
    assert report.q_bar[0] <= 0.7 + 1e-9

    skipped = beneficial_ree_compare(beneficial_market)
    assert skipped.checks == [] and skipped.notice


def test_beneficial_welfare_compare(beneficial_rational_market):
    base = beneficial_rational_market.with_types([t for t in beneficial_rational_market.types if t.name == "rational"])
    report = beneficial_welfare_compare(base, CognitiveType.of_subset("fully_coarse", []))
    assert report.ok, report.violations()
    assert report.d_pi_star.max() <= 1e-9
    assert report.d_social_total < 0


def test_beneficial_welfare_compare_needs_rational(beneficial_market):
    with pytest.raises(SpecError, match="rational"):
        beneficial_welfare_compare(beneficial_market, CognitiveType.of_subset("again", []))


def test_rationality_is_semantic(three_state_market):
    assert is_rational(three_state_market.types[0], three_state_market)
    assert not is_rational(three_state_market.types[1], three_state_market)
    linked = CognitiveType.of_dag("linked", CausalDag.from_edges([("phi", "q")]))
    assert is_rational(linked, three_state_market)


def test_signal_premise_on_extended_chain():
    holds = CognitiveType.of_dag("short", CausalDag.from_edges(EXTENDED_CHAIN, signal="w"))
    report = signal_premise_check([holds])
    assert report.premise_holds and report.ok
    assert report.rows[0].price_parents == ("theta1",)

    swapped = [("theta2", "phi"), ("theta1", "theta2"), ("theta2", "q"), ("theta1", "w"), ("theta2", "w")]
    fails = CognitiveType.of_dag("swapped", CausalDag.from_edges(swapped, signal="w"))
    report = signal_premise_check([holds, fails])
    assert not report.premise_holds
    assert [c.holds for c in report.checks] == [True, False]


def test_signal_premise_exempts_rational(three_state_market):
    direct = CausalDag.from_edges([("theta1", "phi"), ("phi", "q"), ("theta1", "w")], signal="w")
    report = signal_premise_check([CognitiveType.of_dag("direct", direct)])
    assert report.rows[0].exempt and report.premise_holds

    full = [("theta1", "theta2"), ("theta1", "phi"), ("theta2", "phi"), ("theta1", "q"), ("theta2", "q"), ("theta1", "w")]
    semantic = CognitiveType.of_dag("full", CausalDag.from_edges(full, signal="w"))
    assert signal_premise_check([semantic], three_state_market.space, three_state_market.mu).rows[0].exempt


def test_signal_premise_requires_signal():
    with pytest.raises(DagError, match="no signal"):
        signal_premise_check([CognitiveType.of_dag("plain", CausalDag.from_edges(EXTENDED_CHAIN[:3]))])
    with pytest.raises(DagError):
        signal_premise_check([CognitiveType.of_subset("coarse", [0])])


def test_random_generators_meet_interiority_conditions(rng):
    for _ in range(10):
        assert check_conditions(random_exploitative_spec(rng)).exploitative_interior
        assert check_conditions(random_beneficial_spec(rng)).beneficial_interior


def test_random_perfect_dag_is_valid(rng):
    space = StateSpace.from_domains({"a": [0, 1], "b": [0, 1], "c": [0, 1]})
    for _ in range(25):
        dag = random_perfect_dag(rng, space)
        assert validate_dag(dag, space) == []
        assert is_perfect(dag)


def test_sweep_is_reproducible():
    first = sweep_add_type(seed=3, trials=5)
    second = sweep_add_type(seed=3, trials=5)
    assert first.ok and first.failures == second.failures


def test_sweep_beneficial_counts_trials():
    seen = []
    report = sweep_add_type(seed=1, trials=4, variant=Variant.BENEFICIAL, on_trial=seen.append)
    assert report.ok, report.failures
    assert seen == [0, 1, 2, 3]
