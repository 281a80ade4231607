"""State space, market primitives and the REE benchmark."""

import numpy as np
import pytest

from discerning_market.beliefs import CognitiveType, DagError
from discerning_market.core import (
    MarketSpec,
    NoInteriorEquilibrium,
    SpecError,
    StateSpace,
    Variable,
    Variant,
    addon_support,
    check_conditions,
    mean_addon,
    pi_star,
    price_from_addon,
    ree_solution,
)

BINARY = StateSpace((Variable("theta", ("0", "1")),))
FULL = (CognitiveType.of_subset("rational", [0]),)


def market(S, v_star=2.0, c=1.0, variant=Variant.EXPLOITATIVE, mu=None, types=FULL):
    return MarketSpec(BINARY, mu if mu is not None else [0.5, 0.5], S, v_star, c, variant, types)


def test_state_space_round_trip():
    space = StateSpace.from_domains({"a": ["x", "y", "z"], "b": [0, 1]})
    assert space.size == 6
    assert space.is_full_product
    for i in range(space.size):
        assert space.index(space.state(i)) == i
        assert space.index(space.label(i)) == i
    assert space.labels()[:2] == ["x,0", "x,1"]


def test_support_restricts_states_in_lexicographic_order():
    space = StateSpace.from_domains({"t1": [0, 1], "t2": [0, 1]}, support=["1,0", "0,0", "0,1"])
    assert space.labels() == ["0,0", "0,1", "1,0"]
    assert not space.is_full_product
    with pytest.raises(SpecError, match="outside the support"):
        space.index("1,1")


def test_full_support_normalizes_to_product():
    listed = StateSpace.from_domains({"t": [0, 1]}, support=["0", "1"])
    assert listed.support is None
    assert listed == StateSpace.from_domains({"t": [0, 1]})


@pytest.mark.parametrize(
    "variables, message",
    [
        ((Variable("t", ("0",)),), "at least two states"),
        ((Variable("t", ()),), "at least one label"),
        ((Variable("t", ("0", "1")), Variable("t", ("0", "1"))), "duplicate variable"),
        ((), "at least one variable"),
        ((Variable("q", ("0", "1")),), "reserved node name"),
        ((Variable("t", ("0", "1")), Variable("phi", ("0", "1"))), "reserved node name"),
    ],
)
def test_state_space_rejects_degenerate_domains(variables, message):
    with pytest.raises(SpecError, match=message):
        StateSpace(variables)


def test_market_spec_is_immutable(three_state_market):
    with pytest.raises(ValueError):
        three_state_market.S[0] = 10.0
    assert three_state_market.delta == pytest.approx(1.0)
    assert three_state_market.s_bar == pytest.approx((3 + 4 + 4.01) / 3)


def test_market_spec_validation():
    with pytest.raises(SpecError, match="sum to 0.99"):
        market([3, 4], mu=[0.5, 0.49])
    with pytest.raises(SpecError, match="full support"):
        market([3, 4], mu=[1.0, 0.0])
    with pytest.raises(SpecError, match="one-to-one"):
        market([3, 3])
    with pytest.raises(SpecError, match="strictly positive"):
        market([0, 3])
    with pytest.raises(SpecError, match="v_star - c > 0"):
        market([3, 4], v_star=1.0, c=1.0)
    with pytest.raises(SpecError, match="v_star - c < 0"):
        market([3, 4], variant=Variant.BENEFICIAL)
    with pytest.raises(SpecError, match="at least one cognitive type"):
        market([3, 4], types=())
    with pytest.raises(SpecError, match="duplicate type name"):
        market([3, 4], types=FULL + FULL)
    with pytest.raises(DagError, match="out of range"):
        market([3, 4], types=(CognitiveType.of_subset("bad", [3]),))


def test_add_type_keeps_original(three_state_market):
    bigger = three_state_market.add_type(CognitiveType.of_subset("again", []))
    assert bigger.type_names[-1] == "again"
    assert len(three_state_market.types) == 4


@pytest.mark.parametrize(
    "S, c, price, expected",
    [(4.0, 5.0, 3.0, 0.5), (4.0, 5.0, 5.0, 0.0), (2.0, 1.0, 5.0, -2.0)],
)
def test_pi_star(S, c, price, expected):
    spec = market([S, S + 1], v_star=c + 1, c=c)
    assert pi_star(spec, 0, price) == pytest.approx(expected)


@pytest.mark.parametrize("pi, expected", [(0.0, 2.0), (1.0, 4.0), (0.5, 3.0)])
def test_mean_addon(pi, expected):
    spec = market([4.0, 5.0])
    assert mean_addon(spec, 0, pi) == pytest.approx(expected)


def test_addon_support_and_domain_errors():
    spec = market([4.0, 5.0])
    low, high = addon_support(spec, 0, 0.25)
    assert (float(low), float(high)) == pytest.approx((1.0, 4.0))
    with pytest.raises(SpecError):
        mean_addon(spec, 0, 1.5)
    with pytest.raises(SpecError):
        addon_support(spec, 0, -0.1)


@pytest.mark.parametrize("seed", range(20))
def test_price_addon_maps_invert_each_other(seed):
    rng = np.random.default_rng(seed)
    S, c = rng.uniform(1.0, 10.0), rng.uniform(0.5, 5.0)
    spec = market([S, S + 1.0], v_star=c + 1.0, c=c)
    for state in (0, 1):
        low = c - spec.S[state]
        for h in [c, *rng.uniform(low, c, size=25)]:
            q_bar = mean_addon(spec, state, pi_star(spec, state, h))
            assert float(price_from_addon(spec, state, q_bar)) == pytest.approx(h, abs=1e-12)


def test_price_from_addon(three_state_market):
    spec = market([4.0, 5.0])
    assert price_from_addon(spec, 0, 2.0) == pytest.approx(1.0)
    assert price_from_addon(three_state_market, 0, 2.0) == pytest.approx(0.0)
    q = three_state_market.S - three_state_market.delta
    h = price_from_addon(three_state_market, slice(None), q)
    np.testing.assert_allclose(h, three_state_market.v_star + three_state_market.delta - three_state_market.S)


def test_ree_solution_exploitative(three_state_market):
    sol = ree_solution(three_state_market)
    np.testing.assert_allclose(sol.q_bar, [2.0, 3.0, 3.01], atol=1e-12)
    np.testing.assert_allclose(sol.h, [0.0, -1.0, -1.01], atol=1e-12)
    np.testing.assert_allclose(sol.h + sol.q_bar, three_state_market.v_star)
    assert sol.is_interior


def test_ree_solution_beneficial(beneficial_market):
    sol = ree_solution(beneficial_market)
    assert sol.q_bar[1] == pytest.approx(2.2 / 3)
    assert sol.q_bar[0] == pytest.approx(0.7)


def test_ree_solution_requires_condition():
    spec = market([1.5, 1.8], v_star=2.0, c=1.0)
    with pytest.raises(NoInteriorEquilibrium, match="2Δ=2 < S\\^min=1.5") as info:
        ree_solution(spec)
    assert info.value.violations


def test_check_conditions(three_state_market, beneficial_market):
    report = check_conditions(three_state_market)
    assert report.exploitative_interior and report.ree_condition
    assert report.guarantee == "exploitative_interior"

    beneficial = check_conditions(beneficial_market)
    assert beneficial.beneficial_interior and beneficial.ree_condition
    assert beneficial.guarantee == "beneficial_interior"

    failing = check_conditions(market([1.5, 1.8]))
    assert not failing.ree_condition
    assert not failing.exploitative_interior
    assert failing.guarantee is None
