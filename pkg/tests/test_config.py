"""Scenario documents: parsing, validation messages and round trips."""

import pytest

from discerning_market.analysis import lower_bound_scenario
from discerning_market.config import (
    ConfigError,
    dump_config,
    load_config,
    parse_config,
    parse_type,
    serialize_config,
)
from discerning_market.core import Variant
from discerning_market.scenarios import SCENARIOS
from discerning_market.solver import SolverOptions

BASE = """\
variables:
  theta1: [0, 1]
  theta2: [0, 1]
v_star: 2
c: 1
mu:
  "0,0": 0.5
  "0,1": 0.25
  "1,0": 0.25
S: {"0,0": 3, "0,1": 4, "1,0": 4.01}
types:
  - name: rational
    coarse: [theta1, theta2]
"""


def test_parse_three_state():
    cfg = parse_config(SCENARIOS["three_state"])
    spec = cfg.spec
    assert cfg.name == "three_state"
    assert spec.space.labels() == ["0,0", "0,1", "1,0"]
    assert spec.type_names == ("rational", "only_theta1", "only_theta2", "fully_coarse")
    assert spec.variant is Variant.EXPLOITATIVE
    assert list(spec.S) == [3.0, 4.0, 4.01]
    assert cfg.options == SolverOptions()


def test_every_builtin_scenario_parses():
    for name, text in SCENARIOS.items():
        assert parse_config(text).name == name


def test_support_from_mu_keys():
    spec = parse_config(BASE).spec
    assert spec.space.size == 3
    assert spec.mu[0] == pytest.approx(0.5)


def test_dag_type_and_solver_block():
    doc = BASE + """\
  - name: chain
    dag:
      edges: [[theta1, phi], [theta1, theta2], [theta2, q]]
      signal: w
solver:
  tol: 1.0e-10
  max_iter: 50
"""
    cfg = parse_config(doc)
    chain = cfg.spec.types[1]
    assert chain.dag.signal == "w"
    assert ("theta2", "q") in chain.dag.edges
    assert cfg.options.tol == 1e-10 and cfg.options.max_iter == 50


def test_mu_that_does_not_sum_to_one_names_the_field():
    doc = BASE.replace('"0,0": 0.5', '"0,0": 0.49')
    with pytest.raises(ConfigError, match="sum to 0.99") as info:
        parse_config(doc)
    assert info.value.path == "mu"
    assert info.value.line == 6


def test_unknown_variable_in_subset():
    doc = BASE.replace("coarse: [theta1, theta2]", "coarse: [theta1, theta9]")
    with pytest.raises(ConfigError, match="unknown variable 'theta9'") as info:
        parse_config(doc)
    assert info.value.path == "types[0].coarse[1]"
    assert info.value.line == 13


@pytest.mark.parametrize(
    "old, new, path, message",
    [
        ('"0,1": 4,', '"0,1": four,', 'S["0,1"]', "expected a number"),
        ('"1,0": 0.25', '"1,1": 0.25', 'S["1,0"]', "outside the support"),
        ("c: 1", "c: 1\nbogus: 3", "bogus", "unknown field"),
        ("c: 1", "c: 1\nvariant: sideways", "variant", "exploitative"),
        ("theta2: [0, 1]", "theta2: []", "variables.theta2", "non-empty list"),
        ('"0,0": 0.5', '"0,7": 0.5', 'mu["0,7"]', "not in the domain of theta2"),
    ],
)
def test_field_errors(old, new, path, message):
    with pytest.raises(ConfigError, match=message) as info:
        parse_config(BASE.replace(old, new))
    assert info.value.path == path
    assert info.value.line is not None


def test_invalid_dag_is_rejected_with_its_path():
    doc = BASE + """\
  - name: backwards
    dag:
      edges: [[q, theta1]]
"""
    with pytest.raises(ConfigError, match="addon node may not cause") as info:
        parse_config(doc)
    assert info.value.path == "types[1].dag"


def test_type_needs_exactly_one_model():
    doc = BASE.replace("    coarse: [theta1, theta2]\n", "")
    with pytest.raises(ConfigError, match="exactly one of"):
        parse_config(doc)


def test_missing_and_malformed_documents():
    with pytest.raises(ConfigError, match="missing required field 'types'"):
        parse_config(BASE.split("types:")[0])
    with pytest.raises(ConfigError, match="top level"):
        parse_config("- just\n- a list\n")
    with pytest.raises(ConfigError, match="invalid YAML"):
        parse_config("variables: [unclosed\n")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "nope.yml")


def test_load_config_reads_file(scenario_file):
    assert load_config(scenario_file("chain_dags")).name == "chain_dags"


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_serialize_round_trip(name):
    cfg = parse_config(SCENARIOS[name])
    again = parse_config(dump_config(cfg))
    assert again.spec == cfg.spec
    assert again.options == cfg.options
    assert again.name == cfg.name


def test_lower_bound_round_trip():
    spec = lower_bound_scenario(6)
    assert parse_config(serialize_config(spec)).spec == spec


def test_parse_type_forms(three_state_market):
    space = three_state_market.space
    single = parse_type("name: extra\ncoarse: [theta2]\n", space)
    assert [t.name for t in single] == ["extra"]
    listed = parse_type("types:\n  - name: a\n    coarse: []\n  - name: b\n    coarse: [theta1]\n", space)
    assert [t.coarse for t in listed] == [frozenset(), frozenset({0})]
    with pytest.raises(ConfigError):
        parse_type("name: extra\ncoarse: [theta5]\n", space)
    with pytest.raises(ConfigError, match="invalid YAML") as info:
        parse_type("name: [unclosed\n", space)
    assert info.value.line is not None


def test_parse_type_reports_paths_and_lines_of_the_original_document(three_state_market):
    space = three_state_market.space
    with pytest.raises(ConfigError, match="unknown variable 'theta5'") as info:
        parse_type("name: extra\ncoarse: [theta5]\n", space)
    assert info.value.path == "coarse[0]"
    assert info.value.line == 2

    listed = "types:\n  - name: a\n    coarse: []\n  - name: b\n    coarse: [theta1, theta7]\n"
    with pytest.raises(ConfigError) as info:
        parse_type(listed, space)
    assert info.value.path == "types[1].coarse[1]"
    assert info.value.line == 5

    with pytest.raises(ConfigError) as info:
        parse_type("- name: a\n  coarse: []\n- name: b\n  dag: {}\n", space)
    assert info.value.path == "[1].dag"
    assert info.value.line == 4


@pytest.mark.parametrize("reserved", ["q", "phi"])
def test_reserved_node_names_are_not_variables(reserved):
    doc = BASE.replace("  theta2: [0, 1]\n", f"  {reserved}: [0, 1]\n")
    with pytest.raises(ConfigError, match="reserved node name") as info:
        parse_config(doc)
    assert info.value.path == f"variables.{reserved}"
    assert info.value.line == 3
