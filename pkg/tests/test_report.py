"""Solution serialization."""

import io
import json

import pandas as pd
import pytest

from discerning_market.beliefs import CognitiveType
from discerning_market.report import CSV_COLUMNS, serialize_solution, solution_to_dict
from discerning_market.solver import solve


def test_csv_has_fixed_columns(three_state_market):
    text = serialize_solution(solve(three_state_market), "csv")
    frame = pd.read_csv(io.StringIO(text), dtype={"state": str})
    assert tuple(frame.columns) == CSV_COLUMNS
    assert len(frame) == 3
    assert list(frame["state"]) == ["0,0", "0,1", "1,0"]
    assert frame["q_bar"].tolist() == pytest.approx([2.0, 2.66666666667, 2.67333333333], abs=1e-10)
    assert list(frame["argmin_types"]) == ["rational", "only_theta1", "only_theta2"]
    assert frame["interior"].all()


def test_csv_joins_tied_types(three_state_market):
    twin = three_state_market.add_type(CognitiveType.of_subset("rational_twin", [0, 1]))
    text = serialize_solution(solve(twin), "csv")
    assert "rational;rational_twin" in text


def test_json_mirrors_solution(beneficial_rational_market):
    sol = solve(beneficial_rational_market)
    data = json.loads(serialize_solution(sol, "json"))
    assert data["variant"] == "beneficial"
    assert data["state_labels"] == ["0", "1"]
    assert data["q_bar"] == pytest.approx([0.693333333333, 0.733333333333], abs=1e-12)
    assert data["argmin_types"] == [["fully_coarse"], ["rational"]]
    assert set(data["estimates"]) == {"fully_coarse", "rational"}
    assert data["diagnostics"]["method"] == "value-iteration"
    assert data["welfare"]["total_social_surplus"] == pytest.approx(sol.welfare.total_social_surplus, abs=1e-11)
    assert data["collisions"] == []


def test_numbers_keep_twelve_significant_digits(three_state_market):
    data = solution_to_dict(solve(three_state_market))
    assert data["q_bar"][1] == 2.66666666667


def test_table_output_is_plain_text(three_state_market):
    text = serialize_solution(solve(three_state_market), "table")
    assert "Equilibrium" in text
    assert "only_theta1" in text
    assert "\x1b[" not in text


def test_unknown_format(three_state_market):
    with pytest.raises(ValueError):
        serialize_solution(solve(three_state_market), "xml")
