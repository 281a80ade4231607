"""Shared pytest fixtures."""

import numpy as np
import pytest

from discerning_market.config import parse_config
from discerning_market.scenarios import SCENARIOS


def load_scenario(name: str):
    return parse_config(SCENARIOS[name]).spec


@pytest.fixture
def three_state_market():
    return load_scenario("three_state")


@pytest.fixture
def beneficial_market():
    return load_scenario("beneficial_coarse")


@pytest.fixture
def beneficial_rational_market():
    return load_scenario("beneficial_with_rational")


@pytest.fixture
def chain_market():
    return load_scenario("chain_dags")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def scenario_file(tmp_path):
    """Write a YAML document (a built-in scenario name or raw text) and return its path."""

    def write(text_or_name: str, filename: str = "market.yml"):
        text = SCENARIOS.get(text_or_name, text_or_name)
        path = tmp_path / filename
        path.write_text(text, encoding="utf-8")
        return path

    return write
