"""
discerning-market

Equilibrium solver for add-on pricing markets whose consumers draw
inferences from prices through coarse or causal-DAG models.
"""

import importlib.metadata

try:
    __version__ = importlib.metadata.version("discerning-market")
except importlib.metadata.PackageNotFoundError:
    # Fallback for development mode
    __version__ = "0.1.0-dev"

from .beliefs import CausalDag, CognitiveType, TransitionMatrix, type_to_beta
from .config import ScenarioConfig, load_config, parse_config, serialize_config
from .core import MarketSpec, NoInteriorEquilibrium, SpecError, StateSpace, Variant, ree_solution
from .solver import EquilibriumSolution, SolverOptions, solve

__all__ = [
    "CausalDag",
    "CognitiveType",
    "EquilibriumSolution",
    "MarketSpec",
    "NoInteriorEquilibrium",
    "ScenarioConfig",
    "SolverOptions",
    "SpecError",
    "StateSpace",
    "TransitionMatrix",
    "Variant",
    "load_config",
    "parse_config",
    "ree_solution",
    "serialize_config",
    "solve",
    "type_to_beta",
]
