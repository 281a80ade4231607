"""Serialize equilibrium solutions as a human table, CSV, or JSON."""

from __future__ import annotations

import io
import json
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
from rich.console import Console

from .rich_console import create_estimates_table, create_solution_table, create_welfare_panel
from .solver import EquilibriumSolution

CSV_COLUMNS = ("state", "S", "mu", "q_bar", "h", "pi_star", "argmin_types", "interior")
SIG_DIGITS = 12
TABLE_WIDTH = 120


class OutputFormat(str, Enum):
    TABLE = "table"
    CSV = "csv"
    JSON = "json"


def _num(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    return float(f"{float(x):.{SIG_DIGITS}g}")


def _vec(arr) -> list:
    return [_num(x) for x in np.asarray(arr, dtype=float)]


def solution_to_dict(solution: EquilibriumSolution) -> Dict[str, Any]:
    """Field-for-field mirror of the solution with 12-significant-digit numbers."""
    diag = solution.diagnostics
    welfare = solution.welfare
    return {
        "variant": solution.variant.value,
        "state_labels": list(solution.state_labels),
        "S": _vec(solution.S),
        "mu": _vec(solution.mu),
        "q_bar": _vec(solution.q_bar),
        "h": _vec(solution.h),
        "pi_star": _vec(solution.pi_star),
        "type_names": list(solution.type_names),
        "estimates": {name: _vec(row) for name, row in zip(solution.type_names, solution.estimates)},
        "argmin_types": [list(s) for s in solution.argmin_types],
        "interior": [bool(x) for x in solution.interior],
        "diagnostics": {
            "iterations": int(diag.iterations),
            "residual": _num(diag.residual),
            "method": diag.method,
            "policy_gap": _num(diag.policy_gap),
        },
        "welfare": None
        if welfare is None
        else {
            "social_surplus": _vec(welfare.social_surplus),
            "consumer_net_payoff": _vec(welfare.consumer_net_payoff),
            "exante_consumer_loss": _num(welfare.exante_consumer_loss),
            "total_social_surplus": _num(welfare.total_social_surplus),
        },
        "collisions": [list(pair) for pair in solution.collisions],
    }


def solution_frame(solution: EquilibriumSolution) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "state": list(solution.state_labels),
            "S": solution.S,
            "mu": solution.mu,
            "q_bar": solution.q_bar,
            "h": solution.h,
            "pi_star": solution.pi_star,
            "argmin_types": [";".join(s) for s in solution.argmin_types],
            "interior": [bool(x) for x in solution.interior],
        },
        columns=list(CSV_COLUMNS),
    )


def render(*renderables) -> str:
    """Plain-text rendering of Rich objects at a fixed width."""
    buffer = io.StringIO()
    out = Console(file=buffer, width=TABLE_WIDTH, color_system=None, force_terminal=False, highlight=False)
    for item in renderables:
        out.print(item)
    return buffer.getvalue()


def serialize_solution(solution: EquilibriumSolution, fmt: str = "table") -> str:
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.CSV:
        return solution_frame(solution).to_csv(index=False, float_format=f"%.{SIG_DIGITS}g", lineterminator="\n")
    if fmt is OutputFormat.JSON:
        return json.dumps(solution_to_dict(solution), indent=2) + "\n"
    return render(create_solution_table(solution), create_estimates_table(solution), create_welfare_panel(solution))
