"""Built-in scenario documents, in the same YAML grammar `discern` reads from disk."""

from __future__ import annotations

from typing import Dict

THREE_STATE = """\
# Two binary variables, uniform on three states; every coarse subset trades.
name: three_state
variables:
  theta1: ["0", "1"]
  theta2: ["0", "1"]
variant: exploitative
v_star: 2
c: 1
mu: uniform
support: ["0,0", "0,1", "1,0"]
S:
  "0,0": 3
  "0,1": 4
  "1,0": 4.01
types:
  - name: rational
    coarse: [theta1, theta2]
  - name: only_theta1
    coarse: [theta1]
  - name: only_theta2
    coarse: [theta2]
  - name: fully_coarse
    coarse: []
"""

BENEFICIAL_COARSE = """\
# Mutually beneficial add-on with a single fully coarse type.
name: beneficial_coarse
variables:
  theta: ["0", "1"]
variant: beneficial
v_star: 0
c: 1.2
mu: uniform
S:
  "0": 0.9
  "1": 1
types:
  - name: fully_coarse
    coarse: []
"""

BENEFICIAL_WITH_RATIONAL = """\
# Same market with a rational type added: quality rises at 0 and falls at 1.
name: beneficial_with_rational
variables:
  theta: ["0", "1"]
variant: beneficial
v_star: 0
c: 1.2
mu: uniform
S:
  "0": 0.9
  "1": 1
types:
  - name: fully_coarse
    coarse: []
  - name: rational
    coarse: [theta]
"""

CHAIN_DAGS = """\
# The three_state market with two chain DAGs instead of the partial subsets.
name: chain_dags
variables:
  theta1: ["0", "1"]
  theta2: ["0", "1"]
variant: exploitative
v_star: 2
c: 1
mu: uniform
support: ["0,0", "0,1", "1,0"]
S:
  "0,0": 3
  "0,1": 4
  "1,0": 4.01
types:
  - name: rational
    coarse: [theta1, theta2]
  - name: chain_1
    dag:
      edges: [[theta1, phi], [theta1, theta2], [theta2, q]]
  - name: chain_2
    dag:
      edges: [[theta2, phi], [theta2, theta1], [theta1, q]]
"""

COMOVEMENT = """\
# theta3 = theta1 XOR theta2; the add-on loads on theta2 while the DAG
# reads the price through theta1 and reaches q via theta3.
name: comovement
variables:
  theta1: ["0", "1"]
  theta2: ["0", "1"]
  theta3: ["0", "1"]
variant: exploitative
v_star: 2
c: 1
mu: uniform
support: ["0,0,0", "0,1,1", "1,0,1", "1,1,0"]
S:
  "0,0,0": 3
  "0,1,1": 4.02
  "1,0,1": 3.03
  "1,1,0": 4.01
types:
  - name: comovement
    dag:
      edges: [[theta1, phi], [theta1, theta3], [theta3, theta2], [theta2, q]]
"""

SCENARIOS: Dict[str, str] = {
    "three_state": THREE_STATE,
    "beneficial_coarse": BENEFICIAL_COARSE,
    "beneficial_with_rational": BENEFICIAL_WITH_RATIONAL,
    "chain_dags": CHAIN_DAGS,
    "comovement": COMOVEMENT,
}
