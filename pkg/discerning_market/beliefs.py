"""Cognitive types and the belief transition matrices they induce.

A coarse type conditions on a subset of the state variables; a DAG type
distorts the objective joint over (θ, φ, q) through Bayesian-network
factorization. Under a fully revealing price function both reduce to a
row-stochastic matrix β over "virtual" states, which is all the solver needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import TYPE_CHECKING, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

if TYPE_CHECKING:
    from .core import StateSpace

PRICE = "phi"
ADDON = "q"
ROW_TOL = 1e-10
NEG_TOL = 1e-12


class DagError(ValueError):
    """Structural problem with a causal DAG, or a bad query against one."""

    def __init__(self, message: str, violations: Sequence[str] = ()):
        super().__init__(message)
        self.violations = tuple(violations) or (message,)


class UnsupportedDag(ValueError):
    """The DAG has no transition-matrix representation (not perfect, or carries a signal)."""


class NodeKind(str, Enum):
    PRICE = "price"
    ADDON = "addon"
    STATE = "state"
    SIGNAL = "signal"


@dataclass(frozen=True)
class DagNode:
    name: str
    kind: NodeKind


@dataclass(frozen=True)
class CausalDag:
    """Subjective causal model G = (N, R). Construction does not validate; see `validate_dag`."""

    nodes: Tuple[DagNode, ...]
    edges: FrozenSet[Tuple[str, str]]

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[Sequence[str]],
        nodes: Iterable[str] = (),
        signal: Optional[str] = None,
    ) -> "CausalDag":
        """Build a DAG from (parent, child) pairs. `phi` and `q` are always present."""
        edges = frozenset((str(a), str(b)) for a, b in edges)
        order: List[str] = []
        for name in list(nodes) + [x for e in sorted(edges) for x in e]:
            if name not in order and name not in (PRICE, ADDON):
                order.append(name)
        if signal is not None and signal not in order:
            order.append(signal)
        dag_nodes = [DagNode(name, NodeKind.SIGNAL if name == signal else NodeKind.STATE) for name in order]
        dag_nodes += [DagNode(PRICE, NodeKind.PRICE), DagNode(ADDON, NodeKind.ADDON)]
        return cls(tuple(dag_nodes), edges)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(n.name for n in self.nodes)

    def kind(self, name: str) -> NodeKind:
        for node in self.nodes:
            if node.name == name:
                return node.kind
        raise DagError(f"unknown node {name!r}")

    @property
    def state_nodes(self) -> Tuple[str, ...]:
        return tuple(n.name for n in self.nodes if n.kind is NodeKind.STATE)

    @property
    def signal(self) -> Optional[str]:
        signals = [n.name for n in self.nodes if n.kind is NodeKind.SIGNAL]
        return signals[0] if signals else None

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.names)
        g.add_edges_from(self.edges)
        return g

    def parents(self, name: str) -> Tuple[str, ...]:
        preds = set(self.graph.predecessors(name))
        return tuple(n for n in self.names if n in preds)

    def without_signal(self) -> "CausalDag":
        sig = self.signal
        if sig is None:
            return self
        return CausalDag(
            tuple(n for n in self.nodes if n.name != sig),
            frozenset(e for e in self.edges if sig not in e),
        )

    def describe(self) -> str:
        if not self.edges:
            return "no edges"
        return ", ".join(f"{a}->{b}" for a, b in sorted(self.edges))


_FORBIDDEN = {
    (NodeKind.PRICE, NodeKind.STATE),
    (NodeKind.ADDON, NodeKind.STATE),
    (NodeKind.PRICE, NodeKind.SIGNAL),
    (NodeKind.ADDON, NodeKind.SIGNAL),
}


def validate_dag(dag: CausalDag, space: Optional["StateSpace"] = None) -> List[str]:
    """Every structural violation of `dag`; an empty list means the DAG is admissible."""
    violations = []
    names = dag.names
    if len(set(names)) != len(names):
        violations.append("duplicate node names")
    kinds = [n.kind for n in dag.nodes]
    if kinds.count(NodeKind.PRICE) != 1:
        violations.append("exactly one price node (phi) is required")
    if kinds.count(NodeKind.ADDON) != 1:
        violations.append("exactly one add-on node (q) is required")
    if kinds.count(NodeKind.SIGNAL) > 1:
        violations.append("at most one signal node is allowed")
    if space is not None:
        for name in dag.state_nodes:
            if name not in space.names:
                violations.append(f"node {name!r} is not a state variable")

    known = set(names)
    for a, b in sorted(dag.edges):
        if a not in known or b not in known:
            violations.append(f"edge {a}->{b} references an unknown node")
            continue
        if a == b:
            violations.append(f"edge {a}->{b} is a self-loop")
            continue
        ka, kb = dag.kind(a), dag.kind(b)
        if (ka, kb) in _FORBIDDEN:
            violations.append(f"edge {a}->{b}: {ka.value} node may not cause a {kb.value} node")
        if ka is NodeKind.SIGNAL:
            violations.append(f"edge {a}->{b}: signal node must have no children")
        if kb is NodeKind.SIGNAL and ka is not NodeKind.STATE:
            violations.append(f"edge {a}->{b}: signal parents must be state variables")

    if not violations and not nx.is_directed_acyclic_graph(dag.graph):
        cycle = nx.find_cycle(dag.graph)
        violations.append("cycle " + " -> ".join(a for a, _ in cycle) + f" -> {cycle[0][0]}")
    return violations


def require_valid(dag: CausalDag, space: Optional["StateSpace"] = None) -> None:
    violations = validate_dag(dag, space)
    if violations:
        raise DagError("invalid DAG: " + "; ".join(violations), violations)


def is_perfect(dag: CausalDag) -> bool:
    """True iff the parents of every node are pairwise linked."""
    g = dag.graph
    for node in dag.names:
        parents = dag.parents(node)
        for i, a in enumerate(parents):
            for b in parents[i + 1:]:
                if not (g.has_edge(a, b) or g.has_edge(b, a)):
                    return False
    return True


def encode_coarse(subset: Iterable[int], space: "StateSpace") -> CausalDag:
    """DAG form of a coarse type: a clique on θ_M, with R(φ) = R(q) = M."""
    members = [space.names[i] for i in sorted(set(subset))]
    edges = [(a, b) for i, a in enumerate(members) for b in members[i + 1:]]
    edges += [(m, PRICE) for m in members] + [(m, ADDON) for m in members]
    return CausalDag.from_edges(edges, nodes=members)


@dataclass(frozen=True)
class CognitiveType:
    """A consumer's subjective model: a coarse subset of variable indices, or a causal DAG."""

    name: str
    coarse: Optional[FrozenSet[int]] = None
    dag: Optional[CausalDag] = None

    def __post_init__(self):
        if (self.coarse is None) == (self.dag is None):
            raise ValueError(f"type {self.name!r}: exactly one of coarse / dag must be given")
        if self.coarse is not None:
            object.__setattr__(self, "coarse", frozenset(int(i) for i in self.coarse))

    @classmethod
    def of_subset(cls, name: str, subset: Iterable[int]) -> "CognitiveType":
        return cls(name, coarse=frozenset(subset))

    @classmethod
    def of_dag(cls, name: str, dag: CausalDag) -> "CognitiveType":
        return cls(name, dag=dag)

    @property
    def is_coarse(self) -> bool:
        return self.coarse is not None

    def validate(self, space: "StateSpace") -> None:
        if self.coarse is not None:
            bad = [i for i in self.coarse if not 0 <= i < space.n]
            if bad:
                raise DagError(f"type {self.name!r}: variable indices {bad} out of range")
        else:
            violations = validate_dag(self.dag, space)
            if violations:
                raise DagError(f"type {self.name!r}: " + "; ".join(violations), violations)

    def describe(self, space: Optional["StateSpace"] = None) -> str:
        if self.coarse is not None:
            members = sorted(self.coarse)
            if space is not None:
                return "coarse{" + ", ".join(space.names[i] for i in members) + "}"
            return "coarse{" + ", ".join(str(i) for i in members) + "}"
        return "dag[" + self.dag.describe() + "]"


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic belief weights β(θ′ | θ); row θ is the actual state."""

    beta: np.ndarray

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        if beta.ndim != 2 or beta.shape[0] != beta.shape[1]:
            raise ValueError(f"transition matrix must be square, got shape {beta.shape}")
        if np.any(beta < -NEG_TOL):
            raise ValueError("transition matrix has negative entries")
        beta[beta < 0] = 0.0
        rows = beta.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > ROW_TOL):
            raise ValueError(f"transition matrix rows must sum to 1 (worst {rows[np.argmax(np.abs(rows - 1))]:.12g})")
        beta.flags.writeable = False
        object.__setattr__(self, "beta", beta)

    @property
    def size(self) -> int:
        return self.beta.shape[0]

    def is_identity(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.beta - np.eye(self.size))) <= tol)

    def preserves(self, mu: np.ndarray, tol: float = ROW_TOL) -> bool:
        """μ-invariance: μᵀβ = μᵀ."""
        return bool(np.max(np.abs(np.asarray(mu) @ self.beta - mu)) <= tol)


def _as_beta(beta) -> np.ndarray:
    return beta.beta if isinstance(beta, TransitionMatrix) else np.asarray(beta, dtype=float)


def addon_estimate(beta, state, q_bar):
    """Σ_θ′ β(θ′|θ) q̄(θ′): a type's add-on estimate when the price reveals `state`."""
    return _as_beta(beta)[state] @ np.asarray(q_bar, dtype=float)


def coarse_to_beta(subset: Iterable[int], space: "StateSpace", mu) -> TransitionMatrix:
    """β(θ′|θ) = μ(θ′ | θ′_M = θ_M)."""
    members = sorted(set(subset))
    mu = np.asarray(mu, dtype=float)
    keys = space.codes[:, members]
    same = np.all(keys[:, None, :] == keys[None, :, :], axis=-1)
    weights = same * mu[None, :]
    return TransitionMatrix(weights / weights.sum(axis=1, keepdims=True))


@dataclass(frozen=True)
class JointTable:
    """Dense joint distribution with one named axis per variable."""

    names: Tuple[str, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        names = tuple(self.names)
        if values.ndim != len(names):
            raise DagError(f"joint has {values.ndim} axes but {len(names)} names")
        if len(set(names)) != len(names):
            raise DagError(f"duplicate axis names {names}")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def shape_of(self, name: str) -> int:
        return self.values.shape[self.names.index(name)]

    def marginal(self, keep: Sequence[str]) -> "JointTable":
        keep = tuple(keep)
        missing = [n for n in keep if n not in self.names]
        if missing:
            raise DagError(f"joint has no axis for {missing}")
        drop = tuple(i for i, n in enumerate(self.names) if n not in keep)
        values = self.values.sum(axis=drop) if drop else self.values
        remaining = [n for n in self.names if n in keep]
        return JointTable(keep, np.transpose(values, [remaining.index(n) for n in keep]))


def factorize(dag: CausalDag, joint: JointTable) -> JointTable:
    """Distorted joint p_G(x_N) = Π_i p(x_i | x_R(i)) over the DAG's nodes, in node order.

    A factor whose conditioning event has zero probability contributes 0.
    """
    missing = [n for n in dag.names if n not in joint.names]
    if missing:
        raise DagError(f"joint has no axis for DAG nodes {missing}")
    if abs(joint.total - 1.0) > 1e-9:
        raise DagError(f"joint is not normalized (total {joint.total:.12g})")
    names = dag.names
    values = joint.marginal(names).values
    all_axes = range(len(names))
    out = np.ones_like(values)
    for i, node in enumerate(names):
        parents = {names.index(p) for p in dag.parents(node)}
        family = parents | {i}
        fam = values.sum(axis=tuple(a for a in all_axes if a not in family), keepdims=True)
        if parents:
            par = values.sum(axis=tuple(a for a in all_axes if a not in parents), keepdims=True)
            fam = np.divide(fam, par, out=np.zeros_like(fam), where=par > 0)
        out = out * fam
    return JointTable(names, out)


def revealing_joint(
    space: "StateSpace",
    mu,
    q_law: Optional[np.ndarray] = None,
    signal: Optional[np.ndarray] = None,
    signal_name: str = "w",
    variables: Optional[Sequence[str]] = None,
) -> JointTable:
    """Fully revealing joint over (θ_vars, [w], φ, q): φ is the state index.

    `q_law[θ, k]` is p(q = k | θ) (default: a distinct point-mass label per state);
    `signal[θ, w]` is p(w | θ). `variables` restricts the θ axes that are kept.
    """
    mu = np.asarray(mu, dtype=float)
    size = space.size
    q_law = np.eye(size) if q_law is None else np.asarray(q_law, dtype=float)
    keep = list(space.names if variables is None else variables)
    idx = [space.variable_index(v) for v in keep]
    dims = [len(space.variables[i].domain) for i in idx]
    shape = dims + ([signal.shape[1]] if signal is not None else []) + [size, q_law.shape[1]]
    values = np.zeros(shape)
    for s in range(size):
        code = tuple(space.codes[s, idx])
        block = mu[s] * q_law[s]
        if signal is not None:
            values[code + (slice(None), s)] += np.outer(np.asarray(signal[s], dtype=float), block)
        else:
            values[code + (s,)] += block
    names = keep + ([signal_name] if signal is not None else []) + [PRICE, ADDON]
    return JointTable(tuple(names), values)


def dag_to_beta(
    dag: CausalDag,
    space: "StateSpace",
    mu,
    labels: Optional[Sequence[int]] = None,
) -> TransitionMatrix:
    """Transition matrix of a perfect DAG, read off the indicator-basis joint.

    q takes a distinct label per state (`labels[θ]`, identity by default), so
    β(θ′|θ) = p_G(q = labels[θ′] | φ = θ).
    """
    require_valid(dag, space)
    if dag.signal is not None:
        raise UnsupportedDag("DAG carries a signal node; use belief_with_signal")
    if not is_perfect(dag):
        raise UnsupportedDag("DAG is not perfect: some node's parents do not form a clique")
    size = space.size
    labels = np.arange(size) if labels is None else np.asarray(labels, dtype=int)
    if sorted(labels.tolist()) != list(range(size)):
        raise DagError("labels must be a permutation of the state indices")
    q_law = np.zeros((size, size))
    q_law[np.arange(size), labels] = 1.0
    joint = revealing_joint(space, mu, q_law=q_law, variables=dag.state_nodes)
    pg = factorize(dag, joint).marginal((PRICE, ADDON)).values
    rows = pg.sum(axis=1, keepdims=True)
    if np.any(rows <= 0):
        raise UnsupportedDag("distorted belief puts no mass on some observed price")
    return TransitionMatrix((pg / rows)[:, labels])


def type_to_beta(t: CognitiveType, space: "StateSpace", mu) -> TransitionMatrix:
    if t.coarse is not None:
        return coarse_to_beta(t.coarse, space, mu)
    return dag_to_beta(t.dag, space, mu)


def blocks(dag: CausalDag, members: Iterable[str], i: str, j: str) -> bool:
    """True iff every path between i and j in the undirected skeleton passes through `members`."""
    members = set(members)
    if i in members or j in members:
        raise DagError(f"endpoints {i!r}, {j!r} must lie outside the blocking set")
    for name in (i, j, *members):
        if name not in dag.names:
            raise DagError(f"unknown node {name!r}")
    skeleton = dag.graph.to_undirected()
    skeleton.remove_nodes_from(members)
    return not nx.has_path(skeleton, i, j)


def addon_belief(dag: CausalDag, joint: JointTable, given: Sequence[str] = (PRICE,)) -> np.ndarray:
    """p_G(q | given), indexed [given..., q]; rows with no distorted mass are NaN."""
    pg = factorize(dag, joint).marginal(tuple(given) + (ADDON,)).values
    den = pg.sum(axis=-1, keepdims=True)
    out = np.full_like(pg, np.nan)
    np.divide(pg, np.broadcast_to(den, pg.shape), out=out, where=np.broadcast_to(den > 0, pg.shape))
    return out


def belief_with_signal(dag: CausalDag, joint: JointTable) -> np.ndarray:
    """p_G(q | φ, w) indexed [φ, w, q]; undefined (φ, w) rows are NaN."""
    if dag.signal is None:
        raise DagError("DAG has no signal node")
    require_valid(dag)
    return addon_belief(dag, joint, (PRICE, dag.signal))
