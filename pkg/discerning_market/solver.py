"""Fixed-point solver for the market equilibrium.

The equilibrium add-on vector q̄ solves

    exploitative: q̄(θ) = ½[S(θ) − Δ + min_t Σ β_t(θ′|θ) q̄(θ′)]
    beneficial:   q̄(θ) = ½[S(θ) − Δ − max_t Σ β_t(θ′|θ) q̄(θ′)]

Both maps are sup-norm contractions with modulus ½. The exploitative one is
the Bellman equation of a min-cost MDP whose actions are the cognitive types,
so policy iteration and exhaustive policy enumeration give independent checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .beliefs import TransitionMatrix, type_to_beta
from .core import MarketSpec, NoInteriorEquilibrium, SpecError, Variant, price_from_addon
from .rich_console import log_warning

ORACLE_BUDGET = 1_000_000
ORACLE_CHUNK = 4096
CROSS_CHECK_TOL = 1e-9
COLLISION_PREVIEW = 10


class ConvergenceFailure(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-12
    max_iter: int = 500
    interior_margin: float = 1e-9
    tie_tol: float = 1e-9
    cross_check: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"solver.tol must be positive (got {self.tol})")
        if int(self.max_iter) < 1:
            raise ValueError(f"solver.max_iter must be at least 1 (got {self.max_iter})")


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    residual: float
    method: str
    policy_gap: Optional[float] = None


@dataclass(frozen=True, eq=False)
class WelfareReport:
    social_surplus: np.ndarray
    consumer_net_payoff: np.ndarray
    exante_consumer_loss: float
    total_social_surplus: float


@dataclass(frozen=True, eq=False)
class EquilibriumSolution:
    """Per-state equilibrium quantities, indexed like `state_labels`."""

    state_labels: Tuple[str, ...]
    S: np.ndarray
    mu: np.ndarray
    q_bar: np.ndarray
    h: np.ndarray
    pi_star: np.ndarray
    estimates: np.ndarray
    type_names: Tuple[str, ...]
    argmin_types: Tuple[Tuple[str, ...], ...]
    interior: np.ndarray
    variant: Variant
    diagnostics: SolverDiagnostics
    welfare: Optional[WelfareReport] = None
    collisions: Tuple[Tuple[str, str], ...] = field(default=())

    @property
    def is_interior(self) -> bool:
        return bool(np.all(self.interior))

    @property
    def exante_addon(self) -> float:
        return float(self.mu @ self.q_bar)

    @property
    def expected_price(self) -> float:
        return float(self.mu @ self.h)

    def violations(self) -> List[str]:
        out = []
        for i in np.flatnonzero(~self.interior):
            out.append(
                f"state {self.state_labels[i]}: q_bar={self.q_bar[i]:.12g} outside "
                f"({0.5 * self.S[i]:.12g}, {self.S[i]:.12g})"
            )
        return out


def _stack(betas: Sequence) -> np.ndarray:
    if len(betas) == 0:
        raise SpecError("at least one belief matrix is required")
    return np.stack([b.beta if isinstance(b, TransitionMatrix) else np.asarray(b, dtype=float) for b in betas])


def type_estimates(q_bar, betas) -> np.ndarray:
    """Add-on estimates E_t(q | θ), shape (types, states)."""
    return _stack(betas) @ np.asarray(q_bar, dtype=float)


def _extremal(spec: MarketSpec, estimates: np.ndarray) -> np.ndarray:
    if spec.variant is Variant.EXPLOITATIVE:
        return estimates.min(axis=0)
    return estimates.max(axis=0)


def _apply(spec: MarketSpec, estimates: np.ndarray) -> np.ndarray:
    sign = 1.0 if spec.variant is Variant.EXPLOITATIVE else -1.0
    return 0.5 * (spec.S - spec.delta + sign * _extremal(spec, estimates))


def bellman_operator(q_bar, spec: MarketSpec, betas) -> np.ndarray:
    return _apply(spec, type_estimates(q_bar, betas))


def value_iteration(
    spec: MarketSpec,
    betas,
    tol: float = 1e-12,
    max_iter: int = 500,
    start=None,
) -> Tuple[np.ndarray, SolverDiagnostics]:
    """Iterate q̄ ← T(q̄) from ½S (or `start`) until the sup-norm step drops below `tol`."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    B = _stack(betas)
    q = 0.5 * spec.S if start is None else np.asarray(start, dtype=float).copy()
    step = float("inf")
    for it in range(1, int(max_iter) + 1):
        nxt = _apply(spec, B @ q)
        step = float(np.max(np.abs(nxt - q)))
        q = nxt
        if step < tol:
            return q, SolverDiagnostics(it, step, "value-iteration")
    raise ConvergenceFailure(
        f"value iteration did not converge in {max_iter} iterations (last step {step:.3g})",
        residual=step,
        iterations=int(max_iter),
    )


def policy_value(policy: Sequence[int], spec: MarketSpec, betas) -> np.ndarray:
    """Exact value of a stationary type assignment: (I ∓ ½B_σ) q̄ = ½(S − Δ)."""
    B = _stack(betas)
    policy = np.asarray(policy, dtype=int)
    n = spec.space.size
    if policy.shape != (n,) or np.any((policy < 0) | (policy >= B.shape[0])):
        raise SpecError(f"policy must assign one of {B.shape[0]} types to each of {n} states")
    sign = 1.0 if spec.variant is Variant.EXPLOITATIVE else -1.0
    system = np.eye(n) - sign * 0.5 * B[policy, np.arange(n)]
    try:
        return np.linalg.solve(system, 0.5 * (spec.S - spec.delta))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"policy evaluation system is singular: {exc}") from exc


def _first_argmin(estimates: np.ndarray, tol: float) -> np.ndarray:
    best = estimates.min(axis=0)
    return np.argmax(estimates <= best + tol, axis=0)


def policy_iteration(
    spec: MarketSpec,
    betas,
    max_iter: int = 500,
    tie_tol: float = 1e-12,
) -> Tuple[np.ndarray, Tuple[int, ...], int]:
    """Howard policy iteration; returns (q̄, lexicographically-first optimal policy, iterations)."""
    if spec.variant is not Variant.EXPLOITATIVE:
        raise SpecError("policy iteration supports only the exploitative variant")
    B = _stack(betas)
    n = spec.space.size
    cols = np.arange(n)
    policy = np.zeros(n, dtype=int)
    for it in range(1, int(max_iter) + 1):
        q = policy_value(policy, spec, B)
        est = B @ q
        best = est.min(axis=0)
        keep = est[policy, cols] <= best + tie_tol
        improved = np.where(keep, policy, _first_argmin(est, tie_tol))
        if np.array_equal(improved, policy):
            final = _first_argmin(est, tie_tol)
            return q, tuple(int(i) for i in final), it
        policy = improved
    raise ConvergenceFailure(f"policy iteration did not stabilise in {max_iter} rounds", iterations=int(max_iter))


def brute_force_oracle(spec: MarketSpec, betas, budget: int = ORACLE_BUDGET) -> np.ndarray:
    """Pointwise minimum of the exact values of every stationary policy."""
    if spec.variant is not Variant.EXPLOITATIVE:
        raise SpecError("the enumeration oracle supports only the exploitative variant")
    B = _stack(betas)
    k, n = B.shape[0], spec.space.size
    if k ** n > budget:
        raise SpecError(f"{k}^{n} policies exceed the enumeration budget of {budget}")
    rhs = 0.5 * (spec.S - spec.delta)
    cols = np.arange(n)
    eye = np.eye(n)
    best = np.full(n, np.inf)
    policies = itertools.product(range(k), repeat=n)
    while True:
        chunk = np.array(list(itertools.islice(policies, ORACLE_CHUNK)), dtype=int)
        if chunk.size == 0:
            return best
        systems = eye - 0.5 * B[chunk, cols]
        values = np.linalg.solve(systems, np.broadcast_to(rhs, chunk.shape)[..., None])[..., 0]
        best = np.minimum(best, values.min(axis=0))


def _welfare(spec: MarketSpec, q_bar: np.ndarray, h: np.ndarray, pi: np.ndarray) -> WelfareReport:
    if spec.variant is Variant.EXPLOITATIVE:
        social = (1.0 - pi) * spec.delta
        net = spec.delta - spec.S + q_bar
    else:
        social = (1.0 - pi) * spec.delta + (1.0 - pi ** 2) * spec.S
        net = spec.v_star + q_bar - h
    loss = float(np.sum(spec.mu * (1.0 - pi) * np.maximum(0.0, -net)))
    return WelfareReport(social, net, loss, float(spec.mu @ social))


def welfare(solution: EquilibriumSolution, spec: MarketSpec) -> WelfareReport:
    if not solution.is_interior:
        raise NoInteriorEquilibrium(
            "welfare is defined only for interior equilibria",
            solution=solution,
            violations=solution.violations(),
        )
    return _welfare(spec, solution.q_bar, solution.h, solution.pi_star)


def full_revelation_check(solution: EquilibriumSolution, tol: float = 1e-9) -> Tuple[Tuple[str, str], ...]:
    """State pairs whose prices coincide within `tol`; empty when the price function is one-to-one."""
    h = solution.h
    close = np.abs(h[:, None] - h[None, :]) <= tol
    i, j = np.nonzero(np.triu(close, k=1))
    return tuple((solution.state_labels[a], solution.state_labels[b]) for a, b in zip(i, j))


def assemble_solution(
    spec: MarketSpec,
    q_bar,
    estimates,
    type_names: Sequence[str],
    method: str,
    diagnostics: Optional[SolverDiagnostics] = None,
    options: Optional[SolverOptions] = None,
) -> EquilibriumSolution:
    """Derive prices, thresholds, trading sets, interiority and welfare from a solved q̄."""
    options = options or SolverOptions()
    q_bar = np.array(q_bar, dtype=float)
    estimates = np.array(np.atleast_2d(estimates), dtype=float)
    h = price_from_addon(spec, slice(None), q_bar)
    pi = (spec.c - h) / spec.S
    ext = _extremal(spec, estimates)
    if spec.variant is Variant.EXPLOITATIVE:
        trading = estimates <= ext + options.tie_tol
    else:
        trading = estimates >= ext - options.tie_tol
    argmin_types = tuple(
        tuple(name for name, hit in zip(type_names, trading[:, s]) if hit) for s in range(q_bar.size)
    )
    interior = (q_bar > 0.5 * spec.S + options.interior_margin) & (q_bar < spec.S - options.interior_margin)
    if diagnostics is None:
        residual = float(np.max(np.abs(_apply(spec, estimates) - q_bar)))
        diagnostics = SolverDiagnostics(0, residual, method)

    for arr in (q_bar, h, pi, interior):
        arr.flags.writeable = False
    solution = EquilibriumSolution(
        state_labels=tuple(spec.space.labels()),
        S=spec.S,
        mu=spec.mu,
        q_bar=q_bar,
        h=h,
        pi_star=pi,
        estimates=estimates,
        type_names=tuple(type_names),
        argmin_types=argmin_types,
        interior=interior,
        variant=spec.variant,
        diagnostics=diagnostics,
    )
    extras = {"collisions": full_revelation_check(solution, options.interior_margin)}
    if solution.is_interior:
        extras["welfare"] = _welfare(spec, q_bar, h, pi)
    return replace(solution, **extras)


def collision_summary(collisions: Sequence[Tuple[str, str]]) -> str:
    """Warning text for coinciding prices, listing at most COLLISION_PREVIEW pairs."""
    pairs = ", ".join(f"({a}; {b})" for a, b in collisions[:COLLISION_PREVIEW])
    hidden = len(collisions) - COLLISION_PREVIEW
    if hidden > 0:
        pairs += f" and {hidden} more"
    return f"Equilibrium prices coincide across states: {pairs}"


def build_betas(spec: MarketSpec) -> List[TransitionMatrix]:
    return [type_to_beta(t, spec.space, spec.mu) for t in spec.types]


def solve(
    spec: MarketSpec,
    options: Optional[SolverOptions] = None,
    require_interior: bool = True,
) -> EquilibriumSolution:
    """Unique interior equilibrium of `spec`.

    Raises NoInteriorEquilibrium (carrying the candidate) when some state
    falls outside ½S < q̄ < S and `require_interior` is set.
    """
    options = options or SolverOptions()
    betas = build_betas(spec)
    q_bar, diagnostics = value_iteration(spec, betas, options.tol, options.max_iter)

    if spec.variant is Variant.EXPLOITATIVE and options.cross_check:
        q_policy, _, _ = policy_iteration(spec, betas, options.max_iter)
        gap = float(np.max(np.abs(q_policy - q_bar)))
        diagnostics = SolverDiagnostics(diagnostics.iterations, diagnostics.residual, diagnostics.method, gap)
        if gap > CROSS_CHECK_TOL:
            log_warning(f"Policy iteration disagrees with value iteration by {gap:.3g}")

    solution = assemble_solution(
        spec,
        q_bar,
        type_estimates(q_bar, betas),
        spec.type_names,
        diagnostics.method,
        diagnostics=diagnostics,
        options=options,
    )
    if solution.collisions:
        log_warning(collision_summary(solution.collisions))
    if require_interior and not solution.is_interior:
        violations = solution.violations()
        raise NoInteriorEquilibrium(
            "no interior equilibrium: " + "; ".join(violations),
            solution=solution,
            violations=violations,
        )
    return solution
