"""Comparative statics and executable property checks on solved markets.

Every checker returns a report whose `checks` list holds one `PropertyCheck`
per asserted inequality; `report.ok` is True when none of them failed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .beliefs import (
    ADDON,
    PRICE,
    CausalDag,
    CognitiveType,
    DagError,
    blocks,
    dag_to_beta,
    is_perfect,
    type_to_beta,
)
from .core import MarketSpec, SpecError, StateSpace, Variable, Variant
from .solver import EquilibriumSolution, SolverOptions, solve

TOL = 1e-9


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    holds: bool
    details: str = ""

    @property
    def status(self) -> str:
        return "ok" if self.holds else "error"


def _check(name: str, holds, details: str = "") -> PropertyCheck:
    return PropertyCheck(name, bool(holds), details)


class _Report:
    checks: List[PropertyCheck]

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)

    def violations(self) -> List[PropertyCheck]:
        return [c for c in self.checks if not c.holds]


def is_rational(t: CognitiveType, spec: MarketSpec) -> bool:
    """Semantic test: the type's transition matrix is the identity."""
    return type_to_beta(t, spec.space, spec.mu).is_identity()


def has_rational(spec: MarketSpec) -> bool:
    return any(is_rational(t, spec) for t in spec.types)


def _require(spec: MarketSpec, variant: Variant, what: str) -> None:
    if spec.variant is not variant:
        raise SpecError(f"{what} applies to the {variant.value} variant only")


@dataclass(eq=False)
class AddTypeReport(_Report):
    before: EquilibriumSolution
    after: EquilibriumSolution
    new_type: str
    d_q_bar: np.ndarray
    d_h: np.ndarray
    d_social: np.ndarray
    d_net_payoff: np.ndarray
    d_exante_loss: Optional[float]
    checks: List[PropertyCheck] = field(default_factory=list)


def add_type_experiment(
    spec: MarketSpec,
    new_type: CognitiveType,
    options: Optional[SolverOptions] = None,
) -> AddTypeReport:
    """Solve with and without `new_type`.

    Exploitative markets assert that add-ons weakly fall, prices weakly rise,
    social surplus weakly rises and consumer net payoffs weakly fall; with a
    rational type present, the ex-ante consumer loss weakly rises. Beneficial
    markets only report the changes: there the monotonicity can fail.
    """
    before = solve(spec, options)
    after = solve(spec.add_type(new_type), options)
    d_q = after.q_bar - before.q_bar
    d_h = after.h - before.h
    d_social = after.welfare.social_surplus - before.welfare.social_surplus
    d_net = after.welfare.consumer_net_payoff - before.welfare.consumer_net_payoff
    rational = has_rational(spec)
    d_loss = after.welfare.exante_consumer_loss - before.welfare.exante_consumer_loss if rational else None

    checks = []
    if spec.variant is Variant.EXPLOITATIVE:
        checks += [
            _check("add-on weakly falls", d_q.max() <= TOL, f"max change {d_q.max():.3g}"),
            _check("price weakly rises", d_h.min() >= -TOL, f"min change {d_h.min():.3g}"),
            _check("social surplus weakly rises", d_social.min() >= -TOL, f"min change {d_social.min():.3g}"),
            _check("consumer net payoff weakly falls", d_net.max() <= TOL, f"max change {d_net.max():.3g}"),
        ]
        if d_loss is not None:
            checks.append(_check("ex-ante consumer loss weakly rises", d_loss >= -TOL, f"change {d_loss:.3g}"))
    return AddTypeReport(before, after, new_type.name, d_q, d_h, d_social, d_net, d_loss, checks)


@dataclass(eq=False)
class ExpectedAddonReport(_Report):
    exante_addon: float
    ree_level: float
    lower_bound: float
    expected_price: float
    ree_price: float
    singleton: bool
    checks: List[PropertyCheck] = field(default_factory=list)


def expected_addon_audit(
    spec: MarketSpec,
    solution: Optional[EquilibriumSolution] = None,
    options: Optional[SolverOptions] = None,
) -> ExpectedAddonReport:
    """Ex-ante add-on against ½S̄ and its rational-expectations level S̄ − Δ."""
    _require(spec, Variant.EXPLOITATIVE, "the expected add-on audit")
    solution = solution or solve(spec, options)
    value = solution.exante_addon
    ree_level = spec.s_bar - spec.delta
    lower = 0.5 * spec.s_bar
    price = solution.expected_price
    ree_price = spec.v_star + spec.delta - spec.s_bar
    singleton = len(spec.types) == 1
    checks = [
        _check("ex-ante add-on >= S̄/2", value >= lower - TOL, f"{value:.12g} vs {lower:.12g}"),
        _check("ex-ante add-on <= S̄ - Δ", value <= ree_level + TOL, f"{value:.12g} vs {ree_level:.12g}"),
        _check("expected price >= REE level", price >= ree_price - TOL, f"{price:.12g} vs {ree_price:.12g}"),
    ]
    if singleton:
        checks.append(
            _check("singleton type set matches REE add-on", abs(value - ree_level) <= TOL, f"gap {value - ree_level:.3g}")
        )
    return ExpectedAddonReport(value, ree_level, lower, price, ree_price, singleton, checks)


def lower_bound_scenario(n: int, delta: float = 1.0, s_bar: float = 3.0, c: float = 1.0) -> MarketSpec:
    """Market whose ex-ante add-on approaches ½S̄ as n grows.

    Support is the zero state plus the n states e_i with θ_i = 0 and every
    other variable at 1. S(0) sits just above 2Δ and S(e_i) just below 4Δ,
    with perturbations that keep S one-to-one; the zero-state weight α is
    chosen so that E[S] = s_bar exactly. Types are the rational one plus one
    singleton subset per variable.
    """
    if n < 2:
        raise SpecError(f"lower-bound scenario needs n >= 2 (got {n})")
    if not delta > 0:
        raise SpecError("lower-bound scenario needs delta > 0")
    s_zero = 2.0 * delta * 1.01
    s_other = np.array([4.0 * delta * (1.0 - 0.01 * (1.0 + i / (n + 1.0))) for i in range(1, n + 1)])
    mean_other = float(s_other.mean())
    alpha = (mean_other - s_bar) / (mean_other - s_zero)
    if not 0.0 < alpha < 1.0:
        raise SpecError(f"s_bar={s_bar} needs 2Δ < S̄ < 4Δ; the zero-state weight would be {alpha:.6g}")

    names = [f"theta{i}" for i in range(1, n + 1)]
    support = [(0,) * n] + [tuple(int(j != i) for j in range(n)) for i in range(n)]
    space = StateSpace(tuple(Variable(name, ("0", "1")) for name in names), tuple(support))

    # lexicographic order puts the zero state first, then e_1, ..., e_n
    mu = np.empty(space.size)
    S = np.empty(space.size)
    for s in range(space.size):
        zeros = np.flatnonzero(space.codes[s] == 0)
        if zeros.size == n:
            mu[s], S[s] = alpha, s_zero
        else:
            mu[s], S[s] = (1.0 - alpha) / n, s_other[zeros[0]]
    types = [CognitiveType.of_subset("rational", range(n))]
    types += [CognitiveType.of_subset(name, [i]) for i, name in enumerate(names)]
    return MarketSpec(space, mu, S, v_star=c + delta, c=c, variant=Variant.EXPLOITATIVE, types=tuple(types))


@dataclass(eq=False)
class PriceRangeReport(_Report):
    lower: float
    upper: float
    h: np.ndarray
    rational_present: bool
    rigid: bool
    rigid_matches_ree: bool
    notice: str = ""
    checks: List[PropertyCheck] = field(default_factory=list)


def price_range_check(
    spec: MarketSpec,
    solution: Optional[EquilibriumSolution] = None,
    options: Optional[SolverOptions] = None,
) -> PriceRangeReport:
    """Prices within [2v* − c − S^max, 2v* − c − S^min] when a rational type trades.

    Also reports absolute rigidity (one price in every state) and whether a
    rigid price equals the expected REE price v* + Δ − S̄.
    """
    _require(spec, Variant.EXPLOITATIVE, "the price range check")
    solution = solution or solve(spec, options)
    h = solution.h
    lower = 2.0 * spec.v_star - spec.c - spec.s_max
    upper = 2.0 * spec.v_star - spec.c - spec.s_min
    rigid = bool(np.ptp(h) <= TOL)
    ree_price = spec.v_star + spec.delta - spec.s_bar
    rigid_matches = rigid and bool(np.max(np.abs(h - ree_price)) <= TOL)
    rational = has_rational(spec)

    checks, notice = [], ""
    if rational:
        at_min = int(np.argmin(spec.S))
        checks = [
            _check("price >= 2v* - c - S^max", h.min() >= lower - TOL, f"min h {h.min():.12g} vs {lower:.12g}"),
            _check("price <= 2v* - c - S^min", h.max() <= upper + TOL, f"max h {h.max():.12g} vs {upper:.12g}"),
            _check(
                "upper bound binds at argmin S",
                abs(h[at_min] - upper) <= TOL,
                f"state {solution.state_labels[at_min]}: {h[at_min]:.12g}",
            ),
        ]
    else:
        notice = "no rational type: price bounds not asserted"
    return PriceRangeReport(lower, upper, h, rational, rigid, rigid_matches, notice, checks)


@dataclass(eq=False)
class BeneficialReeReport(_Report):
    q_bar: np.ndarray
    ree_q_bar: np.ndarray
    h: np.ndarray
    ree_h: np.ndarray
    notice: str = ""
    checks: List[PropertyCheck] = field(default_factory=list)


def beneficial_ree_compare(
    spec: MarketSpec,
    solution: Optional[EquilibriumSolution] = None,
    options: Optional[SolverOptions] = None,
) -> BeneficialReeReport:
    """Quality weakly below ⅓(S − Δ) and price weakly above its REE level, state by state."""
    _require(spec, Variant.BENEFICIAL, "the REE comparison")
    solution = solution or solve(spec, options)
    ree_q = (spec.S - spec.delta) / 3.0
    ree_h = spec.S + spec.c - 2.0 * ree_q
    if not has_rational(spec):
        return BeneficialReeReport(solution.q_bar, ree_q, solution.h, ree_h, "no rational type: comparison skipped")
    d_q = solution.q_bar - ree_q
    d_h = solution.h - ree_h
    checks = [
        _check("quality <= REE quality", d_q.max() <= TOL, f"max excess {d_q.max():.3g}"),
        _check("price >= REE price", d_h.min() >= -TOL, f"min excess {d_h.min():.3g}"),
    ]
    return BeneficialReeReport(solution.q_bar, ree_q, solution.h, ree_h, checks=checks)


@dataclass(eq=False)
class BeneficialWelfareReport(_Report):
    before: EquilibriumSolution
    after: EquilibriumSolution
    new_type: str
    d_pi_star: np.ndarray
    d_social_total: float
    checks: List[PropertyCheck] = field(default_factory=list)


def beneficial_welfare_compare(
    spec: MarketSpec,
    new_type: CognitiveType,
    options: Optional[SolverOptions] = None,
) -> BeneficialWelfareReport:
    """Adding a type to a market with a rational type lowers every cutoff and total surplus."""
    _require(spec, Variant.BENEFICIAL, "the welfare comparison")
    if not has_rational(spec):
        raise SpecError("the welfare comparison needs a rational type in the market")
    before = solve(spec, options)
    after = solve(spec.add_type(new_type), options)
    d_pi = after.pi_star - before.pi_star
    d_social = after.welfare.total_social_surplus - before.welfare.total_social_surplus
    checks = [
        _check("entry cutoff weakly falls", d_pi.max() <= TOL, f"max change {d_pi.max():.3g}"),
        _check("social surplus weakly falls", d_social <= TOL, f"change {d_social:.3g}"),
    ]
    return BeneficialWelfareReport(before, after, new_type.name, d_pi, d_social, checks)


@dataclass(frozen=True)
class BlockingRow:
    type_name: str
    exempt: bool
    price_parents: Tuple[str, ...]
    blocked: Optional[bool]

    @property
    def premise_holds(self) -> bool:
        return self.exempt or self.blocked is False


@dataclass(eq=False)
class SignalPremiseReport(_Report):
    rows: List[BlockingRow]
    checks: List[PropertyCheck] = field(default_factory=list)

    @property
    def premise_holds(self) -> bool:
        return all(r.premise_holds for r in self.rows)


def _dag_is_rational(dag: CausalDag, space: Optional[StateSpace], mu) -> bool:
    if dag.graph.has_edge(PRICE, ADDON) or dag.graph.has_edge(ADDON, PRICE):
        return True
    if space is None or mu is None:
        return False
    plain = dag.without_signal()
    if not is_perfect(plain):
        return False
    return dag_to_beta(plain, space, mu).is_identity()


def signal_premise_check(
    types: Iterable[CognitiveType],
    space: Optional[StateSpace] = None,
    mu=None,
) -> SignalPremiseReport:
    """For each non-rational DAG, does R(φ) leave an undirected path between its signal and q?

    When it does for every non-rational type, equilibrium prices cannot ignore
    private signals (for generic state distributions). Rational types are exempt;
    detection is semantic when `space` and `mu` are given.
    """
    rows = []
    for t in types:
        if t.dag is None:
            if space is not None and len(t.coarse) == space.n:
                rows.append(BlockingRow(t.name, True, (), None))
                continue
            raise DagError(f"type {t.name!r}: signal checks need a DAG with a signal node")
        dag = t.dag
        if _dag_is_rational(dag, space, mu):
            rows.append(BlockingRow(t.name, True, dag.parents(PRICE), None))
            continue
        if dag.signal is None:
            raise DagError(f"type {t.name!r}: DAG has no signal node")
        parents = dag.parents(PRICE)
        rows.append(BlockingRow(t.name, False, parents, blocks(dag, parents, dag.signal, ADDON)))
    checks = [
        _check(
            f"{r.type_name}: R(phi) leaves signal-to-q path",
            r.premise_holds,
            "exempt (rational)" if r.exempt else f"R(phi) = {{{', '.join(r.price_parents)}}}",
        )
        for r in rows
    ]
    return SignalPremiseReport(rows, checks)


# -- random instances ---------------------------------------------------------


def _binary_space(n_vars: int) -> StateSpace:
    return StateSpace(tuple(Variable(f"theta{i}", ("0", "1")) for i in range(1, n_vars + 1)))


def _random_mu(rng: np.random.Generator, size: int) -> np.ndarray:
    mu = rng.uniform(0.5, 1.5, size)
    return mu / mu.sum()


def random_coarse_type(rng: np.random.Generator, n_vars: int, name: str) -> CognitiveType:
    mask = rng.integers(0, 2, n_vars)
    return CognitiveType.of_subset(name, np.flatnonzero(mask).tolist())


def random_perfect_dag(rng: np.random.Generator, space: StateSpace) -> CausalDag:
    """Random perfect DAG: each new node takes a random clique of earlier nodes as parents."""
    k = int(rng.integers(0, space.n + 1))
    states = [space.names[i] for i in sorted(rng.choice(space.n, size=k, replace=False))]
    rng.shuffle(states)
    tail = [PRICE, ADDON]
    rng.shuffle(tail)
    order = states + tail
    edges = set()
    for pos, node in enumerate(order):
        parents: List[str] = []
        for cand in rng.permutation(order[:pos]):
            cand = str(cand)
            linked = all((cand, p) in edges or (p, cand) in edges for p in parents)
            if linked and rng.random() < 0.5:
                parents.append(cand)
        edges.update((p, node) for p in parents)
    return CausalDag.from_edges(sorted(edges), nodes=states)


def random_dag_type(rng: np.random.Generator, space: StateSpace, name: str) -> CognitiveType:
    return CognitiveType.of_dag(name, random_perfect_dag(rng, space))


def _random_types(rng, space: StateSpace, count: int, prefix: str, dag_share: float = 0.3) -> List[CognitiveType]:
    out = []
    for i in range(count):
        name = f"{prefix}{i}"
        if rng.random() < dag_share:
            out.append(random_dag_type(rng, space, name))
        else:
            out.append(random_coarse_type(rng, space.n, name))
    return out


def random_exploitative_spec(
    rng: np.random.Generator,
    n_vars: Optional[int] = None,
    n_types: Optional[int] = None,
    include_rational: bool = False,
) -> MarketSpec:
    """Binary market with Δ = 1 and S in [2.2, 3.09]: the primitive condition for interiority holds."""
    n_vars = n_vars or int(rng.integers(2, 4))
    n_types = n_types or int(rng.integers(2, 5))
    space = _binary_space(n_vars)
    S = 2.2 + 0.01 * rng.choice(90, size=space.size, replace=False)
    types = _random_types(rng, space, n_types, "t")
    if include_rational:
        types[0] = CognitiveType.of_subset("rational", range(n_vars))
    return MarketSpec(space, _random_mu(rng, space.size), S, 2.0, 1.0, Variant.EXPLOITATIVE, tuple(types))


def random_beneficial_spec(
    rng: np.random.Generator,
    n_vars: Optional[int] = None,
    n_types: Optional[int] = None,
    include_rational: bool = True,
) -> MarketSpec:
    """Binary market with Δ = −1.2 and S in [0.82, 1.176]: the beneficial interiority condition holds."""
    n_vars = n_vars or int(rng.integers(1, 4))
    n_types = n_types or int(rng.integers(1, 4))
    space = _binary_space(n_vars)
    S = 0.82 + 0.004 * rng.choice(90, size=space.size, replace=False)
    types = _random_types(rng, space, n_types, "t")
    if include_rational:
        types[0] = CognitiveType.of_subset("rational", range(n_vars))
    return MarketSpec(space, _random_mu(rng, space.size), S, 0.0, 1.2, Variant.BENEFICIAL, tuple(types))


@dataclass(eq=False)
class SweepReport:
    variant: Variant
    trials: int
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def sweep_add_type(
    seed: int,
    trials: int,
    variant: Variant = Variant.EXPLOITATIVE,
    on_trial: Optional[Callable[[int], None]] = None,
    options: Optional[SolverOptions] = None,
) -> SweepReport:
    """Randomized add-type experiments; each failed check is recorded as "trial N: check".

    Exploitative trials add a random type to a random market. Beneficial
    trials start from the rational type alone, add one random type, and check
    both the welfare comparison and the REE comparison of the enlarged market.
    """
    variant = Variant(variant)
    report = SweepReport(variant, trials)
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        if variant is Variant.EXPLOITATIVE:
            spec = random_exploitative_spec(rng, include_rational=bool(rng.integers(0, 2)))
            new = _random_types(rng, spec.space, 1, "added")[0]
            checks: Sequence[PropertyCheck] = add_type_experiment(spec, new, options).violations()
        else:
            spec = random_beneficial_spec(rng, n_types=1)
            new = _random_types(rng, spec.space, 1, "added")[0]
            checks = beneficial_welfare_compare(spec, new, options).violations()
            checks += beneficial_ree_compare(spec.add_type(new), options=options).violations()
        report.failures.extend(f"trial {trial}: {c.name} ({c.details})" for c in checks)
        if on_trial is not None:
            on_trial(trial)
    return report
