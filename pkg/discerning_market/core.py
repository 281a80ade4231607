"""Market primitives: state space, market specification, supply-side math and the REE benchmark."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .beliefs import ADDON, PRICE, CognitiveType

MU_FLOOR = 1e-12
S_GAP = 1e-9
SUM_TOL = 1e-9


class SpecError(ValueError):
    """Invalid market primitives or out-of-domain arguments."""


class NoInteriorEquilibrium(RuntimeError):
    """Raised when a solution violates ½S(θ) < q̄(θ) < S(θ) somewhere, or its existence condition fails."""

    def __init__(self, message: str, solution=None, violations: Sequence[str] = ()):
        super().__init__(message)
        self.solution = solution
        self.violations = tuple(violations)


class Variant(str, Enum):
    EXPLOITATIVE = "exploitative"
    BENEFICIAL = "beneficial"


@dataclass(frozen=True)
class Variable:
    name: str
    domain: Tuple[str, ...]


StateLike = Union[int, Sequence[str], Sequence[int]]


@dataclass(frozen=True)
class StateSpace:
    """Finite product of labelled variables, optionally restricted to a support.

    States are indexed densely, in lexicographic order of their domain indices.
    """

    variables: Tuple[Variable, ...]
    support: Optional[Tuple[Tuple[int, ...], ...]] = None
    codes: np.ndarray = field(init=False, repr=False, compare=False)
    _index: Dict[Tuple[int, ...], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        variables = tuple(
            v if isinstance(v, Variable) else Variable(v[0], tuple(str(x) for x in v[1]))
            for v in self.variables
        )
        object.__setattr__(self, "variables", variables)
        if not variables:
            raise SpecError("variables: at least one variable is required")
        names = [v.name for v in variables]
        if len(set(names)) != len(names):
            raise SpecError(f"variables: duplicate variable name in {names}")
        for v in variables:
            if v.name in (PRICE, ADDON):
                raise SpecError(f"variables.{v.name}: '{v.name}' is a reserved node name (price and add-on)")
            if not v.domain:
                raise SpecError(f"variables.{v.name}: domain must have at least one label")
            if len(set(v.domain)) != len(v.domain):
                raise SpecError(f"variables.{v.name}: duplicate domain label")
            if any("," in label for label in v.domain):
                raise SpecError(f"variables.{v.name}: labels may not contain ','")

        sizes = [len(v.domain) for v in variables]
        if self.support is None:
            states = list(itertools.product(*(range(k) for k in sizes)))
        else:
            states = sorted({tuple(int(i) for i in s) for s in self.support})
            if len(states) != len(self.support):
                raise SpecError("support: duplicate state")
            for s in states:
                if len(s) != len(sizes) or any(not 0 <= i < k for i, k in zip(s, sizes)):
                    raise SpecError(f"support: state {s} is outside the variable domains")
            full = len(states) == int(np.prod(sizes))
            object.__setattr__(self, "support", None if full else tuple(states))
        if len(states) < 2:
            raise SpecError("state space must contain at least two states")

        codes = np.array(states, dtype=np.int64).reshape(len(states), len(sizes))
        codes.flags.writeable = False
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(states)})

    @classmethod
    def from_domains(cls, domains: Dict[str, Iterable], support: Optional[Iterable] = None) -> "StateSpace":
        variables = tuple(Variable(name, tuple(str(x) for x in dom)) for name, dom in domains.items())
        space = cls(variables)
        if support is None:
            return space
        return cls(variables, tuple(space.encode(s) for s in support))

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def size(self) -> int:
        return self.codes.shape[0]

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def is_full_product(self) -> bool:
        return self.size == int(np.prod([len(v.domain) for v in self.variables]))

    def variable_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise SpecError(f"unknown variable {name!r}") from None

    def encode(self, state) -> Tuple[int, ...]:
        """Domain-index tuple for a label tuple, a "0,1" key, or an index tuple."""
        if isinstance(state, str):
            state = state.split(",")
        state = tuple(state)
        if len(state) != self.n:
            raise SpecError(f"state {state!r} has {len(state)} components, expected {self.n}")
        out = []
        for value, var in zip(state, self.variables):
            label = str(value)
            if label in var.domain:
                out.append(var.domain.index(label))
            elif isinstance(value, (int, np.integer)) and 0 <= value < len(var.domain):
                out.append(int(value))
            else:
                raise SpecError(f"{label!r} is not in the domain of {var.name}")
        return tuple(out)

    def index(self, state: StateLike) -> int:
        if isinstance(state, (int, np.integer)):
            if not 0 <= state < self.size:
                raise SpecError(f"state index {state} out of range")
            return int(state)
        code = self.encode(state)
        try:
            return self._index[code]
        except KeyError:
            raise SpecError(f"state {state!r} is outside the support") from None

    def state(self, index: int) -> Tuple[str, ...]:
        code = self.codes[index]
        return tuple(v.domain[i] for v, i in zip(self.variables, code))

    def label(self, index: int) -> str:
        return ",".join(self.state(index))

    def labels(self) -> List[str]:
        return [self.label(i) for i in range(self.size)]


@dataclass(frozen=True, eq=False)
class MarketSpec:
    """Primitive tuple of the market. Immutable; arrays are read-only."""

    space: StateSpace
    mu: np.ndarray
    S: np.ndarray
    v_star: float
    c: float
    variant: Variant = Variant.EXPLOITATIVE
    types: Tuple[CognitiveType, ...] = ()

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        S = np.array(self.S, dtype=float).reshape(-1)
        size = self.space.size
        if mu.shape != (size,):
            raise SpecError(f"mu: expected {size} probabilities, got {mu.size}")
        if S.shape != (size,):
            raise SpecError(f"S: expected {size} values, got {S.size}")
        if not np.all(np.isfinite(mu)) or not np.all(np.isfinite(S)):
            raise SpecError("mu and S must be finite")
        if np.any(mu < MU_FLOOR):
            bad = self.space.label(int(np.argmin(mu)))
            raise SpecError(f"mu: full support required, state {bad} has probability {mu.min():.3g}")
        if abs(mu.sum() - 1.0) > SUM_TOL:
            raise SpecError(f"mu: probabilities sum to {mu.sum():.12g}, expected 1")
        if np.any(S <= 0):
            raise SpecError("S: values must be strictly positive")
        ordered = np.sort(S)
        gaps = np.diff(ordered)
        if gaps.size and gaps.min() <= S_GAP:
            dup = ordered[int(np.argmin(gaps))]
            raise SpecError(f"S: must be one-to-one across states, value {dup:.12g} repeats")

        variant = Variant(self.variant)
        delta = float(self.v_star) - float(self.c)
        if variant is Variant.EXPLOITATIVE and not delta > 0:
            raise SpecError(f"exploitative variant requires v_star - c > 0 (got {delta:.12g})")
        if variant is Variant.BENEFICIAL and not delta < 0:
            raise SpecError(f"beneficial variant requires v_star - c < 0 (got {delta:.12g})")

        types = tuple(self.types)
        if not types:
            raise SpecError("types: at least one cognitive type is required")
        names = [t.name for t in types]
        if len(set(names)) != len(names):
            raise SpecError(f"types: duplicate type name in {names}")
        for t in types:
            t.validate(self.space)

        mu.flags.writeable = False
        S.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "v_star", float(self.v_star))
        object.__setattr__(self, "c", float(self.c))
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "types", types)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MarketSpec):
            return NotImplemented
        return (
            self.space == other.space
            and np.array_equal(self.mu, other.mu)
            and np.array_equal(self.S, other.S)
            and self.v_star == other.v_star
            and self.c == other.c
            and self.variant is other.variant
            and self.types == other.types
        )

    __hash__ = None

    @property
    def delta(self) -> float:
        return self.v_star - self.c

    @property
    def s_min(self) -> float:
        return float(self.S.min())

    @property
    def s_max(self) -> float:
        return float(self.S.max())

    @property
    def s_bar(self) -> float:
        return float(self.mu @ self.S)

    @property
    def type_names(self) -> Tuple[str, ...]:
        return tuple(t.name for t in self.types)

    def with_types(self, types: Iterable[CognitiveType]) -> "MarketSpec":
        return replace(self, types=tuple(types))

    def add_type(self, new_type: CognitiveType) -> "MarketSpec":
        return self.with_types(self.types + (new_type,))


def pi_star(spec: MarketSpec, state, price):
    """Entry threshold (c − price)/S(θ). Not clamped: values outside [0, 1] mean corner supply."""
    S = spec.S[state]
    return (spec.c - np.asarray(price, dtype=float)) / S


def _check_unit(pi):
    pi = np.asarray(pi, dtype=float)
    if np.any((pi < 0) | (pi > 1)):
        raise SpecError(f"pi_star must lie in [0, 1], got {pi}")
    return pi


def mean_addon(spec: MarketSpec, state, pi):
    """Expected add-on among active firms, (1 + π*)/2 · S(θ)."""
    return (1.0 + _check_unit(pi)) / 2.0 * spec.S[state]


def addon_support(spec: MarketSpec, state, pi) -> Tuple:
    """Endpoints of the uniform add-on law U[π*S(θ), S(θ)] among active firms."""
    pi = _check_unit(pi)
    S = spec.S[state]
    return pi * S, S


def price_from_addon(spec: MarketSpec, state, q_bar):
    return spec.S[state] + spec.c - 2.0 * np.asarray(q_bar, dtype=float)


@dataclass(frozen=True)
class ConditionReport:
    exploitative_interior: bool
    beneficial_interior: bool
    ree_condition: bool
    variant: Variant
    details: Dict[str, str]

    @property
    def guarantee(self) -> Optional[str]:
        """Which primitive condition guarantees an interior equilibrium for any type set, if any."""
        if self.variant is Variant.EXPLOITATIVE and self.exploitative_interior:
            return "exploitative_interior"
        if self.variant is Variant.BENEFICIAL and self.beneficial_interior:
            return "beneficial_interior"
        return None


def check_conditions(spec: MarketSpec) -> ConditionReport:
    d, lo, hi = spec.delta, spec.s_min, spec.s_max
    exploitative_interior = hi - lo < 2 * d < lo
    beneficial_interior = -2.0 / 3.0 * d < lo < hi < -d
    if spec.variant is Variant.EXPLOITATIVE:
        ree = 2 * d < lo
        ree_text = f"2Δ={2 * d:.12g} < S^min={lo:.12g}"
    else:
        ree = -d < 2 * lo and hi < -2 * d
        ree_text = f"-Δ={-d:.12g} < 2S^min={2 * lo:.12g} and S^max={hi:.12g} < -2Δ={-2 * d:.12g}"
    details = {
        "exploitative_interior": f"S^max-S^min={hi - lo:.12g} < 2Δ={2 * d:.12g} < S^min={lo:.12g}",
        "beneficial_interior": f"-2Δ/3={-2 * d / 3:.12g} < S^min={lo:.12g} < S^max={hi:.12g} < -Δ={-d:.12g}",
        "ree_condition": ree_text,
    }
    return ConditionReport(exploitative_interior, beneficial_interior, ree, spec.variant, details)


def ree_solution(spec: MarketSpec):
    """Rational-expectations benchmark in closed form."""
    from .solver import assemble_solution

    report = check_conditions(spec)
    if not report.ree_condition:
        raise NoInteriorEquilibrium(
            f"no interior REE: {report.details['ree_condition']} fails",
            violations=(report.details["ree_condition"],),
        )
    if spec.variant is Variant.EXPLOITATIVE:
        q_bar = spec.S - spec.delta
    else:
        q_bar = (spec.S - spec.delta) / 3.0
    estimates = q_bar[None, :]
    return assemble_solution(
        spec,
        q_bar,
        estimates=estimates,
        type_names=("rational",),
        method="closed-form",
    )
