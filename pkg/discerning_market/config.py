"""Load scenario YAML documents into market specifications, and write them back."""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml

from .beliefs import ADDON, PRICE, CausalDag, CognitiveType, DagError, validate_dag
from .core import MarketSpec, SpecError, StateSpace, Variable, Variant
from .solver import SolverOptions

TOP_LEVEL = ("name", "variables", "mu", "S", "v_star", "c", "variant", "support", "types", "solver")

PathT = Tuple[Union[str, int], ...]


class ConfigError(ValueError):
    """Bad scenario document; carries the offending field path and 1-based line."""

    def __init__(self, message: str, path: str = "", line: Optional[int] = None):
        where = path or "document"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    spec: MarketSpec
    options: SolverOptions = field(default_factory=SolverOptions)
    name: Optional[str] = None


def format_path(path: PathT) -> str:
    out = ""
    for part in path:
        if isinstance(part, int):
            out += f"[{part}]"
        elif not out:
            out = part
        elif part.isidentifier():
            out += f".{part}"
        else:
            out += f'["{part}"]'
    return out


def _line_map(node: Optional[yaml.Node], path: PathT = (), out: Optional[Dict[PathT, int]] = None) -> Dict[PathT, int]:
    out = {} if out is None else out
    if node is None:
        return out
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            child = path + (str(key.value),)
            _line_map(value, child, out)
            out[child] = key.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, value in enumerate(node.value):
            _line_map(value, path + (i,), out)
    return out


class _Parser:
    def __init__(self, document: str):
        try:
            self.data = yaml.safe_load(document)
            self.lines = _line_map(yaml.compose(document))
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line=mark.line + 1 if mark else None) from exc

    def fail(self, path: PathT, message: str) -> ConfigError:
        line = None
        prefix = tuple(path)
        while line is None and prefix:
            line = self.lines.get(prefix)
            prefix = prefix[:-1]
        return ConfigError(message, format_path(path), line)

    def number(self, value: Any, path: PathT) -> float:
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise self.fail(path, f"expected a number, got {value!r}")
        return float(value)

    def mapping(self, value: Any, path: PathT) -> Dict:
        if not isinstance(value, dict) or not value:
            raise self.fail(path, "expected a non-empty mapping")
        return value

    def sequence(self, value: Any, path: PathT, allow_empty: bool = False) -> List:
        if not isinstance(value, list) or (not value and not allow_empty):
            raise self.fail(path, "expected a list" if allow_empty else "expected a non-empty list")
        return value

    def parse(self) -> ScenarioConfig:
        data = self.data
        if not isinstance(data, dict):
            raise ConfigError("expected a mapping at the top level", line=1)
        for key in data:
            if key not in TOP_LEVEL:
                raise self.fail((str(key),), f"unknown field (expected one of {', '.join(TOP_LEVEL)})")
        for key in ("variables", "mu", "S", "v_star", "c", "types"):
            if key not in data:
                raise ConfigError(f"missing required field {key!r}")

        variables = self.mapping(data["variables"], ("variables",))
        domains = []
        for vname, labels in variables.items():
            if str(vname) in (PRICE, ADDON):
                raise self.fail(("variables", str(vname)), f"'{vname}' is a reserved node name (price and add-on)")
            labels = self.sequence(labels, ("variables", str(vname)))
            domains.append(Variable(str(vname), tuple(str(x) for x in labels)))
        try:
            product = StateSpace(tuple(domains))
        except SpecError as exc:
            raise self.fail(("variables",), str(exc)) from exc

        mu_raw, support = self._support(data, product)
        try:
            space = StateSpace(product.variables, support)
        except SpecError as exc:
            raise self.fail(("support",), str(exc)) from exc
        mu = self._state_table(mu_raw, "mu", space, product)
        S = self._state_table(self.mapping(data["S"], ("S",)), "S", space, product)

        variant_raw = data.get("variant", Variant.EXPLOITATIVE.value)
        try:
            variant = Variant(variant_raw)
        except ValueError:
            raise self.fail(("variant",), f"expected 'exploitative' or 'beneficial', got {variant_raw!r}") from None

        types = self._types(data["types"], space)
        v_star = self.number(data["v_star"], ("v_star",))
        c = self.number(data["c"], ("c",))
        try:
            spec = MarketSpec(space, mu, S, v_star, c, variant, tuple(types))
        except (SpecError, DagError) as exc:
            head = str(exc).split(":", 1)[0]
            raise self.fail((head,) if head in TOP_LEVEL else (), str(exc)) from exc

        options = self._options(data.get("solver"))
        name = data.get("name")
        return ScenarioConfig(spec, options, None if name is None else str(name))

    def _support(self, data: Dict, product: StateSpace):
        mu_raw = data["mu"]
        support_raw = data.get("support")
        if mu_raw == "uniform":
            if support_raw is None:
                return None, None
            keys = self.sequence(support_raw, ("support",))
            return None, [self._encode(str(k), product, ("support", i)) for i, k in enumerate(keys)]
        mu_raw = self.mapping(mu_raw, ("mu",))
        support = [self._encode(str(k), product, ("mu", str(k))) for k in mu_raw]
        if support_raw is not None:
            given = [self._encode(str(k), product, ("support", i)) for i, k in enumerate(self.sequence(support_raw, ("support",)))]
            if sorted(given) != sorted(support):
                raise self.fail(("support",), "support must list exactly the states keyed in mu")
        return mu_raw, support

    def _encode(self, key: str, product: StateSpace, path: PathT) -> Tuple[int, ...]:
        try:
            return product.encode(key)
        except SpecError as exc:
            raise self.fail(path, str(exc)) from exc

    def _state_table(self, raw: Optional[Dict], field_name: str, space: StateSpace, product: StateSpace) -> List[float]:
        if raw is None:
            return [1.0 / space.size] * space.size
        values: List[Optional[float]] = [None] * space.size
        for key, value in raw.items():
            path = (field_name, str(key))
            code = self._encode(str(key), product, path)
            try:
                index = space.index(code)
            except SpecError:
                raise self.fail(path, "state is outside the support") from None
            if values[index] is not None:
                raise self.fail(path, "state listed twice")
            values[index] = self.number(value, path)
        missing = [space.label(i) for i, v in enumerate(values) if v is None]
        if missing:
            raise self.fail((field_name,), f"missing states {', '.join(missing)}")
        return values

    def _types(self, raw: Any, space: StateSpace, root: PathT = ("types",)) -> List[CognitiveType]:
        entries = self.sequence(raw, root)
        return [self._type(entry, space, root + (i,)) for i, entry in enumerate(entries)]

    def _type(self, entry: Any, space: StateSpace, path: PathT) -> CognitiveType:
        entry = self.mapping(entry, path)
        unknown = set(entry) - {"name", "coarse", "dag"}
        if unknown:
            raise self.fail(path + (str(sorted(unknown)[0]),), "unknown type field")
        name = entry.get("name")
        if not isinstance(name, str) or not name:
            raise self.fail(path + ("name",), "type needs a non-empty string name")
        if ("coarse" in entry) == ("dag" in entry):
            raise self.fail(path, "give exactly one of 'coarse' or 'dag'")
        if "coarse" in entry:
            members = self.sequence(entry["coarse"], path + ("coarse",), allow_empty=True)
            indices = []
            for j, var in enumerate(members):
                if str(var) not in space.names:
                    raise self.fail(path + ("coarse", j), f"unknown variable {var!r}")
                indices.append(space.variable_index(str(var)))
            return CognitiveType.of_subset(name, indices)
        return CognitiveType.of_dag(name, self._dag(entry["dag"], space, path + ("dag",)))

    def _dag(self, raw: Any, space: StateSpace, path: PathT) -> CausalDag:
        raw = self.mapping(raw, path)
        unknown = set(raw) - {"edges", "nodes", "signal"}
        if unknown:
            raise self.fail(path + (str(sorted(unknown)[0]),), "unknown DAG field")
        signal = raw.get("signal")
        if signal is not None and (not isinstance(signal, str) or signal in space.names or signal in (PRICE, ADDON)):
            raise self.fail(path + ("signal",), f"signal must be a fresh node name, got {signal!r}")
        allowed = set(space.names) | {PRICE, ADDON} | ({signal} if signal else set())
        edges = []
        for j, edge in enumerate(self.sequence(raw.get("edges", []), path + ("edges",), allow_empty=True)):
            if not isinstance(edge, list) or len(edge) != 2:
                raise self.fail(path + ("edges", j), "edge must be a [parent, child] pair")
            for end in edge:
                if str(end) not in allowed:
                    raise self.fail(path + ("edges", j), f"unknown node {end!r}")
            edges.append((str(edge[0]), str(edge[1])))
        nodes = []
        for j, node in enumerate(self.sequence(raw.get("nodes", []), path + ("nodes",), allow_empty=True)):
            if str(node) not in allowed - {PRICE, ADDON}:
                raise self.fail(path + ("nodes", j), f"unknown node {node!r}")
            nodes.append(str(node))
        dag = CausalDag.from_edges(edges, nodes=nodes, signal=signal)
        violations = validate_dag(dag, space)
        if violations:
            raise self.fail(path, "; ".join(violations))
        return dag

    def _options(self, raw: Any) -> SolverOptions:
        if raw is None:
            return SolverOptions()
        raw = self.mapping(raw, ("solver",))
        kwargs = {}
        for key, value in raw.items():
            path = ("solver", str(key))
            if key == "tol":
                kwargs["tol"] = self.number(value, path)
            elif key == "max_iter":
                if isinstance(value, bool) or not isinstance(value, int):
                    raise self.fail(path, f"expected an integer, got {value!r}")
                kwargs["max_iter"] = value
            else:
                raise self.fail(path, "unknown solver option (expected tol or max_iter)")
        try:
            return SolverOptions(**kwargs)
        except ValueError as exc:
            raise self.fail(("solver",), str(exc)) from exc


def parse_config(document: str) -> ScenarioConfig:
    return _Parser(document).parse()


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Config not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"))


def _type_entry(t: CognitiveType, space: StateSpace) -> Dict[str, Any]:
    if t.coarse is not None:
        return {"name": t.name, "coarse": [space.names[i] for i in sorted(t.coarse)]}
    dag: Dict[str, Any] = {"edges": [list(e) for e in sorted(t.dag.edges)]}
    others = [n for n in t.dag.names if n not in (PRICE, ADDON)]
    if others:
        dag["nodes"] = others
    if t.dag.signal is not None:
        dag["signal"] = t.dag.signal
    return {"name": t.name, "dag": dag}


def serialize_config(
    spec: MarketSpec,
    options: Optional[SolverOptions] = None,
    name: Optional[str] = None,
) -> str:
    """YAML document that parses back to an identical spec (floats keep full precision)."""
    space = spec.space
    doc: Dict[str, Any] = {}
    if name:
        doc["name"] = name
    doc["variables"] = {v.name: list(v.domain) for v in space.variables}
    doc["variant"] = spec.variant.value
    doc["v_star"] = float(spec.v_star)
    doc["c"] = float(spec.c)
    labels = space.labels()
    doc["mu"] = {label: float(x) for label, x in zip(labels, spec.mu)}
    doc["S"] = {label: float(x) for label, x in zip(labels, spec.S)}
    doc["types"] = [_type_entry(t, space) for t in spec.types]
    if options is not None:
        doc["solver"] = {"tol": float(options.tol), "max_iter": int(options.max_iter)}
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


def dump_config(config: ScenarioConfig) -> str:
    return serialize_config(config.spec, config.options, config.name)


def parse_type(document: str, space: StateSpace) -> List[CognitiveType]:
    """Type entries from a standalone document: a `types:` list, a list, or a single entry."""
    parser = _Parser(document)
    data = parser.data
    if isinstance(data, dict) and "types" in data:
        return parser._types(data["types"], space)
    if isinstance(data, list):
        return parser._types(data, space, root=())
    return [parser._type(data, space, ())]
