"""Benchmark task definitions: topology program, intent properties, budgets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import SchemaError, ValidationError
from .platform import (
    PLATFORM_ID,
    PlatformLanguage,
    _parse_addr,
    _parse_iface,
    _parse_prefix,
)

DEFAULT_TURN_BUDGET = 100
DEFAULT_TIME_BUDGET_S = 1800.0
DEFAULT_WEIGHTS = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
WEIGHT_SUM_TOL = 1e-12

_TASK_KEYS = {
    "id",
    "tier",
    "platform",
    "turn_budget",
    "time_budget_s",
    "weights",
    "topology",
    "intent",
}


class Tier(str, Enum):
    BASIC = "basic"
    INTERMEDIATE = "intermediate"
    EXPERT = "expert"


class PropertyKind(str, Enum):
    REACHABLE = "reachable"
    ROUTE_PRESENT = "route_present"
    ROUTE_ABSENT = "route_absent"
    OSPF_ADJACENCY = "ospf_adjacency"
    BGP_ESTABLISHED = "bgp_established"
    SUMMARIZED_ROUTE = "summarized_route"


@dataclass(frozen=True)
class InfraCommand:
    """One provisioning step: add_node, add_link, or deploy."""

    verb: str
    node: str | None = None
    endpoints: tuple[tuple[str, str], tuple[str, str]] | None = None

    def to_obj(self) -> dict:
        if self.verb == "add_node":
            return {"verb": "add_node", "node": self.node}
        if self.verb == "add_link":
            (a, a_if), (b, b_if) = self.endpoints
            return {"verb": "add_link", "a": a, "a_if": a_if, "b": b, "b_if": b_if}
        return {"verb": "deploy"}


@dataclass(frozen=True)
class Property:
    """A boolean predicate over the final network state."""

    id: str
    kind: PropertyKind
    args: tuple[tuple[str, str], ...]

    def arg(self, key: str) -> str:
        for k, v in self.args:
            if k == key:
                return v
        raise KeyError(key)

    def to_obj(self) -> dict:
        return {"id": self.id, "kind": self.kind.value, "args": dict(self.args)}


@dataclass(frozen=True)
class TaskSpec:
    id: str
    tier: Tier
    topology: tuple[InfraCommand, ...]
    intent: tuple[Property, ...]
    platform: str = PLATFORM_ID
    turn_budget: int = DEFAULT_TURN_BUDGET
    time_budget_s: float = DEFAULT_TIME_BUDGET_S
    weights: tuple[float, float, float] = DEFAULT_WEIGHTS

    def node_names(self) -> tuple[str, ...]:
        return tuple(c.node for c in self.topology if c.verb == "add_node")

    def language(self) -> PlatformLanguage:
        return PlatformLanguage.for_nodes(self.node_names())


def _require(cond: bool, field_name: str, message: str) -> None:
    if not cond:
        raise ValidationError(f"{field_name}: {message}")


def _valid_node_name(name) -> bool:
    return (
        isinstance(name, str)
        and name != ""
        and ":" not in name
        and not any(ch.isspace() for ch in name)
    )


def _parse_infra_command(obj, index: int) -> InfraCommand:
    where = f"topology[{index}]"
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    verb = obj.get("verb")
    if verb == "add_node":
        if set(obj) != {"verb", "node"}:
            raise SchemaError(f"{where}: add_node takes exactly 'node'")
        _require(_valid_node_name(obj["node"]), where, "invalid node name")
        return InfraCommand(verb="add_node", node=obj["node"])
    if verb == "add_link":
        if set(obj) != {"verb", "a", "a_if", "b", "b_if"}:
            raise SchemaError(f"{where}: add_link takes a, a_if, b, b_if")
        a, a_if, b, b_if = obj["a"], obj["a_if"], obj["b"], obj["b_if"]
        _require(_valid_node_name(a) and _valid_node_name(b), where, "invalid node name")
        _require(
            _parse_iface(a_if) is not None and _parse_iface(b_if) is not None,
            where,
            "interface names must match eth<N>",
        )
        _require((a, a_if) != (b, b_if), where, "link endpoints must be distinct")
        return InfraCommand(verb="add_link", endpoints=((a, a_if), (b, b_if)))
    if verb == "deploy":
        if set(obj) != {"verb"}:
            raise SchemaError(f"{where}: deploy takes no arguments")
        return InfraCommand(verb="deploy")
    raise SchemaError(f"{where}: unknown verb {verb!r}")


_PROPERTY_ARGS = {
    PropertyKind.REACHABLE: ("node", "target"),
    PropertyKind.ROUTE_PRESENT: ("node", "prefix"),
    PropertyKind.ROUTE_ABSENT: ("node", "prefix"),
    PropertyKind.OSPF_ADJACENCY: ("node_a", "node_b"),
    PropertyKind.BGP_ESTABLISHED: ("node_a", "node_b"),
    PropertyKind.SUMMARIZED_ROUTE: ("node", "prefix"),
}


def _parse_property(obj, index: int, known_nodes: set[str]) -> Property:
    where = f"intent[{index}]"
    if not isinstance(obj, dict) or set(obj) != {"id", "kind", "args"}:
        raise SchemaError(f"{where}: expected {{id, kind, args}}")
    pid, kind_raw, args = obj["id"], obj["kind"], obj["args"]
    _require(isinstance(pid, str) and pid != "", where, "property id must be a string")
    try:
        kind = PropertyKind(kind_raw)
    except ValueError:
        raise ValidationError(f"{where}.kind: unknown kind {kind_raw!r}")
    expected = _PROPERTY_ARGS[kind]
    if not isinstance(args, dict) or set(args) != set(expected):
        raise SchemaError(f"{where}.args: expected keys {expected}")
    for key in expected:
        value = args[key]
        if key in ("node", "node_a", "node_b"):
            _require(value in known_nodes, f"{where}.args.{key}", f"unknown node {value!r}")
        elif key == "target":
            _require(_parse_addr(value) is not None, f"{where}.args.{key}", "invalid address")
        elif key == "prefix":
            _require(_parse_prefix(value) is not None, f"{where}.args.{key}", "invalid prefix")
    if kind in (PropertyKind.OSPF_ADJACENCY, PropertyKind.BGP_ESTABLISHED):
        _require(args["node_a"] != args["node_b"], where, "endpoints must differ")
    canonical = tuple((k, args[k]) for k in expected)
    return Property(id=pid, kind=kind, args=canonical)


def parse_task(document: dict) -> TaskSpec:
    """Validate a parsed task document into a TaskSpec.

    Raises SchemaError on malformed structure and ValidationError when a
    type invariant is violated; the message names the offending field.
    """
    if not isinstance(document, dict):
        raise SchemaError("task document must be an object")
    unknown = set(document) - _TASK_KEYS
    if unknown:
        raise SchemaError(f"unknown keys: {sorted(unknown)}")
    for key in ("id", "tier", "topology", "intent"):
        if key not in document:
            raise SchemaError(f"missing key: {key}")

    task_id = document["id"]
    _require(isinstance(task_id, str) and task_id != "", "id", "must be a non-empty string")
    try:
        tier = Tier(document["tier"])
    except ValueError:
        raise ValidationError(f"tier: unknown tier {document['tier']!r}")

    platform = document.get("platform", PLATFORM_ID)
    _require(platform == PLATFORM_ID, "platform", f"must be {PLATFORM_ID!r}")

    turn_budget = document.get("turn_budget", DEFAULT_TURN_BUDGET)
    _require(
        isinstance(turn_budget, int) and not isinstance(turn_budget, bool) and turn_budget > 0,
        "turn_budget",
        "must be a positive integer",
    )
    time_budget = document.get("time_budget_s", DEFAULT_TIME_BUDGET_S)
    _require(
        isinstance(time_budget, (int, float)) and time_budget > 0,
        "time_budget_s",
        "must be a positive number",
    )

    weights_raw = document.get("weights", list(DEFAULT_WEIGHTS))
    if not isinstance(weights_raw, (list, tuple)) or len(weights_raw) != 3:
        raise SchemaError("weights: expected three numbers")
    _require(
        all(isinstance(w, (int, float)) and w >= 0 for w in weights_raw),
        "weights",
        "must be nonnegative",
    )
    _require(
        abs(sum(weights_raw) - 1.0) <= WEIGHT_SUM_TOL,
        "weights",
        f"must sum to 1 (got {sum(weights_raw)!r})",
    )

    topo_raw = document["topology"]
    if not isinstance(topo_raw, list):
        raise SchemaError("topology: expected a list")
    _require(len(topo_raw) > 0, "topology", "must be non-empty")
    topology = tuple(_parse_infra_command(obj, i) for i, obj in enumerate(topo_raw))

    intent_raw = document["intent"]
    if not isinstance(intent_raw, list):
        raise SchemaError("intent: expected a list")
    _require(len(intent_raw) > 0, "intent", "must be non-empty")
    known_nodes = {c.node for c in topology if c.verb == "add_node"}
    intent = tuple(_parse_property(obj, i, known_nodes) for i, obj in enumerate(intent_raw))
    ids = [p.id for p in intent]
    _require(len(ids) == len(set(ids)), "intent", "property ids must be unique")

    return TaskSpec(
        id=task_id,
        tier=tier,
        topology=topology,
        intent=intent,
        platform=platform,
        turn_budget=turn_budget,
        time_budget_s=float(time_budget),
        weights=tuple(float(w) for w in weights_raw),
    )


def to_document(task: TaskSpec) -> dict:
    """Inverse of parse_task, suitable for JSON serialization."""
    return {
        "id": task.id,
        "tier": task.tier.value,
        "platform": task.platform,
        "turn_budget": task.turn_budget,
        "time_budget_s": task.time_budget_s,
        "weights": list(task.weights),
        "topology": [c.to_obj() for c in task.topology],
        "intent": [p.to_obj() for p in task.intent],
    }


def load_task(path: str | Path) -> TaskSpec:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        document = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})")
    return parse_task(document)


_GOAL_TEMPLATES = {
    PropertyKind.REACHABLE: "From {node}, ping {target} successfully.",
    PropertyKind.ROUTE_PRESENT: "{node} has a route to {prefix}.",
    PropertyKind.ROUTE_ABSENT: "{node} has no route to {prefix}.",
    PropertyKind.OSPF_ADJACENCY: "An OSPF adjacency is up between {node_a} and {node_b}.",
    PropertyKind.BGP_ESTABLISHED: "A BGP session is established between {node_a} and {node_b}.",
    PropertyKind.SUMMARIZED_ROUTE: (
        "{node} has a route to {prefix} and no more-specific route inside it."
    ),
}


def describe_property(prop: Property) -> str:
    return _GOAL_TEMPLATES[prop.kind].format(**dict(prop.args))


def render_prompt(task: TaskSpec) -> str:
    """Deterministic task briefing shown to the agent every episode."""
    lines = [
        f"Network configuration task {task.id} (difficulty: {task.tier.value}).",
        "",
        "Devices:",
    ]
    for name in task.node_names():
        lines.append(f"  {name}")
    lines.append("")
    lines.append("Cabling:")
    for cmd in task.topology:
        if cmd.verb == "add_link":
            (a, a_if), (b, b_if) = cmd.endpoints
            lines.append(f"  {a} {a_if} <-> {b} {b_if}")
    lines.append("")
    lines.append("All interfaces start up with no addresses and no protocol state.")
    lines.append("")
    lines.append("Goals:")
    for i, prop in enumerate(task.intent, start=1):
        lines.append(f"  {i}. {describe_property(prop)}")
    lines.append("")
    lines.append(
        "Issue one command per turn, prefixed with the target device name, "
        "e.g. `r1: show ip route`. Reply `STOP` when you believe every goal is met."
    )
    lines.append("")
    lines.append("Available command forms:")
    for form in task.language().command_forms():
        lines.append(f"  <node>: {form}")
    lines.append("")
    lines.append(
        f"Budget: {task.turn_budget} turns, {task.time_budget_s:g} seconds wall time."
    )
    return "\n".join(lines)
