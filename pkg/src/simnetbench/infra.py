"""Provisioning state machine: builds the topology or lands in an error state.

Errors are states, not exceptions: every transition is total, and the error
state absorbs everything that follows.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .errors import PreconditionError
from .task import InfraCommand
from . import netstate


class InfraStatus(str, Enum):
    NORMAL = "normal"
    ACCEPT = "accept"
    ERROR = "error"


@dataclass(frozen=True)
class InfraState:
    nodes: frozenset[str] = frozenset()
    links: frozenset[tuple[str, str, str, str]] = frozenset()
    deployed: bool = False
    status: InfraStatus = InfraStatus.NORMAL
    error_detail: str | None = None


INITIAL = InfraState()


def _error(q: InfraState, detail: str) -> InfraState:
    return replace(q, status=InfraStatus.ERROR, error_detail=detail)


def _canonical_link(a: str, a_if: str, b: str, b_if: str) -> tuple[str, str, str, str]:
    if (a, a_if) <= (b, b_if):
        return (a, a_if, b, b_if)
    return (b, b_if, a, a_if)


def infra_step(q: InfraState, cmd: InfraCommand) -> InfraState:
    """One deterministic provisioning transition; total over all inputs."""
    if q.status is InfraStatus.ERROR:
        return q
    if q.deployed:
        return _error(q, f"command after deploy: {cmd.verb}")
    if cmd.verb == "add_node":
        if cmd.node in q.nodes:
            return _error(q, f"duplicate node {cmd.node}")
        return replace(q, nodes=q.nodes | {cmd.node})
    if cmd.verb == "add_link":
        (a, a_if), (b, b_if) = cmd.endpoints
        for node in (a, b):
            if node not in q.nodes:
                return _error(q, f"unknown node {node}")
        used = {(la, lai) for (la, lai, _, _) in q.links} | {
            (lb, lbi) for (_, _, lb, lbi) in q.links
        }
        for endpoint in ((a, a_if), (b, b_if)):
            if endpoint in used:
                return _error(q, f"interface {endpoint[1]} on {endpoint[0]} already linked")
        if (a, a_if) == (b, b_if):
            return _error(q, "link endpoints must be distinct")
        return replace(q, links=q.links | {_canonical_link(a, a_if, b, b_if)})
    if cmd.verb == "deploy":
        if not q.nodes:
            return _error(q, "deploy on empty topology")
        return replace(q, deployed=True, status=InfraStatus.ACCEPT)
    return _error(q, f"unknown infra verb {cmd.verb!r}")


def provision(topology) -> InfraState:
    """Fold the whole topology program from the empty initial state."""
    q = INITIAL
    for cmd in topology:
        q = infra_step(q, cmd)
    return q


def initialize(q: InfraState) -> "netstate.NetState":
    """Bridge an accepting infrastructure state into the initial SUT state.

    Injective on accepting states: the topology is embedded verbatim, so
    structurally distinct inputs give structurally distinct outputs.
    """
    if q.status is not InfraStatus.ACCEPT:
        raise PreconditionError(
            f"initialize requires an accepting infrastructure state, got {q.status.value}"
            + (f" ({q.error_detail})" if q.error_detail else "")
        )
    return netstate.initial_state(sorted(q.nodes), sorted(q.links))
