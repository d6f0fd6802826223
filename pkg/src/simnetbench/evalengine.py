"""Property evaluation and scoring over final states and traces.

Every property is decided purely from read observations (never from the
simulator's internals), and evaluation asserts its own non-invasiveness by
comparing state digests around the reads.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass

from .errors import EmptyTraceError
from .netstate import NetState, SutStatus
from .platform import PlatformLanguage, SyntaxClass
from .sim import abstract_fingerprint, apply_sequence, observe
from .task import Property, PropertyKind


@dataclass(frozen=True)
class ScoreReport:
    per_property: tuple[tuple[str, bool], ...]
    score_c: float
    score_r: int
    score_x: float
    score_final: float
    valid: bool
    robustness_replay_detail: str | None = None

    def to_obj(self) -> dict:
        return {
            "per_property": [[k, v] for k, v in self.per_property],
            "score_c": self.score_c,
            "score_r": self.score_r,
            "score_x": self.score_x,
            "score_final": self.score_final,
            "valid": self.valid,
            "robustness_replay_detail": self.robustness_replay_detail,
        }


def _purity_guard(state: NetState):
    before = abstract_fingerprint(state)

    def check():
        after = abstract_fingerprint(state)
        if after != before:
            raise RuntimeError("read purity violated: state digest changed during eval")

    return check


def _addresses_of(state: NetState, node: str) -> set[str]:
    obs = observe(state, f"{node}: show interfaces")
    entries = obs.structured.get("interfaces") or []
    return {
        e["address"].split("/")[0]
        for e in entries
        if isinstance(e, dict) and e.get("address")
    }


def _routes_of(state: NetState, node: str) -> list[dict]:
    obs = observe(state, f"{node}: show ip route")
    return obs.structured.get("routes") or []


def _eval_kind(state: NetState, prop: Property) -> bool:
    kind = prop.kind
    if kind is PropertyKind.REACHABLE:
        obs = observe(state, f"{prop.arg('node')}: ping {prop.arg('target')}")
        return obs.structured.get("success") is True
    if kind in (PropertyKind.ROUTE_PRESENT, PropertyKind.ROUTE_ABSENT):
        prefix = str(ipaddress.ip_network(prop.arg("prefix")))
        present = any(r.get("prefix") == prefix for r in _routes_of(state, prop.arg("node")))
        return present if kind is PropertyKind.ROUTE_PRESENT else not present
    if kind is PropertyKind.OSPF_ADJACENCY:
        a, b = prop.arg("node_a"), prop.arg("node_b")
        obs_a = observe(state, f"{a}: show ospf neighbors").structured.get("neighbors")
        obs_b = observe(state, f"{b}: show ospf neighbors").structured.get("neighbors")
        if not obs_a or not obs_b:
            return False
        return any(e.get("neighbor") == b for e in obs_a) and any(
            e.get("neighbor") == a for e in obs_b
        )
    if kind is PropertyKind.BGP_ESTABLISHED:
        a, b = prop.arg("node_a"), prop.arg("node_b")
        addrs_a = _addresses_of(state, a)
        addrs_b = _addresses_of(state, b)
        summary_a = observe(state, f"{a}: show bgp summary").structured.get("neighbors")
        summary_b = observe(state, f"{b}: show bgp summary").structured.get("neighbors")
        if summary_a is None or summary_b is None:
            return False
        up_a = any(e["established"] and e["neighbor"] in addrs_b for e in summary_a)
        up_b = any(e["established"] and e["neighbor"] in addrs_a for e in summary_b)
        return up_a and up_b
    if kind is PropertyKind.SUMMARIZED_ROUTE:
        target = ipaddress.ip_network(prop.arg("prefix"))
        routes = _routes_of(state, prop.arg("node"))
        present = any(r.get("prefix") == str(target) for r in routes)
        if not present:
            return False
        for r in routes:
            net = ipaddress.ip_network(r["prefix"])
            if net != target and net.subnet_of(target):
                return False
        return True
    return False


def eval_property(state: NetState, prop: Property, check_purity: bool = True) -> bool:
    """Truth value of one property on a stable or error state.

    Error states satisfy nothing; unknown references evaluate false.
    """
    if state.status is SutStatus.ERROR:
        return False
    check = _purity_guard(state) if check_purity else None
    result = _eval_kind(state, prop)
    if check is not None:
        check()
    return result


def eval_intent(state: NetState, properties) -> dict[str, bool]:
    """All properties in task order; asserts the digest is unchanged."""
    check = _purity_guard(state) if state.status is not SutStatus.ERROR else None
    results = {p.id: eval_property(state, p, check_purity=False) for p in properties}
    if check is not None:
        check()
    return results


def score_completeness(results: dict[str, bool]) -> float:
    if not results:
        raise EmptyTraceError("completeness needs at least one property")
    return sum(1 for v in results.values() if v) / len(results)


def is_accepting(state: NetState, properties) -> bool:
    """Membership in the accepting set: converged and every property true."""
    if state.status is not SutStatus.STABLE or not state.converged:
        return False
    return all(eval_intent(state, properties).values())


def _replay(final_state: NetState, commands, properties):
    replayed = apply_sequence(final_state, list(commands))
    if replayed.status is SutStatus.ERROR:
        return 0, f"replay failed: {replayed.error_detail}"
    if not is_accepting(replayed, properties):
        return 0, "replay left the accepting set"
    return 1, None


def score_robustness(final_state: NetState, commands, properties) -> int:
    """1 iff the final state accepts and re-applying the solution from it
    lands in an accepting state again; incomplete solutions score 0."""
    if not is_accepting(final_state, properties):
        return 0
    value, _ = _replay(final_state, commands, properties)
    return value


def score_soundness(trace, platform: PlatformLanguage) -> float:
    """Fraction of non-STOP actions that are syntactically valid."""
    actions = [r.action for r in trace.records if r.action_kind != "stop"]
    if not actions:
        raise EmptyTraceError("soundness needs at least one action")
    valid = sum(
        1
        for action in actions
        if platform.validate_syntax(action) is not SyntaxClass.INVALID
    )
    return valid / len(actions)


def score_final_value(score_c: float, score_r: float, score_x: float, weights) -> float:
    w_c, w_r, w_x = weights
    return w_c * score_c + w_r * score_r + w_x * score_x


def build_report(
    final_state: NetState,
    solution_commands,
    properties,
    trace,
    platform: PlatformLanguage,
    weights,
) -> ScoreReport:
    if final_state.status is SutStatus.ERROR:
        results = {p.id: False for p in properties}
    else:
        results = eval_intent(final_state, properties)
    score_c = score_completeness(results)
    valid = score_c == 1.0 and final_state.converged

    if valid:
        score_r, replay_detail = _replay(final_state, solution_commands, properties)
    else:
        score_r, replay_detail = 0, None

    try:
        score_x = score_soundness(trace, platform)
    except EmptyTraceError:
        score_x = 0.0

    final = score_final_value(score_c, score_r, score_x, weights)
    return ScoreReport(
        per_property=tuple((p.id, results[p.id]) for p in properties),
        score_c=score_c,
        score_r=score_r,
        score_x=score_x,
        score_final=final,
        valid=valid,
        robustness_replay_detail=replay_detail,
    )
