"""Episode controller: provisions the topology, drives the bounded agent
loop, extracts the solution, scores, analyzes, and persists the trace.

Failed configuration commands roll back to the pre-command state and surface
their error detail as the observation; the agent is expected to recover.
"""

from __future__ import annotations

import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import behavior
from .agents import AgentHandle, AgentRequest
from .errors import (
    AgentProtocolError,
    AgentTimeout,
    InfraError,
    PreconditionError,
)
from .evalengine import build_report, eval_intent, score_completeness
from .infra import InfraStatus, initialize, provision
from .netstate import SutStatus
from .platform import SyntaxClass
from .sim import abstract_fingerprint, apply_config, apply_sequence, observe
from .task import TaskSpec, render_prompt
from .trace import (
    ActionKind,
    Terminal,
    TerminalReason,
    Trace,
    TraceRecord,
    sanitize_agent_id,
    write_trace,
)

OBSERVATION_BUDGET_S = 5.0  # per-read allowance in the halting bound

_PHASE_RE = re.compile(
    r"^idle provision (?:error|ready(?: explore)+ eval score done)$"
)


def check_phases(phases) -> bool:
    """Accept exactly the controller phase words the transition graph allows."""
    return _PHASE_RE.fullmatch(" ".join(phases)) is not None


@dataclass(frozen=True)
class Solution:
    """The ordered accepted configuration commands of one episode."""

    commands: tuple[str, ...]


def extract_solution(trace: Trace) -> Solution:
    return Solution(
        commands=tuple(
            r.action
            for r in trace.records
            if r.action_kind == ActionKind.CONFIG.value and r.accepted
        )
    )


def run_episode(
    task: TaskSpec,
    agent: AgentHandle,
    rep: int = 1,
    out_dir: str | Path | None = None,
) -> Trace:
    """Run one full episode and return its scored, analyzed trace.

    Raises InfraError (carrying the partial trace) when provisioning fails;
    the SUT is never created and nothing is scored in that case.
    """
    trace = Trace(
        task_id=task.id,
        tier=task.tier.value,
        agent_id=sanitize_agent_id(agent.id),
        rep=rep,
        platform=task.platform,
        synthetic=agent.synthetic,
    )
    phases = ["idle", "provision"]

    infra_state = provision(task.topology)
    if infra_state.status is not InfraStatus.ACCEPT:
        phases.append("error")
        trace.phases = phases
        agent.close()
        if out_dir is not None:
            write_trace(trace, out_dir)
        raise InfraError(infra_state.error_detail or "provisioning failed", trace=trace)
    sut = initialize(infra_state)
    phases.append("ready")

    platform = task.language()
    prompt = render_prompt(task)
    history: list[tuple[str, str]] = []
    snapshots: list[float] = []
    start = time.monotonic()
    budget = task.time_budget_s
    terminal_reason: str | None = None

    phases.append("explore")
    turn = 0
    while turn < task.turn_budget:
        elapsed = time.monotonic() - start
        if elapsed > budget:
            terminal_reason = TerminalReason.TIME_BUDGET.value
            break
        turn += 1
        request = AgentRequest(
            task_prompt=prompt,
            turn=turn,
            history=tuple(history),
            remaining_turns=task.turn_budget - turn,
            remaining_time_s=max(0.0, budget - elapsed),
        )
        turn_started = time.monotonic()
        protocol_error = None
        try:
            response = agent.next_action(request)
        except AgentTimeout:
            turn -= 1
            terminal_reason = TerminalReason.TIME_BUDGET.value
            break
        except AgentProtocolError as exc:
            response = None
            protocol_error = str(exc)
        wall_ms = int((time.monotonic() - turn_started) * 1000)

        if response is not None and response.action == "STOP":
            trace.records.append(
                TraceRecord(
                    turn=turn,
                    action="STOP",
                    action_kind=ActionKind.STOP.value,
                    accepted=False,
                    observation_text="",
                    state_digest=abstract_fingerprint(sut),
                    tokens_in=response.tokens_in,
                    tokens_out=response.tokens_out,
                    wall_ms=wall_ms,
                    sim_clock=sut.abstract_clock,
                    thought=response.thought,
                )
            )
            snapshots.append(score_completeness(eval_intent(sut, task.intent)))
            phases.append("explore")
            terminal_reason = TerminalReason.AGENT_STOP.value
            break

        command_class = None
        thought = None
        tokens_in = tokens_out = 0
        if response is None:
            action = "<protocol-error>"
            kind = ActionKind.INVALID.value
            accepted = False
            observation = f"rejected: {protocol_error}"
        else:
            action = response.action
            thought = response.thought
            tokens_in, tokens_out = response.tokens_in, response.tokens_out
            syntax = platform.validate_syntax(action)
            if syntax is SyntaxClass.CONFIG_VALID:
                kind = ActionKind.CONFIG.value
                command_class = platform.classify(action).value
                successor = apply_config(sut, action)
                if successor.status is SutStatus.ERROR:
                    accepted = False
                    observation = f"error: {successor.error_detail}"
                else:
                    accepted = True
                    observation = "applied"
                    sut = successor
            elif syntax is SyntaxClass.READ_VALID:
                kind = ActionKind.READ.value
                accepted = True
                observation = observe(sut, action).text
            else:
                kind = ActionKind.INVALID.value
                accepted = False
                observation = "rejected: invalid command"

        trace.records.append(
            TraceRecord(
                turn=turn,
                action=action,
                action_kind=kind,
                accepted=accepted,
                observation_text=observation,
                state_digest=abstract_fingerprint(sut),
                tokens_in=tokens_in,
                tokens_out=tokens_out,
                wall_ms=wall_ms,
                sim_clock=sut.abstract_clock,
                command_class=command_class,
                thought=thought,
            )
        )
        history.append((action, observation))
        snapshots.append(score_completeness(eval_intent(sut, task.intent)))
        phases.append("explore")

    if terminal_reason is None:
        terminal_reason = TerminalReason.TURN_BUDGET.value

    trace.terminal = Terminal(
        reason=terminal_reason, final_digest=abstract_fingerprint(sut)
    )
    phases.append("eval")
    solution = extract_solution(trace)
    phases.append("score")
    trace.score = build_report(
        sut, solution.commands, task.intent, trace, platform, task.weights
    )
    phases.append("done")
    trace.phases = phases
    trace.score_c_snapshots = snapshots
    trace.behavior = behavior.analyze(trace, snapshots)

    agent.close()
    if out_dir is not None:
        write_trace(trace, out_dir)
    return trace


def replay_closure_holds(task: TaskSpec, trace: Trace) -> bool:
    """Re-derive the final state from the extracted solution alone and
    compare digests; ties the solution to the episode's final state."""
    if trace.terminal is None:
        return False
    fresh = initialize(provision(task.topology))
    replayed = apply_sequence(fresh, extract_solution(trace).commands)
    return abstract_fingerprint(replayed) == trace.terminal.final_digest


def run_batch(
    task: TaskSpec,
    agent_factory,
    reps: int,
    out_dir: str | Path | None = None,
    jobs: int = 1,
) -> list[Trace]:
    """Independent repetitions: fresh provision, fresh agent, one trace each."""
    if reps < 1:
        raise PreconditionError("reps must be >= 1")
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)

    def one(rep: int) -> Trace:
        return run_episode(task, agent_factory(rep), rep=rep, out_dir=out_dir)

    if jobs <= 1:
        return [one(rep) for rep in range(1, reps + 1)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, range(1, reps + 1)))
