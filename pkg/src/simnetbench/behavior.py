"""Multi-turn behavioral analyzers: coherence, meltdown signals, efficiency.

All functions are pure over completed traces. Meltdown thresholds:
  command_loop          identical action string 4+ times consecutively
  destructive_spiral    3+ destructive among any 5 consecutive config commands
  cognitive_stagnation  a run of more than 25 turns each scoring below 0.1
  diagnostic_fixation   10 consecutive read-only turns
  premature_submission  agent-initiated stop with final score below 0.30
"""

from __future__ import annotations

from .errors import LengthMismatch
from .trace import ActionKind, BehaviorReport, TerminalReason, Trace

SIGNALS = (
    "command_loop",
    "destructive_spiral",
    "cognitive_stagnation",
    "diagnostic_fixation",
    "premature_submission",
)

LOOP_THRESHOLD = 4
SPIRAL_WINDOW = 5
SPIRAL_THRESHOLD = 3
STAGNATION_RUN = 25
STAGNATION_SCORE = 0.1
FIXATION_RUN = 10
PREMATURE_SCORE = 0.30


def coherence_curve(trace: Trace) -> list[tuple[int, int]]:
    """Cumulative constructive progress, one point per turn: accepted
    constructive configs add one, accepted destructive configs subtract one,
    everything else leaves the value unchanged."""
    curve = []
    value = 0
    for record in trace.records:
        if record.action_kind == ActionKind.CONFIG.value and record.accepted:
            if record.command_class == "destructive":
                value -= 1
            else:
                value += 1
        curve.append((record.turn, value))
    return curve


def detect_meltdowns(trace: Trace, score_snapshots) -> dict[str, int]:
    """Every triggered signal mapped to its first-trigger turn."""
    if len(score_snapshots) != len(trace.records):
        raise LengthMismatch(
            f"{len(score_snapshots)} snapshots for {len(trace.records)} turns"
        )
    signals: dict[str, int] = {}

    streak = 0
    previous_action = None
    for record in trace.records:
        if record.action == previous_action:
            streak += 1
        else:
            streak = 1
            previous_action = record.action
        if streak >= LOOP_THRESHOLD and "command_loop" not in signals:
            signals["command_loop"] = record.turn

    config_records = [
        r for r in trace.records if r.action_kind == ActionKind.CONFIG.value
    ]
    for i, record in enumerate(config_records):
        window = config_records[max(0, i - SPIRAL_WINDOW + 1) : i + 1]
        destructive = sum(1 for r in window if r.command_class == "destructive")
        if destructive >= SPIRAL_THRESHOLD:
            signals.setdefault("destructive_spiral", record.turn)
            break

    run = 0
    for record, snapshot in zip(trace.records, score_snapshots):
        if snapshot < STAGNATION_SCORE:
            run += 1
            if run > STAGNATION_RUN and "cognitive_stagnation" not in signals:
                signals["cognitive_stagnation"] = record.turn
        else:
            run = 0

    run = 0
    for record in trace.records:
        if record.action_kind == ActionKind.READ.value:
            run += 1
            if run >= FIXATION_RUN and "diagnostic_fixation" not in signals:
                signals["diagnostic_fixation"] = record.turn
        else:
            run = 0

    if (
        trace.terminal is not None
        and trace.terminal.reason == TerminalReason.AGENT_STOP.value
        and trace.score is not None
        and trace.score.score_final < PREMATURE_SCORE
        and trace.records
    ):
        signals["premature_submission"] = trace.records[-1].turn

    return signals


def efficiency(trace: Trace) -> tuple[float, float]:
    """(exploration ratio, score per thousand tokens)."""
    reads = sum(1 for r in trace.records if r.action_kind == ActionKind.READ.value)
    constructive = sum(
        1
        for r in trace.records
        if r.action_kind == ActionKind.CONFIG.value
        and r.accepted
        and r.command_class != "destructive"
    )
    ratio = reads / constructive if constructive else float("inf")
    total_tokens = sum(r.tokens_in + r.tokens_out for r in trace.records)
    score = trace.score.score_final if trace.score is not None else 0.0
    token_efficiency = (
        score / (total_tokens / 1000.0) if total_tokens else float("inf")
    )
    return ratio, token_efficiency


def analyze(trace: Trace, score_snapshots) -> BehaviorReport:
    ratio, token_efficiency = efficiency(trace)
    return BehaviorReport(
        coherence_curve=coherence_curve(trace),
        meltdown_signals=detect_meltdowns(trace, score_snapshots),
        exploration_ratio=ratio,
        token_efficiency=token_efficiency,
        turns_used=len(trace.records),
        synthetic=trace.synthetic,
    )
