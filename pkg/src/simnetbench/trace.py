"""Episode traces: per-turn records, terminal, score, analysis, phase log.

On disk a trace is newline-delimited JSON: one header record, one record per
turn, one terminal record, one score record (when the episode was scored),
one analysis record, and one final phases record. wall_ms is the only
wall-clock field; digest comparisons must ignore it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from enum import Enum
from pathlib import Path

from .evalengine import ScoreReport


class ActionKind(str, Enum):
    CONFIG = "config"
    READ = "read"
    STOP = "stop"
    INVALID = "invalid"


class TerminalReason(str, Enum):
    AGENT_STOP = "agent_stop"
    TURN_BUDGET = "turn_budget"
    TIME_BUDGET = "time_budget"


@dataclass(frozen=True)
class TraceRecord:
    turn: int
    action: str
    action_kind: str
    accepted: bool
    observation_text: str
    state_digest: str
    tokens_in: int = 0
    tokens_out: int = 0
    wall_ms: int = 0
    sim_clock: int = 0
    command_class: str | None = None
    thought: str | None = None


@dataclass(frozen=True)
class Terminal:
    reason: str
    final_digest: str


@dataclass
class BehaviorReport:
    coherence_curve: list[tuple[int, int]]
    meltdown_signals: dict[str, int]
    exploration_ratio: float
    token_efficiency: float
    turns_used: int
    synthetic: bool = False

    def to_obj(self) -> dict:
        return {
            "coherence_curve": [list(p) for p in self.coherence_curve],
            "meltdown_signals": dict(self.meltdown_signals),
            "exploration_ratio": self.exploration_ratio,
            "token_efficiency": self.token_efficiency,
            "turns_used": self.turns_used,
            "synthetic": self.synthetic,
        }


@dataclass
class Trace:
    task_id: str
    tier: str
    agent_id: str
    rep: int
    platform: str = "simnet-v1"
    synthetic: bool = False
    records: list[TraceRecord] = field(default_factory=list)
    terminal: Terminal | None = None
    score: ScoreReport | None = None
    phases: list[str] = field(default_factory=list)
    score_c_snapshots: list[float] = field(default_factory=list)
    behavior: BehaviorReport | None = None

    def filename(self) -> str:
        return f"{self.task_id}.{self.agent_id}.{self.rep}.trace"


def sanitize_agent_id(raw: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "._-" else "_" for ch in raw) or "agent"


def trace_lines(trace: Trace) -> list[str]:
    rows: list[dict] = [
        {
            "type": "header",
            "task_id": trace.task_id,
            "tier": trace.tier,
            "agent_id": trace.agent_id,
            "rep": trace.rep,
            "platform": trace.platform,
            "synthetic": trace.synthetic,
        }
    ]
    for record in trace.records:
        row = {"type": "turn", **asdict(record)}
        if row["thought"] is None:
            del row["thought"]
        rows.append(row)
    if trace.terminal is not None:
        rows.append(
            {
                "type": "terminal",
                "reason": trace.terminal.reason,
                "final_digest": trace.terminal.final_digest,
            }
        )
    if trace.score is not None:
        rows.append({"type": "score", **trace.score.to_obj()})
    if trace.behavior is not None:
        rows.append(
            {
                "type": "analysis",
                **trace.behavior.to_obj(),
                "score_c_snapshots": list(trace.score_c_snapshots),
            }
        )
    rows.append({"type": "phases", "phases": list(trace.phases)})
    return [json.dumps(row, sort_keys=True) for row in rows]


def write_trace(trace: Trace, directory: str | Path) -> Path:
    path = Path(directory) / trace.filename()
    path.write_text("\n".join(trace_lines(trace)) + "\n", encoding="utf-8")
    return path


def read_trace(path: str | Path) -> Trace:
    trace: Trace | None = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        kind = row.pop("type")
        if kind == "header":
            trace = Trace(
                task_id=row["task_id"],
                tier=row["tier"],
                agent_id=row["agent_id"],
                rep=row["rep"],
                platform=row.get("platform", "simnet-v1"),
                synthetic=row.get("synthetic", False),
            )
        elif trace is None:
            raise ValueError(f"{path}: trace does not start with a header record")
        elif kind == "turn":
            trace.records.append(TraceRecord(**row))
        elif kind == "terminal":
            trace.terminal = Terminal(reason=row["reason"], final_digest=row["final_digest"])
        elif kind == "score":
            trace.score = ScoreReport(
                per_property=tuple((k, v) for k, v in row["per_property"]),
                score_c=row["score_c"],
                score_r=row["score_r"],
                score_x=row["score_x"],
                score_final=row["score_final"],
                valid=row["valid"],
                robustness_replay_detail=row.get("robustness_replay_detail"),
            )
        elif kind == "analysis":
            trace.score_c_snapshots = row.pop("score_c_snapshots", [])
            trace.behavior = BehaviorReport(
                coherence_curve=[tuple(p) for p in row["coherence_curve"]],
                meltdown_signals=row["meltdown_signals"],
                exploration_ratio=row["exploration_ratio"],
                token_efficiency=row["token_efficiency"],
                turns_used=row["turns_used"],
                synthetic=row.get("synthetic", False),
            )
        elif kind == "phases":
            trace.phases = row["phases"]
        else:
            raise ValueError(f"{path}: unknown record type {kind!r}")
    if trace is None:
        raise ValueError(f"{path}: empty trace file")
    return trace
