"""Deterministic state-machine benchmark harness for network-configuration
agents, built around an embedded routing simulator."""

from .agents import AgentHandle, AgentRequest, AgentResponse, builtin
from .behavior import analyze, coherence_curve, detect_meltdowns, efficiency
from .controller import (
    Solution,
    check_phases,
    extract_solution,
    replay_closure_holds,
    run_batch,
    run_episode,
)
from .evalengine import (
    ScoreReport,
    build_report,
    eval_intent,
    eval_property,
    is_accepting,
    score_completeness,
    score_final_value,
    score_robustness,
    score_soundness,
)
from .infra import InfraState, InfraStatus, infra_step, initialize, provision
from .netstate import NetState, Route, SutStatus
from .platform import PlatformLanguage, SyntaxClass, validate_syntax
from .sim import (
    Observation,
    abstract_fingerprint,
    apply_config,
    apply_sequence,
    converge,
    observe,
)
from .task import (
    InfraCommand,
    Property,
    TaskSpec,
    load_task,
    parse_task,
    render_prompt,
    to_document,
)
from .trace import BehaviorReport, Terminal, Trace, TraceRecord, read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "AgentHandle",
    "AgentRequest",
    "AgentResponse",
    "BehaviorReport",
    "InfraCommand",
    "InfraState",
    "InfraStatus",
    "NetState",
    "Observation",
    "PlatformLanguage",
    "Property",
    "Route",
    "ScoreReport",
    "Solution",
    "SutStatus",
    "SyntaxClass",
    "TaskSpec",
    "Terminal",
    "Trace",
    "TraceRecord",
    "abstract_fingerprint",
    "analyze",
    "apply_config",
    "apply_sequence",
    "build_report",
    "builtin",
    "check_phases",
    "coherence_curve",
    "converge",
    "detect_meltdowns",
    "efficiency",
    "eval_intent",
    "eval_property",
    "extract_solution",
    "infra_step",
    "initialize",
    "is_accepting",
    "load_task",
    "observe",
    "parse_task",
    "provision",
    "read_trace",
    "render_prompt",
    "replay_closure_holds",
    "run_batch",
    "run_episode",
    "score_completeness",
    "score_final_value",
    "score_robustness",
    "score_soundness",
    "to_document",
    "validate_syntax",
    "write_trace",
]
