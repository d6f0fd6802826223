"""Adapter configuration: model identity, credentials, context budget."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

DEFAULT_CONTEXT_BUDGET = 120_000

# Non-normative system prompt; operators may replace it wholesale.
DEFAULT_SYSTEM_PROMPT = (
    "You are operating network devices through a benchmark harness. "
    "Each turn, reply with exactly one line: either a single device command "
    "of the form `<node>: <command>`, or the single word STOP when every "
    "goal is satisfied. Never add commentary or extra lines."
)


@dataclass
class AdapterConfig:
    model: str = "mock"
    api_base: str | None = None
    api_key: str | None = None
    context_budget_tokens: int = DEFAULT_CONTEXT_BUDGET
    temperature: float = 0.0
    max_tokens: int = 256
    system_prompt: str = DEFAULT_SYSTEM_PROMPT

    def __post_init__(self):
        if self.context_budget_tokens <= 0:
            raise ValueError("context_budget_tokens must be positive")

    @classmethod
    def from_env(cls, **overrides) -> "AdapterConfig":
        """Credentials and endpoint come from the environment, never flags,
        so they cannot leak into process listings or traces."""
        values = {
            "model": os.environ.get("LLM_MODEL", "mock"),
            "api_base": os.environ.get("LLM_API_BASE"),
            "api_key": os.environ.get("LLM_API_KEY"),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
