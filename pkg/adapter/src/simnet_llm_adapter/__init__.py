"""Reference external agent: bridges the harness wire protocol to
chat-completion LLM APIs, with client-side context management and token
accounting."""

from .adapter import Adapter, extract_action, fit_history
from .config import AdapterConfig
from .model import ChatResult, HttpChatModel, MockModel

__all__ = [
    "Adapter",
    "AdapterConfig",
    "ChatResult",
    "HttpChatModel",
    "MockModel",
    "extract_action",
    "fit_history",
]
