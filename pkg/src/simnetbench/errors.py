"""Exception types shared across the harness."""


class SchemaError(Exception):
    """Task document is structurally malformed."""


class ValidationError(Exception):
    """Task document violates a type invariant; message names the field."""


class PreconditionError(Exception):
    """An operation was called outside its contract."""


class EmptyTraceError(Exception):
    """Soundness scoring requires at least one recorded action."""


class LengthMismatch(Exception):
    """Score snapshots do not line up with trace turns."""


class InfraError(Exception):
    """Topology provisioning ended in an error state.

    Carries the partial trace (header + phase log) when raised by the
    controller so callers can still persist the failed episode.
    """

    def __init__(self, detail: str, trace=None):
        super().__init__(detail)
        self.detail = detail
        self.trace = trace


class AgentProtocolError(Exception):
    """Agent response could not be parsed into an action."""


class AgentTimeout(Exception):
    """Agent failed to answer within its deadline."""


class UnknownAgent(Exception):
    """Requested builtin agent name is not registered."""
