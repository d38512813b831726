"""Shared exception types.

Every error carries a stable ``code`` that the HTTP service and the CLI use
as the machine-readable ``error_code`` field.
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all domain errors raised by this package."""

    code = "error"


# --- taxonomy parsing / serialization ---------------------------------------

class DuplicateClass(WorkbenchError):
    code = "duplicate_class"


class UnknownParent(WorkbenchError):
    code = "unknown_parent"


class CycleDetected(WorkbenchError):
    """Raised when the subsumption relation is cyclic.

    ``cycle`` is one witness, as a list of class ids where each entry is
    subsumed by the next and the last equals the first.
    """

    code = "cycle_detected"

    def __init__(self, cycle: list[str]):
        self.cycle = list(cycle)
        super().__init__("cycle in subsumption edges: " + " -> ".join(self.cycle))


class TaxonomySyntaxError(WorkbenchError):
    code = "syntax_error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class NotATree(WorkbenchError):
    code = "not_a_tree"


# --- labeling / constraint checking -----------------------------------------

class UnknownClass(WorkbenchError):
    code = "unknown_class"


class IllegalValue(WorkbenchError):
    code = "illegal_value"


class PreconditionViolated(WorkbenchError):
    code = "precondition_violated"


# --- LLM transport ------------------------------------------------------------

class LlmError(WorkbenchError):
    """Base for failures while talking to the completion endpoint."""

    code = "llm_error"


class AuthError(LlmError):
    code = "auth_error"


class RateLimited(LlmError):
    code = "rate_limited"


class TransportError(LlmError):
    code = "transport_error"


class MalformedResponse(LlmError):
    code = "malformed_response"


class EmptyResponse(WorkbenchError):
    """The model reply contained no parseable label line at all."""

    code = "empty_response"


# --- benchmarks / evaluation ---------------------------------------------------

class UnknownBenchmark(WorkbenchError):
    code = "unknown_benchmark"


class CorruptBenchmark(WorkbenchError):
    code = "corrupt_benchmark"


class ClassSetMismatch(WorkbenchError):
    code = "class_set_mismatch"


class AllTrialsFailed(WorkbenchError):
    code = "all_trials_failed"


# --- sessions -------------------------------------------------------------------

class SessionNotFound(WorkbenchError):
    code = "session_not_found"


class EmptyGuidance(WorkbenchError):
    code = "empty_guidance"


class NoGoldLabels(WorkbenchError):
    code = "no_gold_labels"


class IoError(WorkbenchError):
    """File persistence failure, including malformed session documents."""

    code = "io_error"
