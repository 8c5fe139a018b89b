"""Error codes, exception types and raise helpers."""

from typing import Any, NoReturn


class ErrorCode:
    """Error codes for reports and exit handling."""

    USAGE_ERROR = "usage_error"
    PARSE_ERROR = "parse_error"
    INVALID_OPERATION = "invalid_operation"
    INCONSISTENT_NEIGHBORHOOD = "inconsistent_neighborhood"
    DIAMOND_VIOLATION = "diamond_violation"
    QUERY_NOT_REALIZABLE = "query_not_realizable"
    BLOCKED = "blocked"
    CHANNEL_DEAD = "channel_dead"
    AUDIT_FAILURE = "audit_failure"
    EXPLORATION_LIMIT = "exploration_limit"
    INTERNAL_ERROR = "internal_error"


EXIT_OK = 0
EXIT_SEMANTIC = 1
EXIT_USAGE = 2


class TcaError(Exception):
    """Base error carrying a stable code, a message and structured details."""

    code: str = ErrorCode.INTERNAL_ERROR
    exit_code: int = EXIT_SEMANTIC

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_payload(self) -> dict[str, Any]:
        return create_error_response(self.code, self.message, self.details)


class UsageError(TcaError):
    code = ErrorCode.USAGE_ERROR
    exit_code = EXIT_USAGE


class ParseError(TcaError):
    code = ErrorCode.PARSE_ERROR
    exit_code = EXIT_USAGE


class InvalidOperationError(TcaError):
    code = ErrorCode.INVALID_OPERATION


class InconsistentNeighborhoodError(TcaError):
    code = ErrorCode.INCONSISTENT_NEIGHBORHOOD


class DiamondViolationError(TcaError):
    code = ErrorCode.DIAMOND_VIOLATION


class QueryNotRealizableError(TcaError):
    code = ErrorCode.QUERY_NOT_REALIZABLE


class StepError(TcaError):
    """A communication of the distributed automaton cannot happen."""

    code = ErrorCode.BLOCKED


class BlockedError(StepError):
    code = ErrorCode.BLOCKED


class ChannelDeadError(StepError):
    code = ErrorCode.CHANNEL_DEAD


class AuditFailureError(TcaError):
    code = ErrorCode.AUDIT_FAILURE


class ExplorationLimitError(TcaError):
    code = ErrorCode.EXPLORATION_LIMIT


def create_error_response(
    code: str,
    message: str,
    details: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """
    Create standardized error payload.

    Args:
        code: Error code
        message: Human-readable error message
        details: Optional additional details

    Returns:
        Dictionary in the ``{"error": {...}}`` format
    """
    return {
        "error": {
            "code": code,
            "message": message,
            "details": details or {},
        }
    }


def raise_usage_error(message: str, details: dict[str, Any] | None = None) -> NoReturn:
    """Raise a usage error (exit code 2)."""
    raise UsageError(message, details)


def raise_parse_error(
    message: str,
    line: int | None = None,
    column: int | None = None,
    details: dict[str, Any] | None = None,
) -> NoReturn:
    """Raise a parse error with the failing position when known."""
    payload = dict(details or {})
    if line is not None:
        payload["line"] = line
    if column is not None:
        payload["column"] = column
    raise ParseError(message, payload)


def raise_invalid_operation(reason: str, details: dict[str, Any] | None = None) -> NoReturn:
    """Raise when an action is applied although its side conditions fail."""
    raise InvalidOperationError(reason, details)


def raise_inconsistent(clause: str, details: dict[str, Any] | None = None) -> NoReturn:
    """Raise when a neighborhood family does not describe a tree."""
    raise InconsistentNeighborhoodError(clause, details)


def raise_not_realizable(
    message: str = "diam query not realizable",
    details: dict[str, Any] | None = None,
) -> NoReturn:
    """Raise when the diam witness search is exhausted."""
    raise QueryNotRealizableError(message, details)


def raise_blocked(reason: str, details: dict[str, Any] | None = None) -> NoReturn:
    """Raise when a local transition of the distributed automaton is undefined."""
    raise BlockedError(reason, details)
