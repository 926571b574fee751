"""
Custom exceptions for the MDC planner.
Provides specific error types for the library, the CLI and the HTTP service.
"""

from typing import Optional, Any, Dict


class PlannerError(Exception):
    """Base exception for all planner errors."""

    def __init__(self, message: str, error_code: Optional[str] = None, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.__class__.__name__.upper()
        self.details = details or {}


class InvalidArgumentError(PlannerError, ValueError):
    """Raised when an operation receives arguments outside its domain."""
    pass


class InfeasibleSystemError(PlannerError):
    """Raised when the service fixed point does not exist (utilization >= 1)."""
    pass


class ConfigurationError(PlannerError):
    """Raised when a campaign document or runtime setting is invalid."""
    pass


class StorageError(PlannerError):
    """Raised when result files cannot be written or read."""
    pass


class RunNotFoundError(PlannerError):
    """Raised when a run id has no geometry dump."""
    pass


class CampaignNotFoundError(PlannerError):
    """Raised when a campaign job is not found."""
    pass


class CampaignProcessingError(PlannerError):
    """Raised when a campaign job cannot be started or fails."""
    pass


class InvariantViolationError(PlannerError):
    """Raised when an internal invariant check fails."""
    pass


# HTTP Exception mappings for FastAPI
ERROR_HTTP_MAPPINGS = {
    InvalidArgumentError: 400,
    ConfigurationError: 422,
    InfeasibleSystemError: 422,
    RunNotFoundError: 404,
    CampaignNotFoundError: 404,
    CampaignProcessingError: 409,
    StorageError: 500,
    InvariantViolationError: 500,
}

# Process exit codes for the command-line interface
EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_IO_ERROR = 2
EXIT_INVARIANT_VIOLATION = 3

ERROR_EXIT_CODES = {
    ConfigurationError: EXIT_CONFIG_ERROR,
    InvalidArgumentError: EXIT_CONFIG_ERROR,
    RunNotFoundError: EXIT_IO_ERROR,
    StorageError: EXIT_IO_ERROR,
    InvariantViolationError: EXIT_INVARIANT_VIOLATION,
}


def exit_code_for(error: BaseException) -> int:
    """Resolve the CLI exit code for an exception, walking its class hierarchy."""
    for cls in type(error).__mro__:
        if cls in ERROR_EXIT_CODES:
            return ERROR_EXIT_CODES[cls]
    if isinstance(error, OSError):
        return EXIT_IO_ERROR
    return EXIT_INVARIANT_VIOLATION


def http_status_for(error: BaseException) -> int:
    """Resolve the HTTP status code for an exception."""
    for cls in type(error).__mro__:
        if cls in ERROR_HTTP_MAPPINGS:
            return ERROR_HTTP_MAPPINGS[cls]
    return 500
