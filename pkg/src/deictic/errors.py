"""Exception types shared across the package."""


class DeicticError(Exception):
    """Base class for all package-specific errors."""


class UnknownPronoun(DeicticError):
    """A lexeme outside the supported pronoun taxonomy was classified."""


class DegenerateBox(DeicticError):
    """An overlap ratio was requested against a zero-area child box."""


class BehindCamera(DeicticError):
    """A 3D point with non-positive camera-frame depth cannot be projected."""


class NothingToReplace(DeicticError):
    """v1 assembly had a single referent and it resolved to nothing."""


class CompletionFailed(DeicticError):
    """The chat-completion backend errored, timed out, or had no script."""


class TimeoutExceeded(DeicticError):
    """A single backend channel exceeded its configured timeout."""


class AllBackendsFailed(DeicticError):
    """Every ML channel in the analysis fan-out errored."""


class SchemaViolation(DeicticError):
    """A fixture or corpus file does not match its documented schema."""

    def __init__(self, message: str, *, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class SessionPhaseError(DeicticError):
    """An operation was invoked in a session phase where it is not legal."""
