from typing import Optional


class ColumnNumberError(Exception):
    """Base error; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class PreconditionError(ColumnNumberError, ValueError):
    """Input violates a documented precondition."""

    exit_code = 2


class VerificationFailure(ColumnNumberError):
    """A certificate or inequality did not verify."""

    exit_code = 1


class InternalGuardError(ColumnNumberError):
    """A consistency guard tripped; indicates a bug, not bad input."""

    exit_code = 3


class SearchExhaustedError(ColumnNumberError):
    """The certified thin-direction search bound ran out."""

    exit_code = 4
