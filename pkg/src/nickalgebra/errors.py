"""Exception types shared across the package."""


class NickError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(NickError):
    """Syntax or shape error in a term or script, with source position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class ElaborationError(NickError):
    """A script could not be turned into a soup (unbound name, bad count...)."""


class InapplicableReaction(NickError):
    """apply_reaction was given an instance that does not fire in this soup."""


class BudgetExceeded(NickError):
    """State or species exploration hit its budget.

    Carries whatever partial structure was built so callers can report an
    explicit inconclusive outcome instead of a silent pass/fail.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
