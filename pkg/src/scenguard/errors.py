"""Exception hierarchy shared across the package."""


class ScenGuardError(Exception):
    """Base class for all errors raised by scenguard."""


class ArityError(ScenGuardError):
    """A predicate or network was applied to a value tuple of the wrong length."""


class DeterminismError(ScenGuardError):
    """More than one transition pattern matched a concrete event at one state."""


class ModelError(ScenGuardError):
    """A model violates a structural convention (e.g. a guard blocks an input event)."""


class ParseError(ScenGuardError):
    """Malformed text input. Carries a 1-based line and column when known."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
