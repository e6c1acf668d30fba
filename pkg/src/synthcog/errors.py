"""Exception hierarchy. The CLI maps these onto exit codes."""


class SynthcogError(Exception):
    """Base class for all package errors."""


class ConfigError(SynthcogError, ValueError):
    """Invalid configuration (CLI exit code 2)."""


class InputError(SynthcogError, ValueError):
    """An argument outside an operation's domain."""


class DegenerateInputError(InputError):
    """Input for which the quantity is undefined, e.g. a zero vector or zero variance."""


class TrainingError(SynthcogError, RuntimeError):
    """The classifier cannot be fit to the data given."""


class DataError(SynthcogError, ValueError):
    """A dataset file violates the schema (CLI exit code 3)."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
