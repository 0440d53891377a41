"""Exception hierarchy shared by every module."""


class ProbactError(Exception):
    """Base class for all library errors."""


class ValidationError(ProbactError, ValueError):
    """An object violates one of its structural invariants."""


class DegenerateEffectError(ValidationError):
    """Lower/upper probability requested over an empty state set."""


class DomainOverflowError(ValidationError):
    """An effect resolved a fluent to a value outside its domain."""

    def __init__(self, fluent, value):
        super().__init__(f"effect drives fluent {fluent!r} to {value!r}, outside its domain")
        self.fluent = fluent
        self.value = value


class IncompletenessError(ProbactError):
    """A reached state satisfies none of an action's conditions."""


class BoundError(ProbactError):
    """A brute-force procedure was asked to enumerate more than it allows."""


class NothingToRefine(ProbactError):
    """Refinement requested for a plan that is already fully concrete."""


class DomainSyntaxError(ProbactError):
    """Domain text could not be parsed."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column
