"""Exception hierarchy shared by every domlab module."""


class DomlabError(Exception):
    """Base class for all domlab errors."""


class ValidationError(DomlabError, ValueError):
    """An object violates a structural invariant."""


class NonUnitMass(ValidationError):
    """Probability masses (or mixture weights) do not sum to exactly one."""


class UnknownOutcome(ValidationError):
    pass


class UnknownStrategy(ValidationError):
    pass


class NotStrict(ValidationError):
    """A strict preference profile was required but ties were found."""


class DomainViolation(ValidationError):
    pass


class ScfPartial(ValidationError):
    """The social choice table does not cover every ordinal state."""


class DictatorialCase(ValidationError):
    """A construction requires a non-dictatorial target at the base state."""


class LabelClash(ValidationError):
    pass


class WrongArity(ValidationError):
    pass


class EmptyWitness(ValidationError):
    """Some S_i^z is empty although the choice function is surjective."""


class SizeLimit(DomlabError):
    """An enumeration would exceed the configured cap."""


class Timeout(DomlabError):
    """A decision procedure exceeded its configured work cap."""


class ParseError(DomlabError, ValueError):
    """Malformed textual input; carries a 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}, column {column or 1})"
        super().__init__(message + where)
