"""Exception types shared across the package."""


class EvrecError(Exception):
    """Base class for all errors raised by this package."""


class MissingInterest(EvrecError):
    """A label needed by an interest factor has no value in the user profile."""

    def __init__(self, label):
        self.label = label
        super().__init__(f"no interest value for label {label.text!r} ({label.kind.value})")


class NoRatings(EvrecError):
    """An event has neither individual ratings nor a pre-aggregated average."""


class MissingSelfWeights(EvrecError):
    """The user profile carries no self-assessed factor weights."""


class ZeroWeights(EvrecError):
    """Relative combination is undefined when all self-weights are zero."""


class MissingFactorValue(EvrecError):
    """A scoring function references a factor the caller did not supply."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"no value supplied for factor {name!r}")


class DegenerateReachWarning(UserWarning):
    """Reachability denominator is zero at a nonzero distance; lower bound returned."""


class DimensionMismatch(EvrecError):
    """Vector or matrix shapes do not line up."""


class EmptyInput(EvrecError):
    """An operation received no data."""


class SingularSystem(EvrecError):
    """The (regularized) normal equations are numerically singular."""


class InsufficientSamples(EvrecError):
    """A fit (or one branch of a piecewise fit) has too few samples."""

    def __init__(self, message: str, branch: str | None = None):
        self.branch = branch
        super().__init__(message)


class RegimeDataError(EvrecError):
    """Samples lack a field the requested regime needs (init score, u-abs, ...)."""


class TooFewSamples(EvrecError):
    """Not enough samples to split into train and validation parts."""


class ParseError(EvrecError):
    """A data file could not be parsed; carries file/line/column context."""

    def __init__(self, file: str, line: int | None, column: str | None, message: str):
        self.file = file
        self.line = line
        self.column = column
        where = file
        if line is not None:
            where += f":{line}"
        if column is not None:
            where += f" (column {column})"
        super().__init__(f"{where}: {message}")


class IntegrityError(EvrecError):
    """Referential-integrity violation in a dataset bundle."""

    def __init__(self, kind: str, ids, message: str | None = None):
        self.kind = kind
        self.ids = tuple(ids)
        super().__init__(message or f"{kind}: {', '.join(map(str, self.ids))}")


class VersionMismatch(EvrecError):
    """A persisted file declares a format this code does not understand."""
