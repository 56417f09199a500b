"""Exception hierarchy shared across compforge modules."""


class CompforgeError(Exception):
    """Base class for all compforge errors."""


class SchemaError(CompforgeError):
    """A document (space JSON, corpus CSV, embedding CSV, checkpoint) is malformed."""


class UnknownReferenceError(CompforgeError):
    """A rule or record names a dimension/component/config that does not exist."""


class ShapeError(CompforgeError):
    """An input has the wrong length or array shape."""


class ExhaustedError(CompforgeError):
    """Rejection sampling found no valid candidate within the retry bound."""


class DuplicateError(CompforgeError):
    """A (dataset, horizon, config) triple appears more than once."""


class MissingMetricError(CompforgeError):
    """A requested metric is absent from at least one record."""


class UnknownConfigError(CompforgeError):
    """A corpus record references a config_id absent from the pool."""


class AliasError(CompforgeError):
    """The design matrix is rank deficient; some effects are not estimable."""


class DegenerateError(CompforgeError):
    """A computation is undefined on this input (zero variance, zero denominator)."""


class InsufficientError(CompforgeError):
    """Not enough data points/groups for the requested statistic."""


class TooShortError(CompforgeError):
    """A series is too short for the requested window or feature set."""


class DimMismatchError(CompforgeError):
    """Vectors that must share a dimensionality do not."""


class DivergenceError(CompforgeError):
    """Training produced a non-finite loss."""


class EmptyCandidateError(CompforgeError):
    """A recommendation was requested over an empty candidate list."""


class FingerprintError(CompforgeError):
    """A checkpoint was created for a different design space."""
