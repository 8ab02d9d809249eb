"""Exception hierarchy for the creep-uq library.

Every error raised by the library derives from :class:`CreepUqError` so a
caller (notably the CLI) can map failures to exit categories: configuration,
data, or numeric.
"""


class CreepUqError(Exception):
    """Base class for all creep-uq errors."""


class ConfigError(CreepUqError):
    """Invalid configuration value or unparsable config file."""


class DataError(CreepUqError):
    """Unusable input data: missing file, malformed row, bad record."""


class MissingArtifactError(DataError):
    """A pipeline stage needs a file produced by an earlier stage."""

    def __init__(self, path):
        super().__init__(f"missing upstream artifact: {path}")
        self.path = path


class NumericError(CreepUqError):
    """Base for failures of the numeric machinery."""


class RankDeficiencyError(NumericError):
    """Design matrix column(s) numerically dependent below tolerance."""

    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = offending


class EmptyModelError(NumericError):
    """Sparse regression thresholded every coefficient to zero."""


class BracketError(NumericError):
    """Scalar minimization bracket does not enclose a minimum."""


class OverflowRangeError(NumericError):
    """Rupture-time exponent outside the physically sane range."""

    def __init__(self, exponent):
        super().__init__(
            f"rupture-time exponent {exponent:.6g} outside [-300, 300]; "
            "non-physical overflow/underflow"
        )
        self.exponent = exponent


class DegenerateVarianceError(NumericError):
    """Output variance is zero; sensitivity indices are undefined."""


class UnderdeterminedError(NumericError):
    """Expansion basis too large for the available sample budget."""


class EvaluationFailureError(NumericError):
    """Too many model evaluations failed over a sampling design."""


class DegreesOfFreedomError(NumericError):
    """Not enough observations to estimate the error variance."""


class FactorizationError(NumericError):
    """Covariance matrix is not positive semi-definite."""

    def __init__(self, message, most_negative=None):
        super().__init__(message)
        self.most_negative = most_negative


class ComparabilityError(NumericError):
    """Model scores computed on different datasets cannot be ranked."""
