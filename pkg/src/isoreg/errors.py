"""Exception hierarchy.

Every exception carries a ``category`` used by the command line front end to
emit a single machine-parsable error line.
"""


class IsoregError(Exception):
    category = "NUMERIC"


class DimensionError(IsoregError, ValueError):
    """Band limits or array shapes of the operands disagree."""

    category = "DOMAIN"


class DomainError(IsoregError, ValueError):
    """An argument lies outside the domain of the operation."""

    category = "DOMAIN"


class FormatError(IsoregError, ValueError):
    """A file could not be parsed or failed validation."""

    category = "FORMAT"


class NumericError(IsoregError, ArithmeticError):
    category = "NUMERIC"


class UndefinedScalingError(NumericError):
    """The regularized field is identically zero, so no rescaling exists."""
