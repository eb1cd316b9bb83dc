"""Exception types shared across the package."""


class SddqError(Exception):
    """Base class for all package-specific errors."""


class FormatError(SddqError):
    """A dataset or artifact file is structurally malformed."""


class ValidationError(SddqError):
    """Input data violates a numeric invariant (NaN/Inf, bad shapes, bad config)."""


class DegenerateInputError(SddqError):
    """An embedding row has no direction (zero L2 norm)."""


class PairingError(SddqError):
    """A sample has no eligible positive or negative partner."""


class DivergenceError(SddqError):
    """Training produced a non-finite loss."""
