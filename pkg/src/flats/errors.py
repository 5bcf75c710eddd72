"""Exception hierarchy for the toolkit.

Every invalid input maps to exactly one of these named errors. ``ConfigError``
subclasses indicate a caller mistake (bad request, missing role); the rest
indicate bad data. The CLI maps the two groups to exit codes 2 and 3.
"""


class FlatsError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(FlatsError):
    """A request that cannot be satisfied as configured."""


# -- file / pack validation ------------------------------------------------

class BadMagic(FlatsError):
    """File does not start with the expected magic bytes."""


class SizeMismatch(FlatsError):
    """Declared row/column counts disagree with the payload."""


class NonFinite(FlatsError):
    """NaN or Inf encountered where finite values are required."""


class IoFailure(FlatsError):
    """Underlying read/write failed."""


class MissingRole(ConfigError):
    """Manifest lacks a role required for the requested operation."""


class DimConflict(FlatsError):
    """Packs referenced by one manifest disagree on feature dimension."""


# -- model fitting / scoring ----------------------------------------------

class SingularCovariance(FlatsError):
    """Covariance factorization failed even after regularization."""


class ClassTooSmall(FlatsError):
    """A class has fewer than two samples; covariance needs at least two."""


class DimMismatch(FlatsError):
    """Query dimension does not match the fitted model or index."""


class ZeroVector(FlatsError):
    """A vector with zero L2 norm cannot be normalized."""


class KTooLarge(FlatsError):
    """Requested neighbor count exceeds the reference set size."""


class DegenerateRadius(FlatsError):
    """Neighbor distance is zero; the density estimate is undefined."""


class LengthMismatch(FlatsError):
    """Two score series that must align have different lengths."""


class EmptySeries(FlatsError):
    """Metric requested over an empty score series."""
