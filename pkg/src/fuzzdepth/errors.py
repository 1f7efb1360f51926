"""Exception types shared across the package.

Everything raised on purpose derives from :class:`FuzzdepthError` so the CLI
can map library failures to its data-error exit code while genuine bugs still
surface as tracebacks.
"""


class FuzzdepthError(Exception):
    """Base class for all errors raised deliberately by this package."""


class ValidationError(FuzzdepthError):
    """Input violates a documented precondition (range, shape, config)."""


class GridMismatchError(FuzzdepthError):
    """Two objects that must share a grid do not."""


class DegenerateEnsembleError(FuzzdepthError):
    """The ensemble cannot support the requested statistic (e.g. all-zero mean)."""


class VolumeFormatError(FuzzdepthError):
    """A volume container is corrupt, truncated, or uses an unsupported layout."""


class ManifestError(FuzzdepthError):
    """An ensemble manifest is malformed or inconsistent with its files."""
