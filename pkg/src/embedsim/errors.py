"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors exit 1, data/validation
errors exit 2, provider/transport errors exit 3.
"""


class EmbedSimError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EmbedSimError):
    """A corpus/queries/config file could not be parsed."""


class ValidationError(EmbedSimError):
    """An invariant on in-memory data was violated (bad shapes, keys, ranges)."""


class FormatError(EmbedSimError):
    """An embedding file failed magic/version/length/checksum checks."""


class StoreError(EmbedSimError):
    """Store-level failure: missing entry, address conflict, lock contention."""


class NotFoundError(StoreError):
    """Requested store entry does not exist."""


class ProviderError(EmbedSimError):
    """An embedding provider failed after exhausting retries, or returned
    a malformed response."""
