"""Exception hierarchy shared across the package."""


class RiskvolError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(RiskvolError):
    """Malformed input file.

    Carries the 1-based line (or row) number when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NoSectionFound(RiskvolError):
    """No risk-factors heading could be located in the document."""


class EmptySection(RiskvolError):
    """The extracted section is shorter than the configured minimum."""


class UnknownTerm(RiskvolError):
    """Term not present in the embedding vocabulary."""


class ZeroVector(RiskvolError):
    """Cosine similarity is undefined for an all-zero vector."""


class EmptyLexicon(RiskvolError):
    """No lexicon entries survived loading."""


class EmptyCorpus(RiskvolError):
    """An operation that needs documents received none."""


class DegenerateInput(RiskvolError):
    """Input carries no usable variation (all rows identical, zero variance, ...)."""


class DimensionMismatch(RiskvolError):
    """Vector or matrix dimensions do not line up."""


class TooShort(RiskvolError):
    """Series has fewer observations than the operation requires."""


class OutOfRange(RiskvolError):
    """Requested window falls outside the series."""


class ZeroVolatility(RiskvolError):
    """All returns in the window are identical; log of zero deviation is undefined."""


class InsufficientHistory(RiskvolError):
    """Price history does not cover the requested windows.

    ``missing`` lists the unavailable quarter numbers (1-based) when known.
    """

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = tuple(missing)


class UnknownSector(RiskvolError):
    """Sector code outside the 11-code set."""


class RowMismatch(RiskvolError):
    """Two matrices disagree on document ids or row order."""


class TooFewRows(RiskvolError):
    """Not enough rows to perform the split or fit."""


class TooFewDocs(RiskvolError):
    """Not enough documents in the requested group."""


class LengthMismatch(RiskvolError):
    """Paired sequences have different lengths."""


class Empty(RiskvolError):
    """An operation that needs at least one value received none."""


class EmptySide(RiskvolError):
    """A train/test split left one side with no documents."""


class EmptyYear(RiskvolError):
    """A requested year has no documents."""


class ConfigError(RiskvolError):
    """Invalid or incomplete run configuration."""
