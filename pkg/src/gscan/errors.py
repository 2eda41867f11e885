"""Exception types shared across the pipeline.

Every error raised by this package derives from :class:`GscanError`, so
callers (and the CLI) can catch one base class and still report which
stage failed.
"""


class GscanError(Exception):
    """Base class for all errors raised by this package."""


# --- AST ingestion ---------------------------------------------------------

class MalformedAst(GscanError):
    """The AST document violates structural expectations."""


class UnsupportedVersion(GscanError):
    """The AST comes from a compiler older than 0.4.12 (pre compact-AST)."""


class MissingReference(GscanError):
    """A referencedDeclaration id has no corresponding node."""


class MalformedSpan(GscanError):
    """A src string is not 'start:length:fileIndex' with decimal fields."""


class InvalidEncoding(GscanError):
    """Source bytes are not valid UTF-8."""


class SpanOutOfBounds(GscanError):
    """A source span points outside the source bytes or line table."""


# --- Graph construction ----------------------------------------------------

class OrphanJump(GscanError):
    """A break/continue has no enclosing loop (or return no function)."""


# --- Feature encoding ------------------------------------------------------

class UnknownKind(GscanError):
    """A node kind has no schema entry and the schema forbids defaults."""


# --- Numerical core --------------------------------------------------------

class ShapeMismatch(GscanError):
    """Operand shapes do not agree."""


class NonFiniteValue(GscanError):
    """A NaN or infinity appeared where finite values are required."""


class LengthMismatch(GscanError):
    """Two aligned sequences have different lengths."""


# --- Training / evaluation -------------------------------------------------

class EmptyDataset(GscanError):
    """An operation needs at least one record."""


class DivergedLoss(GscanError):
    """Training loss became non-finite."""


class BadRatios(GscanError):
    """Split ratios are invalid (wrong arity, negative, or not summing to 1)."""


class EmptyEvaluation(GscanError):
    """Metrics requested over zero items."""


# --- Dataset / tooling -----------------------------------------------------

class CompilerUnavailable(GscanError):
    """No Solidity compiler binary could be located or executed."""


class CheckpointError(GscanError):
    """A checkpoint file is malformed or incompatible."""
