"""Exception hierarchy shared across the pipeline."""


class WarnsiftError(Exception):
    """Base class for all errors raised by this package."""


class LexError(WarnsiftError):
    """Unrecognized byte sequence in the source text."""

    def __init__(self, message, location):
        super().__init__(f"{location}: {message}")
        self.location = location


class ParseError(WarnsiftError):
    """Construct outside the supported C subset."""

    def __init__(self, message, location, expected=()):
        super().__init__(f"{location}: {message}")
        self.location = location
        self.expected = tuple(expected)


class AnchorNotFound(WarnsiftError):
    """No statement at the reported warning line."""


class VariableNotAtIp(WarnsiftError):
    """The reported variable does not occur in the anchored statement."""


class UnsupportedConstruct(WarnsiftError):
    """Statement kind with no control-flow rule."""


class PathAnchorMismatch(WarnsiftError):
    """Execution path does not terminate at the anchored node."""


class TargetUnreachable(WarnsiftError):
    """No entry-to-target path exists within the budget."""


class UnknownNodeKind(WarnsiftError):
    """A selected path node has a kind outside the token vocabulary."""


class EmptyCorpus(WarnsiftError):
    """An operation requiring a non-empty corpus received an empty one."""


class DegenerateCorpus(WarnsiftError):
    """Training corpus is single-class or too small."""


class LengthMismatch(WarnsiftError):
    """Paired sequences have different lengths."""


class ZeroVariance(WarnsiftError):
    """Pooled standard deviation is zero while the means differ."""


class IdOutOfRange(WarnsiftError):
    """A token id exceeds the embedding table."""


class ShapeMismatch(WarnsiftError):
    """Tensor shapes inconsistent with the hyperparameters."""


class AllMaskedRow(WarnsiftError):
    """A softmax row has no unmasked key position."""


class ArchiveError(WarnsiftError):
    """Model archive is malformed or truncated."""


class VocabularyMismatch(WarnsiftError):
    """Model archive was built against a different vocabulary."""
