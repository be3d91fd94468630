class LdaTrendsError(Exception):
    """Base class for errors raised by this package."""


class InputError(LdaTrendsError, ValueError):
    """Input data violates a precondition (empty corpus, bad record, ...)."""


class ParameterError(LdaTrendsError, ValueError):
    """An argument or hyperparameter is out of its valid domain."""


class ConfigurationError(LdaTrendsError):
    """Configuration is unusable (empty vocabulary, empty lookup table, ...)."""


class AmbiguousMatchError(LdaTrendsError):
    """More than one source record matches a single primary record."""

    def __init__(self, primary, candidates):
        self.primary = primary
        self.candidates = list(candidates)
        titles = "; ".join(repr(c.title) for c in self.candidates)
        super().__init__(
            f"{len(self.candidates)} source records match {primary.title!r}: {titles}"
        )


class GibbsInvariantError(LdaTrendsError, AssertionError):
    """Sampler count matrices became inconsistent."""


class ModelFileError(LdaTrendsError):
    """Model container is corrupt, truncated, or incompatible."""


class StageError(LdaTrendsError):
    """A pipeline stage cannot run (missing upstream artifact, bad config)."""
