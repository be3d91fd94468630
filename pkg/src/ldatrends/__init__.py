"""Topic-trend analysis of a bibliographic corpus with stability-tuned LDA."""

__version__ = "0.1.0"

from .errors import (AmbiguousMatchError, ConfigurationError, GibbsInvariantError, InputError,
                     LdaTrendsError, ModelFileError, ParameterError, StageError)
from .lda import LdaParams, TopicModel, fit, infer, perplexity, top_terms
from .persist import load_model, save_model
from .seeding import derive_seed
from .stability import StabilityConfig, match_topics, raw_score
from .stats import a12, bootstrap_diff, compare
from .textprep import BowCorpus, Vocabulary, prepare, tokenize
from .tuner import Bounds, CandidateVector, DeConfig, de_optimize, ldade

__all__ = [
    "AmbiguousMatchError", "BowCorpus", "Bounds", "CandidateVector", "ConfigurationError", "DeConfig",
    "GibbsInvariantError", "InputError", "LdaParams", "LdaTrendsError", "ModelFileError",
    "ParameterError", "StabilityConfig", "StageError", "TopicModel", "Vocabulary", "a12",
    "bootstrap_diff", "compare", "de_optimize", "derive_seed", "fit", "infer", "ldade",
    "load_model", "match_topics", "perplexity", "prepare", "raw_score", "save_model",
    "tokenize", "top_terms",
]
