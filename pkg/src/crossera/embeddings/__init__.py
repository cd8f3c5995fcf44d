"""Monolingual word embeddings: SGNS over character or stroke n-gram features."""

from .features import (
    FeatureScheme,
    MissingStrokeWarning,
    char_ngram_scheme,
    feature_grams,
    featurize,
    load_stroke_table,
    stroke_ngram_scheme,
)
from .model import (
    EmbeddingModel,
    WordVectors,
    compose,
    load_embeddings,
    save_embeddings,
    write_vectors,
)
from .trainer import DEFAULT_BACKEND, HAS_FAST_SGNS, SgnsConfig, train_sgns
from .vocab import Vocab, build_vocab, iter_tokens

__all__ = [
    "DEFAULT_BACKEND",
    "EmbeddingModel",
    "FeatureScheme",
    "HAS_FAST_SGNS",
    "MissingStrokeWarning",
    "SgnsConfig",
    "Vocab",
    "WordVectors",
    "build_vocab",
    "char_ngram_scheme",
    "compose",
    "feature_grams",
    "featurize",
    "iter_tokens",
    "load_embeddings",
    "load_stroke_table",
    "save_embeddings",
    "stroke_ngram_scheme",
    "train_sgns",
    "write_vectors",
]
