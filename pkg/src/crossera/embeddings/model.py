"""Embedding model container, vector composition, and the text vector format."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ParseError, ValidationError
from .features import FeatureScheme, featurize
from .vocab import Vocab


@dataclass
class EmbeddingModel:
    """Trained SGNS parameters plus the data needed to compose vectors.

    word_vectors and context_vectors are V x dim; feature_vectors is
    bucket_count x dim. feature_offsets/feature_ids hold each vocab token's
    hashed feature ids in CSR layout, fixed at training time.
    """

    vocab: Vocab
    dim: int
    word_vectors: np.ndarray
    context_vectors: np.ndarray
    feature_vectors: np.ndarray
    scheme: FeatureScheme
    feature_offsets: np.ndarray
    feature_ids: np.ndarray
    train_log: dict = field(default_factory=dict)

    def __post_init__(self):
        V = len(self.vocab)
        if self.dim <= 0:
            raise ValidationError("dim must be positive")
        if self.word_vectors.shape != (V, self.dim):
            raise ValidationError("word_vectors shape mismatch")
        if self.context_vectors.shape != (V, self.dim):
            raise ValidationError("context_vectors shape mismatch")
        if self.feature_vectors.shape[1] != self.dim:
            raise ValidationError("feature_vectors dim mismatch")

    def token_feature_ids(self, token: str) -> np.ndarray:
        """Feature ids for a token; precomputed for vocab, hashed for OOV."""
        idx = self.vocab.id_of.get(token)
        if idx is not None:
            return self.feature_ids[self.feature_offsets[idx] : self.feature_offsets[idx + 1]]
        return np.asarray(featurize(token, self.scheme), dtype=np.int32)

    def compose(self, token: str) -> np.ndarray:
        """Composed vector: word vector plus the mean of feature vectors.

        In-vocab tokens with no features yield the word vector alone.
        Out-of-vocab tokens yield the feature mean, or a zero vector when no
        features exist (see is_oov).
        """
        idx = self.vocab.id_of.get(token)
        feats = self.token_feature_ids(token)
        if idx is not None:
            vec = self.word_vectors[idx].copy()
            if len(feats):
                vec += self.feature_vectors[feats].sum(axis=0) / len(feats)
            return vec
        if len(feats):
            return self.feature_vectors[feats].sum(axis=0) / len(feats)
        return np.zeros(self.dim, dtype=self.word_vectors.dtype)

    def is_oov(self, token: str) -> bool:
        """True when a token has neither a vocabulary entry nor any features."""
        if token in self.vocab:
            return False
        return len(self.token_feature_ids(token)) == 0


def compose(model: EmbeddingModel, token: str) -> np.ndarray:
    return model.compose(token)


@dataclass(frozen=True)
class WordVectors:
    """A plain token -> vector table, as read from the text format.

    Rows keep the order of the source file, which for trained models is
    descending frequency order.
    """

    tokens: tuple[str, ...]
    vectors: np.ndarray
    id_of: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.tokens) != len(self.vectors):
            raise ValidationError("tokens/vectors length mismatch")
        object.__setattr__(self, "id_of", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.id_of

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def get(self, token: str) -> np.ndarray:
        return self.vectors[self.id_of[token]]

    def save(self, path: str | Path) -> None:
        write_vectors(path, self.tokens, self.vectors)


def write_vectors(path: str | Path, tokens, vectors: np.ndarray) -> None:
    """Write the text vector format: "V dim" header, then token + values."""
    vectors = np.asarray(vectors)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(tokens)} {vectors.shape[1] if len(tokens) else 0}\n")
        for token, row in zip(tokens, vectors):
            fh.write(token + " " + " ".join(f"{x:.6f}" for x in row) + "\n")


def save_embeddings(model: EmbeddingModel, path: str | Path) -> None:
    """Serialise the composed vector of every vocabulary token."""
    composed = np.stack([model.compose(t) for t in model.vocab.tokens]) \
        if len(model.vocab) else np.zeros((0, model.dim))
    write_vectors(path, model.vocab.tokens, composed)


def load_embeddings(path: str | Path) -> WordVectors:
    """Read the text vector format back into a WordVectors table."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise ParseError("header must be 'V dim'", path=path, line=1)
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError("header must hold two integers", path=path, line=1) from exc
        tokens = []
        rows = np.zeros((count, dim), dtype=np.float64)
        for i in range(count):
            line = fh.readline()
            if not line:
                raise ParseError(f"expected {count} rows, found {i}", path=path, line=i + 2)
            fields = line.rstrip("\n").split(" ")
            if len(fields) != dim + 1:
                raise ParseError(
                    f"expected token + {dim} values, got {len(fields)} fields",
                    path=path, line=i + 2,
                )
            tokens.append(fields[0])
            try:
                rows[i] = [float(x) for x in fields[1:]]
            except ValueError as exc:
                raise ParseError(f"non-numeric value: {exc}", path=path, line=i + 2) from exc
    return WordVectors(tokens=tuple(tokens), vectors=rows)
