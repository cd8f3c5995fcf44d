"""Skip-gram negative-sampling trainer.

The per-sentence update kernel comes in two interchangeable flavours: a
compiled Cython extension (preferred, selected at import time) and a pure
NumPy fallback. Both consume the same deterministic RNG stream, so models
differ only by floating-point summation order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import EmptyInputError, ValidationError
from . import _sgns_numpy
from ._sgns_numpy import make_keep_probs, make_negative_cdf, seed_state
from .features import FeatureScheme, featurize
from .model import EmbeddingModel
from .vocab import Vocab

logger = logging.getLogger(__name__)

try:
    from . import _sgns_inner
except ImportError:  # extension not built; NumPy fallback takes over
    _sgns_inner = None

HAS_FAST_SGNS = _sgns_inner is not None
DEFAULT_BACKEND = "cython" if HAS_FAST_SGNS else "numpy"

MIN_ALPHA_FACTOR = 1e-4


@dataclass(frozen=True)
class SgnsConfig:
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.05
    min_count: int = 1
    subsample_t: float = 1e-4
    seed: int = 1

    def __post_init__(self):
        if self.window < 1:
            raise ValidationError("window must be >= 1")
        if self.negatives < 1:
            raise ValidationError("negatives must be >= 1")
        if self.min_count < 1:
            raise ValidationError("min_count must be >= 1")
        if self.epochs < 0:
            raise ValidationError("epochs must be >= 0")
        if self.initial_lr <= 0:
            raise ValidationError("initial_lr must be positive")


def _backend_module(backend: str):
    if backend == "auto":
        backend = DEFAULT_BACKEND
    if backend == "cython":
        if _sgns_inner is None:
            raise ValidationError("cython backend requested but the extension is not built")
        return _sgns_inner, "cython"
    if backend == "numpy":
        return _sgns_numpy, "numpy"
    raise ValidationError(f"unknown backend {backend!r}")


def build_token_features(vocab: Vocab, scheme: FeatureScheme) -> tuple[np.ndarray, np.ndarray]:
    """CSR (offsets, ids) of hashed feature ids for every vocabulary token."""
    offsets = np.zeros(len(vocab) + 1, dtype=np.int64)
    all_ids: list[int] = []
    for i, token in enumerate(vocab.tokens):
        ids = featurize(token, scheme)
        all_ids.extend(ids)
        offsets[i + 1] = len(all_ids)
    return offsets, np.asarray(all_ids, dtype=np.int32)


def encode_corpus(
    sentences: Iterable[Sequence[str]], vocab: Vocab
) -> tuple[list[np.ndarray], int]:
    """Map sentences to id arrays, dropping (and counting) OOV tokens."""
    encoded = []
    skipped = 0
    id_of = vocab.id_of
    for sentence in sentences:
        ids = [id_of[t] for t in sentence if t in id_of]
        skipped += len(sentence) - len(ids)
        if ids:
            encoded.append(np.asarray(ids, dtype=np.int32))
    return encoded, skipped


def train_sgns(
    corpus: Iterable[Sequence[str]],
    vocab: Vocab,
    scheme: FeatureScheme,
    cfg: SgnsConfig,
    dim: int = 100,
    workers: int = 1,
    backend: str = "auto",
) -> EmbeddingModel:
    """Train an embedding model over a sentence stream.

    Single-worker runs are bit-reproducible for a given config and seed.
    With workers > 1 the parameter matrices are shared without locks
    (hogwild), so results are reproducible only in distribution.
    """
    kernel, backend_name = _backend_module(backend)
    if dim <= 0:
        raise ValidationError("dim must be positive")
    if workers < 1:
        raise ValidationError("workers must be >= 1")

    sentences, oov_skipped = encode_corpus(corpus, vocab)
    total_words = sum(len(s) for s in sentences)
    if total_words == 0:
        raise EmptyInputError("no in-vocabulary tokens in the training corpus")
    if oov_skipped:
        logger.info("skipped %d out-of-vocabulary tokens", oov_skipped)

    V = len(vocab)
    rng = np.random.default_rng(cfg.seed)
    word_vecs = (rng.random((V, dim)) - 0.5) / dim
    ctx_vecs = np.zeros((V, dim), dtype=np.float64)
    n_buckets = scheme.bucket_count if scheme.active else 1
    feat_vecs = (rng.random((n_buckets, dim)) - 0.5) / dim if scheme.active \
        else np.zeros((1, dim), dtype=np.float64)

    feat_offsets, feat_ids = build_token_features(vocab, scheme)
    counts = np.asarray(vocab.counts, dtype=np.float64)
    neg_cdf = make_negative_cdf(counts)
    subsample = cfg.subsample_t > 0
    keep_prob = make_keep_probs(counts, cfg.subsample_t) if subsample \
        else np.ones(V, dtype=np.float64)

    schedule_total = total_words * max(cfg.epochs, 1) + 1
    min_alpha = cfg.initial_lr * MIN_ALPHA_FACTOR
    epoch_losses: list[float] = []
    epoch_pairs: list[int] = []

    if workers == 1:
        state = seed_state(cfg.seed)
        progress = 0
        for _ in range(cfg.epochs):
            loss_sum = 0.0
            pair_sum = 0
            for sent in sentences:
                alpha = max(cfg.initial_lr * (1.0 - progress / schedule_total), min_alpha)
                state, loss, pairs = kernel.train_sentence(
                    word_vecs, ctx_vecs, feat_vecs, feat_offsets, feat_ids,
                    neg_cdf, keep_prob, subsample, sent,
                    cfg.window, cfg.negatives, alpha, state,
                )
                progress += len(sent)
                loss_sum += loss
                pair_sum += pairs
            epoch_losses.append(loss_sum / pair_sum if pair_sum else 0.0)
            epoch_pairs.append(pair_sum)
    else:
        progress_cell = [0]  # shared, racy by design in hogwild mode

        def run_shard(worker_id: int, epoch: int) -> tuple[float, int]:
            state = seed_state(cfg.seed + 7919 * (worker_id + 1) + 104729 * epoch)
            loss_sum = 0.0
            pair_sum = 0
            for sent in sentences[worker_id::workers]:
                alpha = max(
                    cfg.initial_lr * (1.0 - progress_cell[0] / schedule_total), min_alpha
                )
                state, loss, pairs = kernel.train_sentence(
                    word_vecs, ctx_vecs, feat_vecs, feat_offsets, feat_ids,
                    neg_cdf, keep_prob, subsample, sent,
                    cfg.window, cfg.negatives, alpha, state,
                )
                progress_cell[0] += len(sent)
                loss_sum += loss
                pair_sum += pairs
            return loss_sum, pair_sum

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for epoch in range(cfg.epochs):
                results = list(pool.map(lambda w: run_shard(w, epoch), range(workers)))
                loss_sum = sum(r[0] for r in results)
                pair_sum = sum(r[1] for r in results)
                epoch_losses.append(loss_sum / pair_sum if pair_sum else 0.0)
                epoch_pairs.append(pair_sum)

    return EmbeddingModel(
        vocab=vocab,
        dim=dim,
        word_vectors=word_vecs,
        context_vectors=ctx_vecs,
        feature_vectors=feat_vecs,
        scheme=scheme,
        feature_offsets=feat_offsets,
        feature_ids=feat_ids,
        train_log={
            "epoch_losses": epoch_losses,
            "epoch_pairs": epoch_pairs,
            "oov_skipped": oov_skipped,
            "backend": backend_name,
            "workers": workers,
        },
    )
