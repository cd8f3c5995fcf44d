"""Pure NumPy kernel for skip-gram negative-sampling updates.

This is the fallback backend; the compiled extension in _sgns_inner.pyx
implements the identical update sequence (same RNG stream, same operation
order) and is preferred at import time when available. Keep the two in sync:
any change to the stream layout here must be mirrored there.

RNG stream layout per sentence:
  1. one uniform per in-vocab token (only when subsampling is enabled)
  2. per kept center position, one integer draw for the window reduction
  3. per (center, context) pair, `negatives` uniforms for negative draws
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def lcg_next(state: int) -> int:
    return (state * _LCG_MULT + _LCG_INC) & MASK64


def lcg_uniform(state: int) -> tuple[int, float]:
    state = lcg_next(state)
    return state, (state >> 11) * _INV_2_53


def lcg_randint(state: int, n: int) -> tuple[int, int]:
    state = lcg_next(state)
    return state, (state >> 32) % n


def seed_state(seed: int) -> int:
    # splitmix-style golden-ratio spread so that nearby seeds diverge
    return ((seed + 1) * 0x9E3779B97F4A7C15) & MASK64


def make_negative_cdf(counts: np.ndarray, power: float = 0.75) -> np.ndarray:
    """Cumulative distribution of the smoothed unigram sampler."""
    weights = np.asarray(counts, dtype=np.float64) ** power
    cdf = np.cumsum(weights / weights.sum())
    cdf[-1] = 1.0
    return cdf


def make_keep_probs(counts: np.ndarray, subsample_t: float) -> np.ndarray:
    """word2vec-style keep probability sqrt(t/f) + t/f, clipped to 1."""
    counts = np.asarray(counts, dtype=np.float64)
    freq = counts / counts.sum()
    keep = np.sqrt(subsample_t / freq) + subsample_t / freq
    return np.minimum(keep, 1.0)


def sample_negative(cdf: np.ndarray, u: float) -> int:
    return int(np.searchsorted(cdf, u, side="right"))


def draw_negatives(cdf: np.ndarray, n_draws: int, seed: int) -> np.ndarray:
    """n_draws smoothed-unigram samples; used to audit the sampler."""
    state = seed_state(seed)
    out = np.empty(n_draws, dtype=np.int64)
    for i in range(n_draws):
        state, u = lcg_uniform(state)
        out[i] = sample_negative(cdf, u)
    return out


def _softplus(x: float) -> float:
    if x > 0:
        return x + np.log1p(np.exp(-x))
    return float(np.log1p(np.exp(x)))


def pair_loss_and_grads(
    word_vec: np.ndarray,
    feat_vecs: np.ndarray | None,
    ctx_vectors: np.ndarray,
    positive: int,
    negatives: list[int],
):
    """Loss and analytic gradients of one SGNS pair, without updating.

    The composed input is word_vec plus the mean of feat_vecs rows (if any).
    Returns (loss, grad_word, grad_feats, grad_ctx) where grad_ctx maps
    context row index -> gradient. grad_feats is per feature row, i.e.
    grad_word / n_feats.
    """
    u = word_vec.astype(np.float64).copy()
    n_feats = 0
    if feat_vecs is not None and len(feat_vecs):
        n_feats = len(feat_vecs)
        u += feat_vecs.sum(axis=0) / n_feats
    loss = 0.0
    grad_u = np.zeros_like(u)
    grad_ctx: dict[int, np.ndarray] = {}
    for target, label in [(positive, 1.0)] + [(t, 0.0) for t in negatives]:
        v = ctx_vectors[target]
        f = float(u @ v)
        sig = 1.0 / (1.0 + np.exp(-f))
        loss += _softplus(-f) if label == 1.0 else _softplus(f)
        g = sig - label
        grad_u += g * v
        acc = grad_ctx.setdefault(target, np.zeros_like(u))
        acc += g * u
    grad_feats = grad_u / n_feats if n_feats else None
    return loss, grad_u, grad_feats, grad_ctx


def train_sentence(
    word_vecs: np.ndarray,
    ctx_vecs: np.ndarray,
    feat_vecs: np.ndarray,
    feat_offsets: np.ndarray,
    feat_ids: np.ndarray,
    neg_cdf: np.ndarray,
    keep_prob: np.ndarray,
    subsample: bool,
    sent: np.ndarray,
    window: int,
    negatives: int,
    alpha: float,
    state: int,
):
    """One in-place SGD pass over a sentence of vocabulary ids.

    Returns (new rng state, summed pair loss, pair count). All three
    parameter matrices are updated in place.
    """
    if subsample:
        kept = []
        for idx in sent:
            state, u01 = lcg_uniform(state)
            if u01 < keep_prob[idx]:
                kept.append(int(idx))
    else:
        kept = [int(i) for i in sent]

    loss_total = 0.0
    pairs = 0
    n = len(kept)
    for i in range(n):
        center = kept[i]
        state, reduce_by = lcg_randint(state, window)
        win = window - reduce_by
        lo = max(0, i - win)
        hi = min(n - 1, i + win)
        for j in range(lo, hi + 1):
            if j == i:
                continue
            ctx = kept[j]

            off0, off1 = feat_offsets[center], feat_offsets[center + 1]
            feats = feat_ids[off0:off1]
            n_feats = len(feats)
            u = word_vecs[center].copy()
            if n_feats:
                u += feat_vecs[feats].sum(axis=0) / n_feats

            targets = [ctx]
            for _ in range(negatives):
                state, u01 = lcg_uniform(state)
                t = sample_negative(neg_cdf, u01)
                if t == ctx:
                    continue
                targets.append(t)

            rows = ctx_vecs[targets]  # gathered copy: dots use pre-update values
            f = rows @ u
            sig = 1.0 / (1.0 + np.exp(-f))
            labels = np.zeros(len(targets))
            labels[0] = 1.0
            loss_total += _softplus(-f[0]) + sum(_softplus(x) for x in f[1:])
            g = sig - labels
            grad_u = g @ rows
            for t, g_t in zip(targets, g):
                ctx_vecs[t] -= (alpha * g_t) * u
            word_vecs[center] -= alpha * grad_u
            if n_feats:
                np.subtract.at(feat_vecs, feats, (alpha / n_feats) * grad_u)
            pairs += 1

    return state, loss_total, pairs
