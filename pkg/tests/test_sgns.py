import math

import numpy as np
import pytest

from crossera.embeddings import (
    FeatureScheme,
    SgnsConfig,
    Vocab,
    build_vocab,
    char_ngram_scheme,
    train_sgns,
)
from crossera.embeddings import _sgns_numpy as kernel
from crossera.embeddings.trainer import HAS_FAST_SGNS
from crossera.errors import EmptyInputError

NONE_SCHEME = FeatureScheme(kind="none", n_min=1, n_max=1, bucket_count=1)


def _toy_corpus(n=100):
    return [["a", "b", "a", "c"], ["b", "a", "c", "a"]] * n


# ----------------------------------------------------------- pair-level loss


def test_zero_vectors_loss_is_ln2_per_target():
    dim, K = 6, 4
    ctx = np.zeros((5, dim))
    loss, *_ = kernel.pair_loss_and_grads(
        np.zeros(dim), None, ctx, positive=0, negatives=[1, 2, 3, 4]
    )
    assert abs(loss - (1 + K) * math.log(2)) < 1e-12


def _fd_check(word_vec, feat_vecs, ctx, pos, negs, eps=1e-6):
    """Central finite differences against the analytic gradients."""
    loss, g_word, g_feats, g_ctx = kernel.pair_loss_and_grads(word_vec, feat_vecs, ctx, pos, negs)

    def loss_at(w, f, c):
        return kernel.pair_loss_and_grads(w, f, c, pos, negs)[0]

    def rel_err(analytic, numeric):
        return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)

    worst = 0.0
    for i in range(len(word_vec)):
        wp, wm = word_vec.copy(), word_vec.copy()
        wp[i] += eps
        wm[i] -= eps
        fd = (loss_at(wp, feat_vecs, ctx) - loss_at(wm, feat_vecs, ctx)) / (2 * eps)
        worst = max(worst, rel_err(g_word[i], fd))
    if feat_vecs is not None:
        for r in range(len(feat_vecs)):
            for i in range(feat_vecs.shape[1]):
                fp, fm = feat_vecs.copy(), feat_vecs.copy()
                fp[r, i] += eps
                fm[r, i] -= eps
                fd = (loss_at(word_vec, fp, ctx) - loss_at(word_vec, fm, ctx)) / (2 * eps)
                worst = max(worst, rel_err(g_feats[i], fd))
    for row, grad in g_ctx.items():
        for i in range(ctx.shape[1]):
            cp, cm = ctx.copy(), ctx.copy()
            cp[row, i] += eps
            cm[row, i] -= eps
            fd = (loss_at(word_vec, feat_vecs, cp) - loss_at(word_vec, feat_vecs, cm)) / (2 * eps)
            worst = max(worst, rel_err(grad[i], fd))
    return worst


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    dim = 7
    for trial in range(10):
        word = 0.1 * rng.standard_normal(dim)
        feats = 0.1 * rng.standard_normal((3, dim))
        ctx = 0.1 * rng.standard_normal((6, dim))
        assert _fd_check(word, feats, ctx, pos=0, negs=[2, 4, 5]) < 1e-4


def test_gradients_without_features():
    rng = np.random.default_rng(4)
    word = 0.1 * rng.standard_normal(5)
    ctx = 0.1 * rng.standard_normal((4, 5))
    assert _fd_check(word, None, ctx, pos=1, negs=[0, 3]) < 1e-4


def test_duplicate_negative_accumulates():
    rng = np.random.default_rng(5)
    word = 0.1 * rng.standard_normal(4)
    ctx = 0.1 * rng.standard_normal((3, 4))
    _, _, _, g_ctx = kernel.pair_loss_and_grads(word, None, ctx, 0, [2, 2])
    _, _, _, g_once = kernel.pair_loss_and_grads(word, None, ctx, 0, [2])
    np.testing.assert_allclose(g_ctx[2], 2 * g_once[2], rtol=1e-12)


# -------------------------------------------------------------- training runs


def test_cooccurring_tokens_score_higher():
    # alternating two-token corpus: a's composed vector should align with b's
    # context vector rather than its own
    corpus = [["a", "b"] * 10] * 50
    vocab = build_vocab(t for s in corpus for t in s)
    cfg = SgnsConfig(window=1, negatives=2, epochs=5, subsample_t=0.0, seed=1)
    model = train_sgns(corpus, vocab, NONE_SCHEME, cfg, dim=10, backend="numpy")

    def cos(u, v):
        return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))

    u_a = model.compose("a")
    ia, ib = vocab.id_of["a"], vocab.id_of["b"]
    assert cos(u_a, model.context_vectors[ib]) > cos(u_a, model.context_vectors[ia])


def test_epoch_loss_decreases():
    corpus = _toy_corpus(50)
    vocab = build_vocab(t for s in corpus for t in s)
    cfg = SgnsConfig(window=2, negatives=3, epochs=10, subsample_t=0.0, seed=9)
    model = train_sgns(corpus, vocab, NONE_SCHEME, cfg, dim=12)
    losses = model.train_log["epoch_losses"]
    assert len(losses) == 10
    for prev, curr in zip(losses, losses[1:]):
        assert curr <= prev * 1.01  # allow <=1% upticks from sampling noise


def test_training_deterministic_bitwise():
    corpus = _toy_corpus(20)
    vocab = build_vocab(t for s in corpus for t in s)
    scheme = char_ngram_scheme(1, 2, bucket_count=32)
    cfg = SgnsConfig(window=2, negatives=3, epochs=2, subsample_t=1e-2, seed=21)
    m1 = train_sgns(corpus, vocab, scheme, cfg, dim=8)
    m2 = train_sgns(corpus, vocab, scheme, cfg, dim=8)
    assert np.array_equal(m1.word_vectors, m2.word_vectors)
    assert np.array_equal(m1.context_vectors, m2.context_vectors)
    assert np.array_equal(m1.feature_vectors, m2.feature_vectors)


@pytest.mark.skipif(not HAS_FAST_SGNS, reason="compiled kernel not built")
def test_backend_parity():
    corpus = _toy_corpus(30)
    vocab = build_vocab(t for s in corpus for t in s)
    scheme = char_ngram_scheme(1, 2, bucket_count=64)
    cfg = SgnsConfig(window=2, negatives=4, epochs=3, subsample_t=1e-2, seed=5)
    fast = train_sgns(corpus, vocab, scheme, cfg, dim=10, backend="cython")
    slow = train_sgns(corpus, vocab, scheme, cfg, dim=10, backend="numpy")
    assert np.abs(fast.word_vectors - slow.word_vectors).max() < 1e-9
    assert np.abs(fast.context_vectors - slow.context_vectors).max() < 1e-9
    assert np.abs(fast.feature_vectors - slow.feature_vectors).max() < 1e-9
    assert fast.train_log["epoch_pairs"] == slow.train_log["epoch_pairs"]


def test_oov_tokens_skipped_and_counted():
    corpus = [["a", "b", "zzz"], ["a", "qqq", "b"]] * 10
    vocab = build_vocab(["a", "b", "a"])
    cfg = SgnsConfig(window=1, negatives=1, epochs=1, subsample_t=0.0, seed=2)
    model = train_sgns(corpus, vocab, NONE_SCHEME, cfg, dim=4)
    assert model.train_log["oov_skipped"] == 20


def test_all_oov_corpus_rejected():
    vocab = Vocab(tokens=("a",), counts=(1,))
    cfg = SgnsConfig(epochs=1, seed=1)
    with pytest.raises(EmptyInputError):
        train_sgns([["x", "y"]], vocab, NONE_SCHEME, cfg, dim=4)


def test_parallel_mode_runs():
    corpus = _toy_corpus(30)
    vocab = build_vocab(t for s in corpus for t in s)
    cfg = SgnsConfig(window=2, negatives=2, epochs=2, subsample_t=0.0, seed=8)
    model = train_sgns(corpus, vocab, NONE_SCHEME, cfg, dim=8, workers=3)
    assert np.isfinite(model.word_vectors).all()
    assert model.train_log["workers"] == 3


# ------------------------------------------------------------------- sampler


def test_negative_distribution_matches_unigram_three_quarters():
    from scipy import stats

    counts = np.array([1000, 400, 120, 60, 20, 5], dtype=np.float64)
    cdf = kernel.make_negative_cdf(counts)
    draws = kernel.draw_negatives(cdf, 1_000_000, seed=13)
    observed = np.bincount(draws, minlength=len(counts))
    expected = counts ** 0.75
    expected = expected / expected.sum() * len(draws)
    chi2 = stats.chisquare(observed, expected)
    assert chi2.pvalue > 0.01


def test_keep_probs_clip_at_one():
    probs = kernel.make_keep_probs(np.array([5, 5, 5, 5]), subsample_t=0.5)
    assert (probs == 1.0).all()
