"""Throughput benchmark: compiled SGNS kernel vs the pure NumPy fallback.

Usage:
    python benchmarks/bench_sgns.py [--sentences 8000] [--dim 100] [--quick]

Both backends consume the same RNG stream, so the run also cross-checks that
their trained vectors agree.
"""

import argparse
import time

import numpy as np

from crossera.embeddings import (
    FeatureScheme,
    SgnsConfig,
    build_vocab,
    char_ngram_scheme,
    train_sgns,
)
from crossera.embeddings.trainer import HAS_FAST_SGNS
from crossera.synth import SynthLanguage, SynthSpec


def build_corpus(n_sentences: int, seed: int = 7):
    lang = SynthLanguage(SynthSpec(seed=seed))
    rng = np.random.default_rng(seed)
    return lang.sample_sentences(n_sentences, rng)


def run(backend: str, sentences, vocab, scheme, cfg, dim):
    tokens = sum(len(s) for s in sentences) * cfg.epochs
    t0 = time.time()
    model = train_sgns(sentences, vocab, scheme, cfg, dim=dim, backend=backend)
    elapsed = time.time() - t0
    return model, elapsed, tokens / elapsed


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sentences", type=int, default=8000)
    parser.add_argument("--dim", type=int, default=100)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--features", action="store_true",
                        help="include character n-gram features")
    parser.add_argument("--quick", action="store_true", help="tiny sizes, smoke only")
    args = parser.parse_args()
    if args.quick:
        args.sentences, args.dim, args.epochs = 1500, 32, 2

    sentences = build_corpus(args.sentences)
    vocab = build_vocab(t for s in sentences for t in s)
    scheme = (char_ngram_scheme(3, 6, 50_000) if args.features
              else FeatureScheme(kind="none", n_min=1, n_max=1, bucket_count=1))
    cfg = SgnsConfig(window=5, negatives=5, epochs=args.epochs, subsample_t=0.0, seed=3)
    print(f"corpus: {args.sentences} sentences, vocab {len(vocab)}, dim {args.dim}, "
          f"epochs {args.epochs}, features={'on' if args.features else 'off'}")

    slow_model, slow_time, slow_rate = run("numpy", sentences, vocab, scheme, cfg, args.dim)
    print(f"numpy fallback : {slow_time:7.2f}s  {slow_rate:10.0f} tokens/s")

    if not HAS_FAST_SGNS:
        print("compiled kernel not available; build the extension to compare")
        return

    fast_model, fast_time, fast_rate = run("cython", sentences, vocab, scheme, cfg, args.dim)
    print(f"cython kernel  : {fast_time:7.2f}s  {fast_rate:10.0f} tokens/s")
    print(f"speedup        : {slow_time / fast_time:6.1f}x")
    drift = np.abs(fast_model.word_vectors - slow_model.word_vectors).max()
    print(f"max |Δ| between backends after training: {drift:.2e}")


if __name__ == "__main__":
    main()
