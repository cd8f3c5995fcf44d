"""Cross-space embedding alignment with orthogonal transforms.

Two bootstrap routes feed the same self-learning refinement: identical
surface forms shared by both vocabularies, or a fully unsupervised match of
intra-space similarity signatures. Refinement alternates an orthogonal
Procrustes solve with CSLS-based dictionary re-induction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings.vocab import Vocab
from .errors import MappingError, ParseError, ValidationError

DEFAULT_TOP_F = 20_000
CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class SeedDictionary:
    """Pairs of (source row, target row), one target per source."""

    pairs: tuple[tuple[int, int], ...]
    origin: str  # "identical" | "unsupervised-init" | "induced"

    def __post_init__(self):
        sources = [s for s, _ in self.pairs]
        if len(set(sources)) != len(sources):
            raise ValidationError("dictionary maps a source id to multiple targets")

    def __len__(self) -> int:
        return len(self.pairs)

    def source_ids(self) -> np.ndarray:
        return np.asarray([s for s, _ in self.pairs], dtype=np.int64)

    def target_ids(self) -> np.ndarray:
        return np.asarray([t for _, t in self.pairs], dtype=np.int64)


@dataclass(frozen=True)
class CslsConfig:
    k: int = 10
    direction: str = "symmetric"  # or "forward"

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("csls k must be >= 1")
        if self.direction not in ("forward", "symmetric"):
            raise ValidationError(f"unknown direction {self.direction!r}")


@dataclass(frozen=True)
class MappingResult:
    transform: np.ndarray
    final_dictionary: SeedDictionary
    objective_trace: tuple[float, ...]
    iterations: int
    seed_size: int = 0
    log: dict = field(default_factory=dict)


def build_identical_seed(vocab_src: Vocab, vocab_tgt: Vocab) -> SeedDictionary:
    """One pair per surface form present in both vocabularies."""
    tgt_index = vocab_tgt.id_of
    pairs = [
        (i, tgt_index[token])
        for i, token in enumerate(vocab_src.tokens)
        if token in tgt_index
    ]
    return SeedDictionary(pairs=tuple(pairs), origin="identical")


def normalize_spaces(X: np.ndarray) -> np.ndarray:
    """Unit-normalise rows, mean-center, unit-normalise again.

    Zero rows (including rows that become zero after centering) are left as
    zero and reported through a warning.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        raise ValidationError("cannot normalise an empty matrix")
    out = _unit_rows(_center(_unit_rows(X)))
    zero_rows = np.flatnonzero(np.linalg.norm(out, axis=1) == 0.0)
    if len(zero_rows):
        warnings.warn(
            f"{len(zero_rows)} zero rows after normalisation (first: {zero_rows[:5].tolist()})",
            RuntimeWarning,
            stacklevel=2,
        )
    return out


def _unit_rows(X: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return X / safe


def _center(X: np.ndarray) -> np.ndarray:
    return X - X.mean(axis=0, keepdims=True)


def procrustes(X: np.ndarray, Y: np.ndarray, dictionary: SeedDictionary) -> np.ndarray:
    """Orthogonal W maximising the summed inner products over dictionary pairs.

    Closed form: W = U V^T from the SVD of X_d^T Y_d, where X_d and Y_d are
    the dictionary-selected rows.
    """
    if len(dictionary) == 0:
        raise MappingError("procrustes needs a non-empty dictionary")
    Xd = X[dictionary.source_ids()]
    Yd = Y[dictionary.target_ids()]
    U, _, Vt = np.linalg.svd(Xd.T @ Yd)
    return U @ Vt


def csls_scores(sim: np.ndarray, cfg: CslsConfig) -> np.ndarray:
    """Hubness-adjusted retrieval scores 2*cos - r_src - r_tgt.

    r_src(i) is the mean of row i's k largest cosines, r_tgt(j) the mean of
    column j's k largest. k is clamped to the available neighbourhood size.
    """
    sim = np.asarray(sim, dtype=np.float64)
    n_src, n_tgt = sim.shape
    k = cfg.k
    if k > min(n_src, n_tgt):
        warnings.warn(
            f"csls k={k} exceeds vocabulary size; clamping to {min(n_src, n_tgt)}",
            RuntimeWarning,
            stacklevel=2,
        )
        k = min(n_src, n_tgt)
    r_src = np.partition(sim, n_tgt - k, axis=1)[:, n_tgt - k :].mean(axis=1)
    r_tgt = np.partition(sim, n_src - k, axis=0)[n_src - k :, :].mean(axis=0)
    return 2.0 * sim - r_src[:, None] - r_tgt[None, :]


def induce_dictionary(
    XW: np.ndarray, Y: np.ndarray, cfg: CslsConfig, top_f: int = DEFAULT_TOP_F
) -> SeedDictionary:
    """Re-induce a dictionary by CSLS retrieval over the top-F frequent rows.

    Rows are assumed frequency-ordered (the vector text format keeps them
    that way). "symmetric" keeps mutual best matches of both directions;
    "forward" keeps every source's best target.
    """
    ns = min(top_f, XW.shape[0])
    nt = min(top_f, Y.shape[0])
    sim = XW[:ns] @ Y[:nt].T
    scores = csls_scores(sim, cfg)
    fwd = scores.argmax(axis=1)
    if cfg.direction == "forward":
        pairs = tuple((i, int(j)) for i, j in enumerate(fwd))
    else:
        bwd = scores.argmax(axis=0)
        pairs = tuple((i, int(j)) for i, j in enumerate(fwd) if bwd[j] == i)
    if not pairs:
        raise MappingError("dictionary induction produced no pairs")
    return SeedDictionary(pairs=pairs, origin="induced")


def _mean_pair_cosine(XW: np.ndarray, Y: np.ndarray, dictionary: SeedDictionary) -> float:
    src = dictionary.source_ids()
    tgt = dictionary.target_ids()
    return float(np.sum(XW[src] * Y[tgt], axis=1).mean())


def self_learn(
    X: np.ndarray,
    Y: np.ndarray,
    seed: SeedDictionary,
    cfg: CslsConfig = CslsConfig(),
    max_iter: int = 50,
    top_f: int = DEFAULT_TOP_F,
) -> MappingResult:
    """Alternate Procrustes solves with CSLS dictionary re-induction.

    X and Y must already be normalised (see normalize_spaces). The trace
    holds the induced-dictionary mean similarity per iteration and is
    non-decreasing by construction: the loop stops as soon as an iteration
    fails to improve on the best objective by at least the tolerance.
    """
    if len(seed) == 0:
        raise MappingError("self_learn needs a non-empty seed dictionary")
    W = procrustes(X, Y, seed)
    if max_iter <= 0:
        obj = _mean_pair_cosine(X @ W, Y, seed)
        return MappingResult(
            transform=W, final_dictionary=seed, objective_trace=(obj,),
            iterations=0, seed_size=len(seed),
            log={"dict_sizes": [len(seed)]},
        )

    best_obj = -np.inf
    best_W = W
    best_dict = seed
    trace: list[float] = []
    dict_sizes: list[int] = []
    current = seed
    iterations = 0
    for _ in range(max_iter):
        W = procrustes(X, Y, current)
        induced = induce_dictionary(X @ W, Y, cfg, top_f=top_f)
        obj = _mean_pair_cosine(X @ W, Y, induced)
        iterations += 1
        if obj <= best_obj + CONVERGENCE_TOL:
            break
        best_obj, best_W, best_dict = obj, W, induced
        trace.append(obj)
        dict_sizes.append(len(induced))
        current = induced
    return MappingResult(
        transform=best_W,
        final_dictionary=best_dict,
        objective_trace=tuple(trace),
        iterations=iterations,
        seed_size=len(seed),
        log={"dict_sizes": dict_sizes},
    )


def unsupervised_init(X: np.ndarray, Y: np.ndarray) -> SeedDictionary:
    """Seed a dictionary from intra-space similarity structure alone.

    Each row's similarity profile within its own space, sorted descending and
    truncated to the smaller vocabulary size, acts as a language-independent
    signature; mutual nearest neighbours over those signatures form the
    initial dictionary.
    """
    if X.shape[0] < 2 or Y.shape[0] < 2:
        raise MappingError("unsupervised initialisation needs at least 2 rows per space")
    m = min(X.shape[0], Y.shape[0])
    sig_x = _unit_rows(np.sort(X @ X.T, axis=1)[:, ::-1][:, :m])
    sig_y = _unit_rows(np.sort(Y @ Y.T, axis=1)[:, ::-1][:, :m])
    sim = sig_x @ sig_y.T
    fwd = sim.argmax(axis=1)
    bwd = sim.argmax(axis=0)
    pairs = tuple((i, int(j)) for i, j in enumerate(fwd) if bwd[j] == i)
    if not pairs:
        raise MappingError("no mutual-best signature matches found")
    return SeedDictionary(pairs=pairs, origin="unsupervised-init")


def translation_precision(
    X: np.ndarray,
    Y: np.ndarray,
    W: np.ndarray,
    gold_pairs: tuple[tuple[int, int], ...] | list[tuple[int, int]],
    cfg: CslsConfig = CslsConfig(),
) -> float:
    """Precision@1 of CSLS retrieval against gold (source, target) pairs."""
    if not gold_pairs:
        raise ValidationError("gold_pairs must be non-empty")
    scores = csls_scores((X @ W) @ Y.T, cfg)
    best = scores.argmax(axis=1)
    hits = sum(1 for s, t in gold_pairs if best[s] == t)
    return hits / len(gold_pairs)


def save_dictionary(path: str | Path, dictionary: SeedDictionary,
                    src_tokens, tgt_tokens) -> None:
    """Write dictionary pairs as a token TSV."""
    with open(path, "w", encoding="utf-8") as fh:
        for s, t in dictionary.pairs:
            fh.write(f"{src_tokens[s]}\t{tgt_tokens[t]}\n")


def load_dictionary(path: str | Path, vocab_src: Vocab, vocab_tgt: Vocab,
                    origin: str = "identical") -> SeedDictionary:
    """Read a token-pair TSV back into id pairs; unknown tokens are skipped."""
    pairs = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected 2 tab-separated tokens", path=path, line=lineno)
            s, t = parts
            if s in vocab_src.id_of and t in vocab_tgt.id_of:
                sid = vocab_src.id_of[s]
                if sid not in seen:
                    seen.add(sid)
                    pairs.append((sid, vocab_tgt.id_of[t]))
    return SeedDictionary(pairs=tuple(pairs), origin=origin)
