"""Vocabulary construction with frequency truncation."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import EmptyInputError, ValidationError

MAX_VOCAB_DEFAULT = 50_000


@dataclass(frozen=True)
class Vocab:
    """Dense token ids in descending frequency order."""

    tokens: tuple[str, ...]
    counts: tuple[int, ...]
    id_of: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.tokens) != len(self.counts):
            raise ValidationError("tokens and counts must have equal length")
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValidationError("vocabulary contains duplicate tokens")
        object.__setattr__(self, "id_of", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.id_of


def build_vocab(
    corpus: Iterable[str], min_count: int = 1, max_size: int = MAX_VOCAB_DEFAULT
) -> Vocab:
    """Count a token stream and keep the max_size most frequent tokens.

    Tokens below min_count are dropped first. Frequency ties are broken by
    first occurrence in the stream, which makes the result deterministic.
    """
    if min_count < 1:
        raise ValidationError("min_count must be >= 1")
    if max_size < 1:
        raise ValidationError("max_size must be >= 1")
    counter = Counter()
    for token in corpus:
        counter[token] += 1
    if not counter:
        raise EmptyInputError("cannot build a vocabulary from an empty corpus")
    # Counter preserves first-occurrence order, so a stable sort on count
    # alone yields the documented tie-break.
    ranked = sorted(counter.items(), key=lambda kv: -kv[1])
    kept = [(t, c) for t, c in ranked if c >= min_count][:max_size]
    if not kept:
        raise EmptyInputError(f"no token reached min_count={min_count}")
    tokens, counts = zip(*kept)
    return Vocab(tokens=tokens, counts=counts)


def iter_tokens(sentences: Iterable[Sequence[str]]) -> Iterable[str]:
    for sentence in sentences:
        yield from sentence
