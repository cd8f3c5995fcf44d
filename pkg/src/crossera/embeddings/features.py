"""Feature n-gram extraction: character n-grams and stroke n-grams.

Tokens are decomposed into hashed sub-token features so that rare and unseen
surface forms still receive vectors. Alphabetic text uses character n-grams
over a boundary-marked token; ideographic text uses n-grams over the
concatenated stroke-class digits of its characters.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..errors import ParseError, ValidationError

BOUNDARY_START = "<"
BOUNDARY_END = ">"

# FNV-1a, 64 bit. Fixed offset basis acts as the hashing seed.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

STROKE_CLASSES = "12345"  # horizontal, vertical, left-falling, right-falling, turning


@dataclass(frozen=True)
class FeatureScheme:
    """How tokens decompose into hashed features.

    kind is one of "char-ngram", "stroke-ngram", or "none". stroke-ngram
    requires a stroke_table mapping each character to its stroke-class digit
    string; char-ngram forbids one.
    """

    kind: str
    n_min: int = 3
    n_max: int = 6
    bucket_count: int = 2_000_000
    stroke_table: Optional[dict[str, str]] = None

    def __post_init__(self):
        if self.kind not in ("char-ngram", "stroke-ngram", "none"):
            raise ValidationError(f"unknown feature scheme kind {self.kind!r}")
        if not (1 <= self.n_min <= self.n_max):
            raise ValidationError("require 1 <= n_min <= n_max")
        if self.bucket_count < 1:
            raise ValidationError("bucket_count must be >= 1")
        if self.kind == "stroke-ngram" and self.stroke_table is None:
            raise ValidationError("stroke-ngram scheme requires a stroke_table")
        if self.kind == "char-ngram" and self.stroke_table is not None:
            raise ValidationError("char-ngram scheme must not carry a stroke_table")

    @property
    def active(self) -> bool:
        return self.kind != "none"


def char_ngram_scheme(n_min: int = 3, n_max: int = 6, bucket_count: int = 2_000_000) -> FeatureScheme:
    return FeatureScheme(kind="char-ngram", n_min=n_min, n_max=n_max, bucket_count=bucket_count)


def stroke_ngram_scheme(
    stroke_table: dict[str, str], n_min: int = 3, n_max: int = 12, bucket_count: int = 2_000_000
) -> FeatureScheme:
    return FeatureScheme(
        kind="stroke-ngram", n_min=n_min, n_max=n_max,
        bucket_count=bucket_count, stroke_table=stroke_table,
    )


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def hash_feature(gram: str, bucket_count: int) -> int:
    return fnv1a_64(gram.encode("utf-8")) % bucket_count


def feature_grams(token: str, scheme: FeatureScheme) -> list[str]:
    """The raw feature strings of a token, before hashing.

    char-ngram: all n-grams of the boundary-marked token with n in
    [n_min, n_max], plus the whole marked token when its length falls outside
    that range (inside it, the full token already appears as an n-gram).
    stroke-ngram: all n-grams of the concatenated stroke-class digits;
    characters missing from the stroke table contribute nothing and trigger a
    warning. kind "none": no features.
    """
    if scheme.kind == "none":
        return []
    if scheme.kind == "char-ngram":
        marked = BOUNDARY_START + token + BOUNDARY_END
        grams = _ngrams(marked, scheme.n_min, scheme.n_max)
        if not (scheme.n_min <= len(marked) <= scheme.n_max):
            grams.append(marked)
        return grams
    # stroke-ngram
    pieces = []
    for ch in token:
        seq = scheme.stroke_table.get(ch)
        if seq is None:
            warnings.warn(
                f"character {ch!r} missing from stroke table; it contributes no strokes",
                MissingStrokeWarning,
                stacklevel=2,
            )
        else:
            pieces.append(seq)
    return _ngrams("".join(pieces), scheme.n_min, scheme.n_max)


def featurize(token: str, scheme: FeatureScheme) -> list[int]:
    """Hashed feature ids of a token under the scheme, in generation order."""
    return [hash_feature(g, scheme.bucket_count) for g in feature_grams(token, scheme)]


def _ngrams(s: str, n_min: int, n_max: int) -> list[str]:
    out = []
    for n in range(n_min, n_max + 1):
        for i in range(len(s) - n + 1):
            out.append(s[i : i + n])
    return out


class MissingStrokeWarning(UserWarning):
    """A character had no stroke-table entry; featurization skipped it."""


def load_stroke_table(path: str | Path) -> dict[str, str]:
    """Read a TSV of character -> stroke-class digit string (classes 1..5)."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected 2 tab-separated columns", path=path, line=lineno)
            ch, seq = parts
            if len(ch) != 1:
                raise ParseError(f"key must be a single character, got {ch!r}", path=path, line=lineno)
            if not seq or any(d not in STROKE_CLASSES for d in seq):
                raise ParseError(
                    f"stroke sequence must be non-empty digits 1-5, got {seq!r}",
                    path=path, line=lineno,
                )
            table.setdefault(ch, seq)
    return table
