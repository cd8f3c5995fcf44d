"""Document collections: loading, cleaning, enhancement, segmentation, statistics.

Everything here is a pure function over immutable inputs. A DocumentSet is
frozen after load, so concurrent readers need no coordination.
"""

from __future__ import annotations

import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .errors import EmptyInputError, ParseError, ValidationError

CLEAN_PROFILES = ("alphabetic-historical", "alphabetic-modern", "ideographic")

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)

# Unicode blocks stripped as emoji/symbol noise. This concretises "emojis and
# links": pictographs, emoticons, transport, dingbats, variation selectors.
_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),  # mahjong, cards, pictographs, emoticons, supplement
    (0x2600, 0x27BF),    # misc symbols + dingbats
    (0xFE00, 0xFE0F),    # variation selectors
    (0x2B00, 0x2BFF),    # misc symbols and arrows (checkmarks, stars)
)

_SENT_DELIMS = ".!?。！？；"  # . ! ? 。 ！ ？ ；
_SENT_SPLIT_RE = re.compile(rf"(?<=[{_SENT_DELIMS}])(?![{_SENT_DELIMS}])\s*")


@dataclass(frozen=True)
class Document:
    """One (story, summary) record with optional provenance metadata."""

    id: str
    story: str
    summary: Optional[str] = None
    year: Optional[int] = None
    topic: Optional[str] = None
    source: Optional[str] = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("document id must be non-empty")
        if not self.story:
            raise ValidationError(f"document {self.id!r} has an empty story")


class DocumentSet:
    """An ordered, immutable collection of Documents with unique ids."""

    def __init__(self, documents: Iterable[Document]):
        docs = tuple(documents)
        index: dict[str, Document] = {}
        for doc in docs:
            if doc.id in index:
                raise ValidationError(f"duplicate document id {doc.id!r}")
            index[doc.id] = doc
        self._docs = docs
        self._index = index

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self) -> Iterator[Document]:
        return iter(self._docs)

    def __getitem__(self, doc_id: str) -> Document:
        return self._index[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._index

    @property
    def documents(self) -> tuple[Document, ...]:
        return self._docs


@dataclass(frozen=True)
class CorpusStats:
    """Mean story/summary lengths and their ratio, at one token granularity."""

    mean_story_len: float
    mean_summ_len: float
    compression_rate: float
    unit: str


@dataclass(frozen=True)
class GlyphLexicon:
    """Glyph conversion table (e.g. simplified to traditional characters)."""

    entries: dict[str, str]
    longest_key_len: int = field(init=False)

    def __post_init__(self):
        if any(not k for k in self.entries):
            raise ValidationError("glyph lexicon contains an empty key")
        longest = max((len(k) for k in self.entries), default=0)
        object.__setattr__(self, "longest_key_len", longest)


@dataclass(frozen=True)
class NormRule:
    pattern: str
    replacement: str
    scope: str  # "whole-token" or "substring"


@dataclass(frozen=True)
class NormRuleSet:
    """Ordered spelling-normalisation rules; earlier rules shadow later ones."""

    rules: tuple[NormRule, ...]
    case_sensitive: bool = True

    def __post_init__(self):
        for r in self.rules:
            if r.scope not in ("whole-token", "substring"):
                raise ValidationError(f"unknown rule scope {r.scope!r}")
            if not r.pattern:
                raise ValidationError("normalisation rule with empty pattern")


def load_glyph_lexicon(path: str | Path) -> GlyphLexicon:
    """Read a TSV of (source glyph, target glyph) pairs.

    On duplicate keys the first entry in file order wins.
    """
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError("expected 2 tab-separated columns", path=path, line=lineno)
            src, tgt = parts
            if not src:
                raise ParseError("empty source glyph", path=path, line=lineno)
            entries.setdefault(src, tgt)
    return GlyphLexicon(entries=entries)


def load_norm_rules(path: str | Path, case_sensitive: bool = True) -> NormRuleSet:
    """Read a TSV of (pattern, replacement, scope) rows; scope is token|substr."""
    scope_names = {"token": "whole-token", "substr": "substring"}
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError("expected 3 tab-separated columns", path=path, line=lineno)
            pattern, replacement, scope = parts
            if scope not in scope_names:
                raise ParseError(f"scope must be 'token' or 'substr', got {scope!r}",
                                 path=path, line=lineno)
            rules.append(NormRule(pattern, replacement, scope_names[scope]))
    return NormRuleSet(rules=tuple(rules), case_sensitive=case_sensitive)


def load_documents(path: str | Path, format: str = "jsonl") -> DocumentSet:
    """Load a DocumentSet from jsonl, tsv (with header), or plain text.

    Plain files yield one summary-less Document per non-empty line, with ids
    derived from the file stem and line number.
    """
    path = Path(path)
    if format == "jsonl":
        docs = list(_iter_jsonl_documents(path))
    elif format == "tsv":
        docs = list(_iter_tsv_documents(path))
    elif format == "plain":
        docs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if line:
                    docs.append(Document(id=f"{path.stem}-{lineno}", story=line))
    else:
        raise ValidationError(f"unknown corpus format {format!r}")
    return DocumentSet(docs)


def _iter_jsonl_documents(path: Path) -> Iterator[Document]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=lineno) from exc
            if not isinstance(obj, dict):
                raise ParseError("record is not a JSON object", path=path, line=lineno)
            try:
                yield _document_from_record(obj)
            except (ValidationError, TypeError) as exc:
                raise ParseError(f"bad record: {exc}", path=path, line=lineno) from exc


def _iter_tsv_documents(path: Path) -> Iterator[Document]:
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            return
        header = header_line.rstrip("\n").split("\t")
        if "id" not in header or "story" not in header:
            raise ParseError("tsv header must name 'id' and 'story' columns", path=path, line=1)
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            values = line.rstrip("\n").split("\t")
            if len(values) != len(header):
                raise ParseError(
                    f"expected {len(header)} columns, got {len(values)}", path=path, line=lineno
                )
            record = {k: v for k, v in zip(header, values) if v != ""}
            try:
                yield _document_from_record(record)
            except (ValidationError, TypeError, ValueError) as exc:
                raise ParseError(f"bad record: {exc}", path=path, line=lineno) from exc


def _document_from_record(obj: dict) -> Document:
    if "id" not in obj or "story" not in obj:
        raise ValidationError("record is missing required 'id' or 'story' field")
    year = obj.get("year")
    if year is not None:
        year = int(year)
    return Document(
        id=str(obj["id"]),
        story=str(obj["story"]),
        summary=None if obj.get("summary") is None else str(obj["summary"]),
        year=year,
        topic=obj.get("topic"),
        source=obj.get("source"),
    )


def _strip_noise(text: str) -> str:
    text = _URL_RE.sub(" ", text)
    out = []
    for ch in text:
        cp = ord(ch)
        if any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES):
            continue
        # control characters other than whitespace are dropped outright
        if unicodedata.category(ch) in ("Cc", "Cf") and not ch.isspace():
            continue
        out.append(ch)
    return "".join(out)


def clean_text(raw: str, profile: str) -> str:
    """Clean a piece of text under one of the language profiles.

    All profiles strip URLs, emoji-class codepoints, and control characters,
    and collapse whitespace runs. Alphabetic profiles lowercase; the
    historical-alphabetic profile additionally rewrites "/" to ",". The
    function is idempotent for every profile.
    """
    if profile not in CLEAN_PROFILES:
        raise ValidationError(f"unknown cleaning profile {profile!r}")
    text = _strip_noise(raw)
    if profile == "alphabetic-historical":
        text = text.replace("/", ",")
    if profile.startswith("alphabetic"):
        text = text.lower()
    return " ".join(text.split())


def segment_sentences(text: str, mode: str = "punctuation") -> list[str]:
    """Split text into sentences.

    punctuation mode splits after sentence-final marks (. ! ? 。 ！ ？ ；),
    keeping each delimiter run with its sentence; pre-segmented mode splits
    on newlines only.
    """
    if mode == "pre-segmented":
        return [part.strip() for part in text.split("\n") if part.strip()]
    if mode != "punctuation":
        raise ValidationError(f"unknown segmentation mode {mode!r}")
    return [part.strip() for part in _SENT_SPLIT_RE.split(text) if part.strip()]


def count_units(text: str, unit: str) -> int:
    """Length of text in whitespace tokens or non-whitespace codepoints."""
    if unit == "word":
        return len(text.split())
    if unit == "character":
        return sum(1 for ch in text if not ch.isspace())
    raise ValidationError(f"unknown unit {unit!r}")


def filter_short(sentences: list[str], min_units: int, unit: str = "word") -> list[str]:
    """Keep only sentences with at least min_units tokens, preserving order."""
    if min_units < 1:
        raise ValidationError("min_units must be >= 1")
    return [s for s in sentences if count_units(s, unit) >= min_units]


def convert_glyphs(text: str, lexicon: GlyphLexicon) -> str:
    """Rewrite glyphs by greedy longest-match left-to-right lookup."""
    if not lexicon.entries:
        return text
    entries = lexicon.entries
    max_len = lexicon.longest_key_len
    out = []
    i = 0
    n = len(text)
    while i < n:
        for length in range(min(max_len, n - i), 0, -1):
            chunk = text[i : i + length]
            if chunk in entries:
                out.append(entries[chunk])
                i += length
                break
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


def normalize_spelling(text: str, rules: NormRuleSet) -> str:
    """Rewrite historical spellings token by token.

    Each whitespace token is replaced by the first matching whole-token rule;
    failing that, substring rules apply left-to-right with each position
    rewritten at most once. Tokens are re-joined with single spaces.
    """
    token_rules = [r for r in rules.rules if r.scope == "whole-token"]
    substr_rules = [r for r in rules.rules if r.scope == "substring"]
    fold = (lambda s: s) if rules.case_sensitive else str.lower

    out_tokens = []
    for token in text.split():
        replaced = None
        for rule in token_rules:
            if fold(token) == fold(rule.pattern):
                replaced = rule.replacement
                break
        if replaced is None:
            replaced = _apply_substring_rules(token, substr_rules, fold)
        out_tokens.append(replaced)
    return " ".join(out_tokens)


def _apply_substring_rules(token: str, rules: list[NormRule], fold) -> str:
    folded = fold(token)
    out = []
    i = 0
    while i < len(token):
        for rule in rules:
            pat = fold(rule.pattern)
            if folded.startswith(pat, i):
                out.append(rule.replacement)
                i += len(pat)
                break
        else:
            out.append(token[i])
            i += 1
    return "".join(out)


def compute_stats(docs: DocumentSet, unit: str = "word") -> CorpusStats:
    """Mean story/summary lengths and compression rate over a labeled set."""
    if len(docs) == 0:
        raise EmptyInputError("cannot compute statistics of an empty DocumentSet")
    missing = [d.id for d in docs if d.summary is None]
    if missing:
        raise ValidationError(f"documents without summaries: {missing[:5]}")
    story_lens = [count_units(d.story, unit) for d in docs]
    summ_lens = [count_units(d.summary, unit) for d in docs]
    mean_story = sum(story_lens) / len(docs)
    mean_summ = sum(summ_lens) / len(docs)
    if mean_story <= 0:
        raise ValidationError("stories are empty at the chosen unit")
    return CorpusStats(
        mean_story_len=mean_story,
        mean_summ_len=mean_summ,
        compression_rate=mean_summ / mean_story,
        unit=unit,
    )


def topic_histogram(docs: DocumentSet) -> Counter:
    """Counts of the topic labels carried in document metadata."""
    return Counter(d.topic for d in docs if d.topic is not None)
