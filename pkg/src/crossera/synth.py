"""Synthetic two-era corpus generator for desk-scale pipeline runs.

Builds a small "modern" language of templated news-like stories whose
summaries are deterministic keyword extractions, plus a "historical" twin
produced by a fixed invertible spelling shift (vowel rotation) that leaves
the keyword tokens untouched. The unchanged keywords double as the
identical-token seeds for alignment, exactly the regime the pipeline
targets: no parallel documents, weak lexical anchors, shared structure.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

_CONSONANTS = "bdfghklmnprst"  # 'z' is reserved for keywords
_VOWELS = "aeiou"
_VOWEL_SHIFT = {"a": "e", "e": "i", "i": "o", "o": "u", "u": "a"}


@dataclass(frozen=True)
class SynthSpec:
    n_keywords: int = 60
    n_fillers: int = 200
    n_structurals: int = 40
    sentences_per_story: int = 3
    seed: int = 2024

    @property
    def vocab_size(self) -> int:
        return self.n_keywords + self.n_fillers + self.n_structurals


class SynthLanguage:
    """Vocabulary, story sampler, and the era shift table.

    Each keyword owns a fixed set of collocate fillers it tends to appear
    with, so every token has an identifiable co-occurrence signature; without
    that structure the two eras' spaces would be exchangeable up to token
    permutation and alignment would be ill-posed.
    """

    def __init__(self, spec: SynthSpec = SynthSpec()):
        self.spec = spec
        base = []
        for c1 in _CONSONANTS:
            for c2 in _CONSONANTS:
                for v in _VOWELS:
                    base.append(f"{c1}a{c2}{v}")  # first vowel always 'a'
        needed = spec.n_fillers + spec.n_structurals + spec.n_keywords
        if needed > len(base):
            raise ValueError("vocabulary template too small for the spec")
        self.fillers = base[: spec.n_fillers]
        self.structurals = base[spec.n_fillers : spec.n_fillers + spec.n_structurals]
        self.keywords = ["z" + w for w in base[-spec.n_keywords :]]
        self.vocab = self.keywords + self.fillers + self.structurals
        # spelling shift: keywords stay identical, everything else rotates vowels
        self.shift_table = {w: w for w in self.keywords}
        for w in self.fillers + self.structurals:
            self.shift_table[w] = "".join(_VOWEL_SHIFT.get(ch, ch) for ch in w)
        # collocate sets are part of the language: fixed by the spec seed
        lang_rng = np.random.default_rng(spec.seed)
        self.collocates = {
            kw: [self.fillers[i] for i in lang_rng.choice(spec.n_fillers, size=5, replace=False)]
            for kw in self.keywords
        }

    def to_historical(self, tokens: list[str]) -> list[str]:
        return [self.shift_table[t] for t in tokens]

    def inverse_shift_rules(self) -> list[tuple[str, str]]:
        """(historical, modern) whole-token pairs for the changed words."""
        return [(h, m) for m, h in self.shift_table.items() if h != m]

    def sample_story(self, rng: np.random.Generator) -> tuple[list[str], list[str]]:
        """One story and its summary (the per-sentence keywords, in order)."""
        kws = [self.keywords[i] for i in rng.choice(len(self.keywords),
                                                    size=self.spec.sentences_per_story,
                                                    replace=False)]
        story: list[str] = []
        for kw in kws:
            n_fill = int(rng.integers(3, 6))
            sentence = [self.structurals[int(rng.integers(len(self.structurals)))]]
            fills = []
            for _ in range(n_fill):
                if rng.random() < 0.7:
                    pool = self.collocates[kw]
                else:
                    pool = self.fillers
                fills.append(pool[int(rng.integers(len(pool)))])
            slot = int(rng.integers(1, n_fill + 1))
            sentence += fills[:slot] + [kw] + fills[slot:]
            story.extend(sentence)
        return story, kws

    def sample_sentences(self, n_sentences: int, rng: np.random.Generator) -> list[list[str]]:
        """Independent sentences for embedding training."""
        out = []
        while len(out) < n_sentences:
            story, _ = self.sample_story(rng)
            # split the story back into its sentences at structural markers
            sent: list[str] = []
            for tok in story:
                if tok in set(self.structurals) and sent:
                    out.append(sent)
                    sent = []
                sent.append(tok)
            if sent:
                out.append(sent)
        return out[:n_sentences]


def write_corpus_files(
    out_dir: str | Path,
    spec: SynthSpec = SynthSpec(),
    n_train_pairs: int = 2000,
    n_eval_stories: int = 200,
    n_embed_sentences: int = 20_000,
) -> dict[str, Path]:
    """Materialise every file the pipeline consumes.

    The historical embedding corpus is sampled independently of the modern
    one (no parallel data); only the evaluation stories have modern
    references, which is what the transfer is scored against.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lang = SynthLanguage(spec)
    rng = np.random.default_rng(spec.seed)

    paths = {
        "modern_corpus": out_dir / "modern_corpus.txt",
        "historical_corpus": out_dir / "historical_corpus.txt",
        "summ_pairs": out_dir / "summ_pairs.jsonl",
        "decode_input": out_dir / "decode_input.jsonl",
        "references": out_dir / "references.jsonl",
        "norm_rules": out_dir / "norm_rules.tsv",
    }

    with open(paths["modern_corpus"], "w", encoding="utf-8") as fh:
        for sent in lang.sample_sentences(n_embed_sentences, rng):
            fh.write(" ".join(sent) + "\n")
    with open(paths["historical_corpus"], "w", encoding="utf-8") as fh:
        for sent in lang.sample_sentences(n_embed_sentences, rng):
            fh.write(" ".join(lang.to_historical(sent)) + "\n")

    with open(paths["summ_pairs"], "w", encoding="utf-8") as fh:
        for i in range(n_train_pairs):
            story, summary = lang.sample_story(rng)
            fh.write(json.dumps({"id": f"train-{i}", "story": " ".join(story),
                                 "summary": " ".join(summary)}) + "\n")

    with open(paths["decode_input"], "w", encoding="utf-8") as dec, \
            open(paths["references"], "w", encoding="utf-8") as ref:
        for i in range(n_eval_stories):
            story, summary = lang.sample_story(rng)
            hist = lang.to_historical(story)
            dec.write(json.dumps({"id": f"test-{i}", "story": " ".join(hist)}) + "\n")
            ref.write(json.dumps({"id": f"test-{i}", "text": " ".join(summary)}) + "\n")

    with open(paths["norm_rules"], "w", encoding="utf-8") as fh:
        for hist, modern in lang.inverse_shift_rules():
            fh.write(f"{hist}\t{modern}\ttoken\n")

    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="generate a synthetic two-era corpus")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--train-pairs", type=int, default=2000)
    parser.add_argument("--eval-stories", type=int, default=200)
    parser.add_argument("--embed-sentences", type=int, default=20_000)
    args = parser.parse_args(argv)
    paths = write_corpus_files(
        args.out,
        SynthSpec(seed=args.seed),
        n_train_pairs=args.train_pairs,
        n_eval_stories=args.eval_stories,
        n_embed_sentences=args.embed_sentences,
    )
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
