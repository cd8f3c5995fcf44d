"""ROUGE-1/2/L with precision, recall, and F1 at word or character granularity."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import ParseError, ValidationError

UNITS = ("word", "character")
VARIANTS = ("r1", "r2", "rl")


@dataclass(frozen=True)
class RougeScore:
    variant: str
    precision: float
    recall: float
    f1: float
    unit: str
    undefined: bool = False  # set when a side had too few units to score


def _units(text: str, unit: str) -> list[str]:
    if unit == "word":
        return text.split()
    if unit == "character":
        return [ch for ch in text if not ch.isspace()]
    raise ValidationError(f"unknown unit {unit!r}")


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int, unit: str = "word") -> RougeScore:
    """Clipped n-gram overlap: each reference n-gram is matchable at most
    its reference multiplicity."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    variant = f"r{n}"
    cand = _ngrams(_units(candidate, unit), n)
    ref = _ngrams(_units(reference, unit), n)
    n_cand = sum(cand.values())
    n_ref = sum(ref.values())
    if n_ref == 0 or n_cand == 0:
        return RougeScore(variant, 0.0, 0.0, 0.0, unit, undefined=True)
    overlap = sum((cand & ref).values())
    p = overlap / n_cand
    r = overlap / n_ref
    return RougeScore(variant, p, r, _f1(p, r), unit)


def _lcs_len(a: list[str], b: list[str]) -> int:
    # rolling single-row DP
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: str, reference: str, unit: str = "word") -> RougeScore:
    """Longest-common-subsequence recall/precision against a single reference."""
    cand = _units(candidate, unit)
    ref = _units(reference, unit)
    if not cand or not ref:
        return RougeScore("rl", 0.0, 0.0, 0.0, unit, undefined=True)
    lcs = _lcs_len(cand, ref)
    p = lcs / len(cand)
    r = lcs / len(ref)
    return RougeScore("rl", p, r, _f1(p, r), unit)


def score_all(candidate: str, reference: str, unit: str = "word") -> dict[str, RougeScore]:
    return {
        "r1": rouge_n(candidate, reference, 1, unit),
        "r2": rouge_n(candidate, reference, 2, unit),
        "rl": rouge_l(candidate, reference, unit),
    }


@dataclass(frozen=True)
class EvalReport:
    """Per-document ROUGE scores plus unweighted means (percent convention)."""

    unit: str
    per_doc: dict[str, dict[str, RougeScore]]
    means: dict[str, dict[str, float]]  # variant -> {precision, recall, f1} in percent

    def format_means(self) -> str:
        lines = ["variant\tprecision\trecall\tf1"]
        for variant in VARIANTS:
            m = self.means[variant]
            lines.append(
                f"{variant}\t{m['precision']:.2f}\t{m['recall']:.2f}\t{m['f1']:.2f}"
            )
        return "\n".join(lines)


def evaluate_set(
    candidates: Mapping[str, str], references: Mapping[str, str], unit: str = "word"
) -> EvalReport:
    """Score every candidate against its same-id reference.

    The id sets must match exactly; any difference aborts with the offending
    ids. Means are unweighted over documents and reported as percentages.
    """
    missing_refs = sorted(set(candidates) - set(references))
    missing_cands = sorted(set(references) - set(candidates))
    if missing_refs or missing_cands:
        raise ValidationError(
            f"id mismatch: no reference for {missing_refs[:10]}, "
            f"no candidate for {missing_cands[:10]}"
        )
    if not candidates:
        raise ValidationError("nothing to evaluate: empty id set")
    per_doc = {
        doc_id: score_all(candidates[doc_id], references[doc_id], unit)
        for doc_id in candidates
    }
    means = {}
    n = len(per_doc)
    for variant in VARIANTS:
        means[variant] = {
            stat: round(
                100.0 * sum(getattr(scores[variant], stat) for scores in per_doc.values()) / n,
                2,
            )
            for stat in ("precision", "recall", "f1")
        }
    return EvalReport(unit=unit, per_doc=per_doc, means=means)


def read_text_jsonl(path: str | Path) -> dict[str, str]:
    """Read a JSONL of {id, text} records; 'summary' is accepted for 'text'."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=lineno) from exc
            if "id" not in obj:
                raise ParseError("record is missing 'id'", path=path, line=lineno)
            text = obj.get("text", obj.get("summary"))
            if text is None:
                raise ParseError("record needs 'text' or 'summary'", path=path, line=lineno)
            if obj["id"] in table:
                raise ParseError(f"duplicate id {obj['id']!r}", path=path, line=lineno)
            table[str(obj["id"])] = str(text)
    return table


def evaluate_files(
    candidates_path: str | Path,
    references_path: str | Path,
    unit: str,
    report_tsv: str | Path,
    means_json: str | Path,
) -> EvalReport:
    """File-level wrapper: JSONL in, per-document TSV + JSON means out."""
    report = evaluate_set(
        read_text_jsonl(candidates_path), read_text_jsonl(references_path), unit
    )
    with open(report_tsv, "w", encoding="utf-8") as fh:
        header = ["id"]
        for variant in VARIANTS:
            header += [f"{variant}_p", f"{variant}_r", f"{variant}_f1"]
        fh.write("\t".join(header) + "\n")
        for doc_id in sorted(report.per_doc):
            row = [doc_id]
            for variant in VARIANTS:
                s = report.per_doc[doc_id][variant]
                row += [f"{100 * s.precision:.2f}", f"{100 * s.recall:.2f}", f"{100 * s.f1:.2f}"]
            fh.write("\t".join(row) + "\n")
    with open(means_json, "w", encoding="utf-8") as fh:
        json.dump({"unit": unit, "means": report.means}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report
