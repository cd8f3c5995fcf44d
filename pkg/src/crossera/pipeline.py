"""Declarative end-to-end runs: config validation, stages, and the manifest.

A run owns its output directory. Every stage reads only declared inputs,
writes only into the output directory, and registers each written file in
manifest.json with a content hash. Manifests carry no timestamps, so two
identical single-threaded runs produce byte-identical artifacts.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import torch
import yaml

from . import corpus as corpus_mod
from . import eval as eval_mod
from . import mapping as mapping_mod
from . import summarizer as summ_mod
from .embeddings import (
    SgnsConfig,
    build_vocab,
    char_ngram_scheme,
    load_embeddings,
    load_stroke_table,
    save_embeddings,
    stroke_ngram_scheme,
    train_sgns,
)
from .embeddings.model import WordVectors, write_vectors
from .embeddings.vocab import Vocab
from .errors import ConfigError, StageError

STAGES = ("preprocess", "train-emb", "map", "train-summ", "swap", "summarise", "eval")

# master seed fan-out; fixed offsets keep ablations comparable
SEED_OFFSETS = {"emb_hist": 1, "emb_modern": 2, "map": 3, "summ": 4}

_DEFAULTS: dict = {
    "profile": None,
    "enhancement": [],
    "mapping_mode": "IdMap",
    "seed": 1234,
    "out_dir": None,
    "unit": None,  # defaults to word (alphabetic) or character (ideographic)
    "threads": 1,
    "normalize_copied": False,
    "paths": {
        "historical_corpus": None,
        "modern_corpus": None,
        "summ_pairs": None,
        "decode_input": None,
        "references": None,
        "norm_rules": None,
        "glyph_lexicon": None,
        "stroke_table": None,
    },
    "preprocess": {"min_sentence_units": 10},
    "embeddings": {
        "dim": 100,
        "max_vocab": 50_000,
        "buckets": 2_000_000,
        "n_min": None,  # 3 for char n-grams, 3 for stroke n-grams
        "n_max": None,  # 6 for char n-grams, 12 for stroke n-grams
        "window": 5,
        "negatives": 5,
        "epochs": 5,
        "initial_lr": 0.05,
        "min_count": 1,
        "subsample_t": 1e-4,
        "workers": 1,
        "backend": "auto",
    },
    "mapping": {"csls_k": 10, "direction": "symmetric", "max_iter": 50, "top_f": 20_000},
    "summarizer": {
        "emb_dim": None,  # defaults to embeddings.dim
        "hidden_dim": 128,
        "max_story_len": 400,
        "max_summary_len": 60,
        "beam_size": 4,
        "coverage_enabled": False,
        "lr": 0.1,
        "batch_size": 8,
        "max_steps": 1000,
        "optimizer": "sgd",
        "grad_clip": 2.0,
    },
}


@dataclass(frozen=True)
class PipelineConfig:
    profile: str
    enhancement: tuple[str, ...]
    mapping_mode: str
    seed: int
    out_dir: Path
    unit: str
    threads: int
    normalize_copied: bool
    min_sentence_units: int
    paths: dict[str, Optional[Path]]
    embeddings: dict
    mapping: dict
    summarizer: dict

    def stage_seed(self, name: str) -> int:
        return self.seed + SEED_OFFSETS[name]

    def effective(self) -> dict:
        out = asdict(self)
        out["out_dir"] = str(self.out_dir)
        out["paths"] = {k: (str(v) if v else None) for k, v in self.paths.items()}
        out["enhancement"] = list(self.enhancement)
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.effective(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _merge_section(name: str, defaults: dict, user: dict) -> dict:
    unknown = set(user) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(user)
    return merged


def validate(config_path: str | Path) -> PipelineConfig:
    """Parse, default, and invariant-check a YAML run configuration."""
    with open(config_path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return validate_dict(raw, base_dir=Path(config_path).parent)


def validate_dict(raw: dict, base_dir: Path = Path(".")) -> PipelineConfig:
    top = _merge_section("config", _DEFAULTS, raw)
    for section in ("paths", "preprocess", "embeddings", "mapping", "summarizer"):
        top[section] = _merge_section(section, _DEFAULTS[section], top.get(section) or {})

    profile = top["profile"]
    if profile not in ("alphabetic", "ideographic"):
        raise ConfigError("profile: must be 'alphabetic' or 'ideographic'")
    enhancement = tuple(top["enhancement"] or [])
    for enh in enhancement:
        if enh not in ("NORM", "CONV"):
            raise ConfigError(f"enhancement: unknown entry {enh!r}")
    if "CONV" in enhancement and profile != "ideographic":
        raise ConfigError("enhancement: CONV requires the ideographic profile")
    if "NORM" in enhancement and profile != "alphabetic":
        raise ConfigError("enhancement: NORM requires the alphabetic profile")
    if top["mapping_mode"] not in ("IdMap", "UspMap"):
        raise ConfigError("mapping_mode: must be 'IdMap' or 'UspMap'")
    if top["out_dir"] is None:
        raise ConfigError("out_dir: required")
    unit = top["unit"] or ("word" if profile == "alphabetic" else "character")
    if unit not in ("word", "character"):
        raise ConfigError("unit: must be 'word' or 'character'")

    paths: dict[str, Optional[Path]] = {}
    for key, value in top["paths"].items():
        paths[key] = (base_dir / value).resolve() if value else None
    required = ["historical_corpus", "modern_corpus", "summ_pairs", "decode_input"]
    if "NORM" in enhancement:
        required.append("norm_rules")
    if "CONV" in enhancement:
        required.append("glyph_lexicon")
    if profile == "ideographic":
        required.append("stroke_table")
    for key in required:
        if paths[key] is None:
            raise ConfigError(f"paths.{key}: required for this configuration")
        if not paths[key].exists():
            raise ConfigError(f"paths.{key}: {paths[key]} does not exist")
    for key, p in paths.items():
        if p is not None and not p.exists():
            raise ConfigError(f"paths.{key}: {p} does not exist")

    emb = dict(top["embeddings"])
    if emb["n_min"] is None:
        emb["n_min"] = 3
    if emb["n_max"] is None:
        emb["n_max"] = 6 if profile == "alphabetic" else 12
    summ = dict(top["summarizer"])
    if summ["emb_dim"] is None:
        summ["emb_dim"] = emb["dim"]
    if summ["emb_dim"] != emb["dim"]:
        raise ConfigError(
            f"summarizer.emb_dim ({summ['emb_dim']}) must equal embeddings.dim ({emb['dim']})"
        )

    return PipelineConfig(
        profile=profile,
        enhancement=enhancement,
        mapping_mode=top["mapping_mode"],
        seed=int(top["seed"]),
        out_dir=(base_dir / top["out_dir"]).resolve(),
        unit=unit,
        threads=int(top["threads"]),
        normalize_copied=bool(top["normalize_copied"]),
        min_sentence_units=int(top["preprocess"]["min_sentence_units"]),
        paths=paths,
        embeddings=emb,
        mapping=dict(top["mapping"]),
        summarizer=summ,
    )


def apply_overrides(raw: dict, overrides: list[str]) -> dict:
    """Apply dotted key=value CLI overrides onto a raw config mapping."""
    out = copy.deepcopy(raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        node = out
        keys = dotted.split(".")
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot override through non-mapping key {key!r}")
        node[keys[-1]] = yaml.safe_load(value)
    return out


# --------------------------------------------------------------------- stages


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _tokenize(text: str, profile: str) -> list[str]:
    if profile == "alphabetic":
        return text.split()
    return [ch for ch in text if not ch.isspace()]


class PipelineRun:
    """Executes stages into one output directory and maintains its manifest."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.out = cfg.out_dir
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.out / "manifest.json"
        if self.manifest_path.exists():
            with open(self.manifest_path, encoding="utf-8") as fh:
                self.manifest = json.load(fh)
        else:
            self.manifest = {"stages": {}}
        self.manifest["config_hash"] = cfg.config_hash()
        self.manifest["master_seed"] = cfg.seed
        self.manifest["stage_seeds"] = {k: cfg.seed + v for k, v in SEED_OFFSETS.items()}

    # artifact paths
    def path(self, name: str) -> Path:
        return self.out / name

    def _record(self, stage: str, outputs: list[Path], info: Optional[dict] = None) -> None:
        self.manifest["stages"][stage] = {
            "status": "done",
            "outputs": {p.name: _sha256(p) for p in outputs},
            "info": info or {},
        }
        self._write_manifest()

    def _fail(self, stage: str, error: Exception) -> None:
        self.manifest["stages"][stage] = {"status": "failed", "error": str(error)}
        self._write_manifest()

    def _write_manifest(self) -> None:
        with open(self.manifest_path, "w", encoding="utf-8") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def _require(self, stage: str, files: list[Path]) -> None:
        missing = [str(p) for p in files if not p.exists()]
        if missing:
            raise StageError(f"stage '{stage}' is missing upstream artifacts: {missing}")

    # ------------------------------------------------------------- preprocess

    def stage_preprocess(self) -> list[Path]:
        cfg = self.cfg
        hist_profile = (
            "alphabetic-historical" if cfg.profile == "alphabetic" else "ideographic"
        )
        modern_profile = (
            "alphabetic-modern" if cfg.profile == "alphabetic" else "ideographic"
        )
        norm_rules = (
            corpus_mod.load_norm_rules(cfg.paths["norm_rules"])
            if "NORM" in cfg.enhancement else None
        )
        glyphs = (
            corpus_mod.load_glyph_lexicon(cfg.paths["glyph_lexicon"])
            if "CONV" in cfg.enhancement else None
        )

        def enhance_hist(text: str) -> str:
            text = corpus_mod.clean_text(text, hist_profile)
            if norm_rules is not None:
                text = corpus_mod.normalize_spelling(text, norm_rules)
            if glyphs is not None:
                text = corpus_mod.convert_glyphs(text, glyphs)
            return text

        def enhance_modern(text: str) -> str:
            text = corpus_mod.clean_text(text, modern_profile)
            if glyphs is not None:
                text = corpus_mod.convert_glyphs(text, glyphs)
            return text

        def retokenize(text: str) -> str:
            return " ".join(_tokenize(text, cfg.profile))

        outputs = []
        for side, enhance in (("hist", enhance_hist), ("modern", enhance_modern)):
            src = cfg.paths["historical_corpus" if side == "hist" else "modern_corpus"]
            dst = self.path(f"corpus_{side}.txt")
            with open(src, encoding="utf-8") as inp, open(dst, "w", encoding="utf-8") as out:
                sentences = [
                    retokenize(enhance(line)) for line in inp if line.strip()
                ]
                unit = "word" if cfg.profile == "alphabetic" else "character"
                for sent in corpus_mod.filter_short(sentences, cfg.min_sentence_units, unit):
                    out.write(sent + "\n")
            outputs.append(dst)

        docs = corpus_mod.load_documents(cfg.paths["summ_pairs"], format="jsonl")
        pairs_path = self.path("pairs.jsonl")
        with open(pairs_path, "w", encoding="utf-8") as fh:
            for doc in docs:
                if doc.summary is None:
                    raise StageError(f"training pair {doc.id!r} has no summary")
                fh.write(json.dumps({
                    "id": doc.id,
                    "story": retokenize(enhance_modern(doc.story)),
                    "summary": retokenize(enhance_modern(doc.summary)),
                }, ensure_ascii=False) + "\n")
        outputs.append(pairs_path)

        decode_docs = corpus_mod.load_documents(cfg.paths["decode_input"], format="jsonl")
        decode_path = self.path("decode_input.jsonl")
        with open(decode_path, "w", encoding="utf-8") as fh:
            for doc in decode_docs:
                fh.write(json.dumps({
                    "id": doc.id, "story": retokenize(enhance_hist(doc.story)),
                }, ensure_ascii=False) + "\n")
        outputs.append(decode_path)

        if cfg.paths["references"] is not None:
            refs = eval_mod.read_text_jsonl(cfg.paths["references"])
            ref_path = self.path("references.jsonl")
            with open(ref_path, "w", encoding="utf-8") as fh:
                for doc_id, text in refs.items():
                    fh.write(json.dumps({
                        "id": doc_id, "text": retokenize(enhance_modern(text)),
                    }, ensure_ascii=False) + "\n")
            outputs.append(ref_path)
        return outputs

    # -------------------------------------------------------------- train-emb

    def _scheme(self):
        e = self.cfg.embeddings
        if self.cfg.profile == "alphabetic":
            return char_ngram_scheme(e["n_min"], e["n_max"], e["buckets"])
        table = load_stroke_table(self.cfg.paths["stroke_table"])
        return stroke_ngram_scheme(table, e["n_min"], e["n_max"], e["buckets"])

    def stage_train_emb(self) -> list[Path]:
        cfg = self.cfg
        self._require("train-emb", [self.path("corpus_hist.txt"), self.path("corpus_modern.txt")])
        e = cfg.embeddings
        scheme = self._scheme()
        outputs = []
        log = {}
        for side, seed_name in (("hist", "emb_hist"), ("modern", "emb_modern")):
            sentences = [
                line.split()
                for line in open(self.path(f"corpus_{side}.txt"), encoding="utf-8")
                if line.strip()
            ]
            vocab = build_vocab(
                (t for s in sentences for t in s),
                min_count=e["min_count"], max_size=e["max_vocab"],
            )
            sgns_cfg = SgnsConfig(
                window=e["window"], negatives=e["negatives"], epochs=e["epochs"],
                initial_lr=e["initial_lr"], min_count=e["min_count"],
                subsample_t=e["subsample_t"], seed=cfg.stage_seed(seed_name),
            )
            model = train_sgns(
                sentences, vocab, scheme, sgns_cfg, dim=e["dim"],
                workers=e["workers"], backend=e["backend"],
            )
            vec_path = self.path(f"{side}.vec")
            save_embeddings(model, vec_path)
            outputs.append(vec_path)
            log[side] = model.train_log
        log_path = self.path("embedding_log.json")
        with open(log_path, "w", encoding="utf-8") as fh:
            json.dump(log, fh, indent=2, sort_keys=True)
            fh.write("\n")
        outputs.append(log_path)
        return outputs

    # -------------------------------------------------------------------- map

    def stage_map(self) -> tuple[list[Path], dict]:
        cfg = self.cfg
        self._require("map", [self.path("hist.vec"), self.path("modern.vec")])
        src = load_embeddings(self.path("hist.vec"))
        tgt = load_embeddings(self.path("modern.vec"))
        X = mapping_mod.normalize_spaces(src.vectors)
        Y = mapping_mod.normalize_spaces(tgt.vectors)
        m = cfg.mapping
        csls = mapping_mod.CslsConfig(k=m["csls_k"], direction=m["direction"])
        if cfg.mapping_mode == "IdMap":
            pseudo = lambda toks: Vocab(
                tokens=toks, counts=tuple(range(len(toks), 0, -1))
            )
            seed = mapping_mod.build_identical_seed(pseudo(src.tokens), pseudo(tgt.tokens))
            if len(seed) == 0:
                raise StageError("IdMap found no identical token pairs")
        else:
            seed = mapping_mod.unsupervised_init(X, Y)
        result = mapping_mod.self_learn(
            X, Y, seed, csls, max_iter=m["max_iter"], top_f=m["top_f"]
        )
        mapped_path = self.path("hist_mapped.vec")
        write_vectors(mapped_path, src.tokens, X @ result.transform)
        norm_path = self.path("modern_norm.vec")
        write_vectors(norm_path, tgt.tokens, Y)
        dict_path = self.path("dictionary.tsv")
        mapping_mod.save_dictionary(dict_path, result.final_dictionary, src.tokens, tgt.tokens)
        info = {
            "mode": cfg.mapping_mode,
            "seed_size": result.seed_size,
            "final_dict_size": len(result.final_dictionary),
            "iterations": result.iterations,
            "objective_trace": list(result.objective_trace),
        }
        map_json = self.path("mapping.json")
        with open(map_json, "w", encoding="utf-8") as fh:
            json.dump(info, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return [mapped_path, norm_path, dict_path, map_json], info

    # ------------------------------------------------------------- train-summ

    def _summ_config(self) -> summ_mod.SummarizerConfig:
        s = self.cfg.summarizer
        return summ_mod.SummarizerConfig(
            emb_dim=s["emb_dim"], hidden_dim=s["hidden_dim"],
            max_story_len=s["max_story_len"], max_summary_len=s["max_summary_len"],
            beam_size=s["beam_size"], coverage_enabled=s["coverage_enabled"],
            lr=s["lr"], batch_size=s["batch_size"], max_steps=s["max_steps"],
            seed=self.cfg.stage_seed("summ"), grad_clip=s["grad_clip"],
            optimizer=s["optimizer"],
        )

    def stage_train_summ(self) -> list[Path]:
        self._require("train-summ", [self.path("modern_norm.vec"), self.path("pairs.jsonl")])
        torch.set_num_threads(self.cfg.threads)
        encoder_table = load_embeddings(self.path("modern_norm.vec"))
        decoder_vocab = Vocab(
            tokens=encoder_table.tokens,
            counts=tuple(range(len(encoder_table.tokens), 0, -1)),
        )
        pairs = []
        with open(self.path("pairs.jsonl"), encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                story = obj["story"].split()
                summary = obj["summary"].split()
                if story and summary:
                    pairs.append((story, summary))
        scfg = self._summ_config()
        model = summ_mod.build_model(scfg, encoder_table, decoder_vocab)
        model, losses = summ_mod.train(model, pairs, scfg)
        ckpt = self.path("summarizer.pt")
        summ_mod.save_checkpoint(model, ckpt)
        loss_path = self.path("train_losses.json")
        with open(loss_path, "w", encoding="utf-8") as fh:
            json.dump({"losses": losses}, fh)
            fh.write("\n")
        return [ckpt, loss_path]

    # ------------------------------------------------------------------- swap

    def stage_swap(self) -> list[Path]:
        self._require("swap", [self.path("summarizer.pt"), self.path("hist_mapped.vec")])
        torch.set_num_threads(self.cfg.threads)
        model = summ_mod.load_checkpoint(self.path("summarizer.pt"))
        table = load_embeddings(self.path("hist_mapped.vec"))
        summ_mod.swap_encoder_embeddings(model, table)
        out = self.path("summarizer_swapped.pt")
        summ_mod.save_checkpoint(model, out)
        return [out]

    # -------------------------------------------------------------- summarise

    def stage_summarise(self) -> tuple[list[Path], dict]:
        cfg = self.cfg
        self._require("summarise", [self.path("summarizer_swapped.pt"),
                                    self.path("decode_input.jsonl")])
        torch.set_num_threads(cfg.threads)
        model = summ_mod.load_checkpoint(self.path("summarizer_swapped.pt"))

        mapper = None
        if cfg.normalize_copied:
            if "NORM" in cfg.enhancement:
                rules = corpus_mod.load_norm_rules(cfg.paths["norm_rules"])
                mapper = lambda tok: corpus_mod.normalize_spelling(tok, rules)
            elif "CONV" in cfg.enhancement:
                glyphs = corpus_mod.load_glyph_lexicon(cfg.paths["glyph_lexicon"])
                mapper = lambda tok: corpus_mod.convert_glyphs(tok, glyphs)

        out_path = self.path("decodes.jsonl")
        total_tokens = 0
        unk_tokens = 0
        with open(self.path("decode_input.jsonl"), encoding="utf-8") as inp, \
                open(out_path, "w", encoding="utf-8") as out:
            for line in inp:
                obj = json.loads(line)
                story = obj["story"].split()
                result = model.decode(story)
                if mapper is not None:
                    result = summ_mod.map_copied_tokens(result, mapper)
                total_tokens += len(result.tokens)
                unk_tokens += sum(1 for t in result.tokens if t == summ_mod.UNK)
                out.write(json.dumps({
                    "id": obj["id"],
                    "summary": " ".join(result.tokens),
                    "score": result.score,
                    "copied_positions": list(result.copied_positions),
                }, ensure_ascii=False) + "\n")
        info = {"unk_rate": (unk_tokens / total_tokens) if total_tokens else 0.0}
        return [out_path], info

    # ------------------------------------------------------------------- eval

    def stage_eval(self) -> tuple[list[Path], dict]:
        self._require("eval", [self.path("decodes.jsonl"), self.path("references.jsonl")])
        report = eval_mod.evaluate_files(
            self.path("decodes.jsonl"), self.path("references.jsonl"),
            self.cfg.unit, self.path("report.tsv"), self.path("means.json"),
        )
        return [self.path("report.tsv"), self.path("means.json")], {"means": report.means}

    # -------------------------------------------------------------------- run

    def run(self, stages: Optional[list[str]] = None) -> dict:
        requested = list(stages) if stages else list(STAGES)
        unknown = set(requested) - set(STAGES)
        if unknown:
            raise ConfigError(f"unknown stages: {sorted(unknown)}")
        runners = {
            "preprocess": self.stage_preprocess,
            "train-emb": self.stage_train_emb,
            "map": self.stage_map,
            "train-summ": self.stage_train_summ,
            "swap": self.stage_swap,
            "summarise": self.stage_summarise,
            "eval": self.stage_eval,
        }
        for stage in STAGES:
            if stage not in requested:
                continue
            try:
                result = runners[stage]()
            except Exception as exc:
                self._fail(stage, exc)
                raise StageError(f"stage '{stage}' failed: {exc}") from exc
            if isinstance(result, tuple):
                outputs, info = result
            else:
                outputs, info = result, {}
            self._record(stage, outputs, info)
        return self.manifest


def run(cfg: PipelineConfig, stages: Optional[list[str]] = None) -> dict:
    return PipelineRun(cfg).run(stages)
