import hashlib
import json
import shutil

import pytest
import yaml

from crossera import cli, pipeline, synth
from crossera.errors import ConfigError, StageError

SMALL_SPEC = synth.SynthSpec(n_keywords=20, n_fillers=60, n_structurals=10, seed=5)


def _small_config(data_dir, out_dir, **extra):
    paths = synth.write_corpus_files(
        data_dir, SMALL_SPEC, n_train_pairs=40, n_eval_stories=8, n_embed_sentences=600
    )
    raw = {
        "profile": "alphabetic",
        "enhancement": [],
        "mapping_mode": "IdMap",
        "seed": 99,
        "out_dir": str(out_dir),
        "paths": {k: str(v) for k, v in paths.items() if k != "norm_rules"},
        "preprocess": {"min_sentence_units": 3},
        "embeddings": {"dim": 16, "buckets": 4096, "epochs": 2, "window": 3,
                       "subsample_t": 0.0, "max_vocab": 500},
        "mapping": {"csls_k": 5, "max_iter": 5, "top_f": 200},
        "summarizer": {"hidden_dim": 12, "max_story_len": 30, "max_summary_len": 5,
                       "beam_size": 1, "lr": 0.3, "batch_size": 4, "max_steps": 40},
    }
    raw.update(extra)
    return raw


# ------------------------------------------------------------------- config


def test_conv_requires_ideographic(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o",
                        enhancement=["CONV"])
    with pytest.raises(ConfigError, match="CONV"):
        pipeline.validate_dict(raw)


def test_norm_requires_alphabetic(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    raw["profile"] = "ideographic"
    raw["enhancement"] = ["NORM"]
    with pytest.raises(ConfigError, match="NORM"):
        pipeline.validate_dict(raw)


def test_missing_path_rejected(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    raw["paths"]["modern_corpus"] = str(tmp_path / "nope.txt")
    with pytest.raises(ConfigError, match="does not exist"):
        pipeline.validate_dict(raw)


def test_stroke_table_required_for_ideographic(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    raw["profile"] = "ideographic"
    with pytest.raises(ConfigError, match="stroke_table"):
        pipeline.validate_dict(raw)


def test_unknown_keys_rejected(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    raw["embeddings"]["learning_rate"] = 0.1
    with pytest.raises(ConfigError, match="learning_rate"):
        pipeline.validate_dict(raw)


def test_effective_config_echoes_defaults(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    cfg = pipeline.validate_dict(raw)
    eff = cfg.effective()
    assert eff["mapping"]["direction"] == "symmetric"  # defaulted
    assert eff["summarizer"]["emb_dim"] == 16  # inherited from embeddings.dim
    assert eff["unit"] == "word"  # profile default
    assert eff["threads"] == 1


def test_emb_dim_mismatch_rejected(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    raw["summarizer"]["emb_dim"] = 32
    with pytest.raises(ConfigError, match="emb_dim"):
        pipeline.validate_dict(raw)


def test_overrides_apply_dotted_paths(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    out = pipeline.apply_overrides(raw, ["embeddings.dim=24", "summarizer.emb_dim=24",
                                         "mapping_mode=UspMap"])
    cfg = pipeline.validate_dict(out)
    assert cfg.embeddings["dim"] == 24
    assert cfg.mapping_mode == "UspMap"


def test_seed_fanout_offsets(tmp_path):
    cfg = pipeline.validate_dict(_small_config(tmp_path / "d", tmp_path / "o"))
    seeds = {cfg.stage_seed(k) for k in ("emb_hist", "emb_modern", "map", "summ")}
    assert len(seeds) == 4  # all distinct


# ----------------------------------------------------------------- full runs


@pytest.fixture(scope="module")
def finished_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("pipe")
    raw = _small_config(base / "data", base / "run")
    cfg = pipeline.validate_dict(raw)
    manifest = pipeline.run(cfg)
    return raw, cfg, manifest


def test_all_stages_complete(finished_run):
    _, _, manifest = finished_run
    assert set(manifest["stages"]) == set(pipeline.STAGES)
    assert all(v["status"] == "done" for v in manifest["stages"].values())


def test_manifest_lists_every_artifact_with_hash(finished_run):
    _, cfg, manifest = finished_run
    listed = set()
    for stage in manifest["stages"].values():
        for name, digest in stage["outputs"].items():
            listed.add(name)
            blob = (cfg.out_dir / name).read_bytes()
            assert hashlib.sha256(blob).hexdigest() == digest
    on_disk = {p.name for p in cfg.out_dir.iterdir() if p.name != "manifest.json"}
    assert on_disk == listed


def test_eval_stage_isolation(finished_run):
    # re-running only eval rewrites the report and nothing else
    _, cfg, _ = finished_run
    before = {
        p.name: p.stat().st_mtime_ns for p in cfg.out_dir.iterdir()
        if p.name not in ("report.tsv", "means.json", "manifest.json")
    }
    pipeline.run(cfg, stages=["eval"])
    after = {p.name: p.stat().st_mtime_ns for p in cfg.out_dir.iterdir()}
    for name, mtime in before.items():
        assert after[name] == mtime, f"{name} was touched by the eval stage"


def test_skipped_stage_requires_upstream_artifacts(tmp_path):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    cfg = pipeline.validate_dict(raw)
    with pytest.raises(StageError, match="missing upstream"):
        pipeline.run(cfg, stages=["map"])
    manifest = json.loads((cfg.out_dir / "manifest.json").read_text())
    assert manifest["stages"]["map"]["status"] == "failed"


def test_identical_reruns_bitwise_identical(tmp_path):
    raw = _small_config(tmp_path / "data", tmp_path / "run")
    cfg = pipeline.validate_dict(raw)

    def run_fresh():
        shutil.rmtree(cfg.out_dir, ignore_errors=True)
        pipeline.run(cfg)
        return {
            p.name: p.read_bytes() for p in cfg.out_dir.iterdir()
        }

    first = run_fresh()
    second = run_fresh()
    assert first.keys() == second.keys()
    for name in first:
        assert first[name] == second[name], f"{name} differs between identical runs"


# ----------------------------------------------------------- ideographic path


@pytest.fixture()
def ideographic_setup(tmp_path):
    chars = "一二三四五六七八九十水火木金土山川日月田"
    strokes = {ch: "".join(
        "12345"[(i + j) % 5] for j in range(3 + i % 4))
        for i, ch in enumerate(chars)}
    data = tmp_path / "data"
    data.mkdir()
    (data / "strokes.tsv").write_text(
        "".join(f"{c}\t{s}\n" for c, s in strokes.items()), encoding="utf-8")
    # glyph lexicon: pretend the last two chars are simplified forms
    (data / "glyphs.tsv").write_text("田\t飞\n", encoding="utf-8")
    (data / "strokes.tsv").open("a", encoding="utf-8").write("飞\t12345\n")

    import numpy as np
    rng = np.random.default_rng(0)
    def sentences(n):
        return "\n".join(
            "".join(chars[i] for i in rng.integers(0, len(chars), 12)) for _ in range(n)
        )
    (data / "hist.txt").write_text(sentences(80), encoding="utf-8")
    (data / "modern.txt").write_text(sentences(80), encoding="utf-8")
    (data / "pairs.jsonl").write_text(
        "\n".join(json.dumps({"id": f"p{i}", "story": "一二三四五六七八九十",
                              "summary": "一二三"}, ensure_ascii=False) for i in range(4)),
        encoding="utf-8")
    (data / "decode.jsonl").write_text(
        json.dumps({"id": "t0", "story": "水火木金土山川日月田"}, ensure_ascii=False),
        encoding="utf-8")
    return {
        "profile": "ideographic",
        "enhancement": ["CONV"],
        "mapping_mode": "IdMap",
        "seed": 3,
        "out_dir": str(tmp_path / "run"),
        "paths": {
            "historical_corpus": str(data / "hist.txt"),
            "modern_corpus": str(data / "modern.txt"),
            "summ_pairs": str(data / "pairs.jsonl"),
            "decode_input": str(data / "decode.jsonl"),
            "stroke_table": str(data / "strokes.tsv"),
            "glyph_lexicon": str(data / "glyphs.tsv"),
        },
        "preprocess": {"min_sentence_units": 5},
        "embeddings": {"dim": 8, "buckets": 512, "epochs": 1, "n_min": 2, "n_max": 3,
                       "subsample_t": 0.0, "max_vocab": 100},
    }


def test_ideographic_conv_and_strokes(ideographic_setup, tmp_path):
    cfg = pipeline.validate_dict(ideographic_setup)
    pipeline.run(cfg, stages=["preprocess", "train-emb"])
    processed = (cfg.out_dir / "corpus_modern.txt").read_text(encoding="utf-8")
    # characters were re-tokenised with spaces and 田 converted via the lexicon
    assert " " in processed.splitlines()[0]
    assert "田" not in processed and "飞" in processed
    from crossera.embeddings import load_embeddings
    table = load_embeddings(cfg.out_dir / "modern.vec")
    assert all(len(tok) == 1 for tok in table.tokens)


# ------------------------------------------------------------------------ cli


def test_cli_stats_output(tmp_path, capsys):
    docs = tmp_path / "docs.jsonl"
    docs.write_text(json.dumps({"id": "a", "story": "w1 w2 w3 w4", "summary": "w1"}) + "\n",
                    encoding="utf-8")
    rc = cli.main(["stats", "--docs", str(docs), "--unit", "word"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "L_story        4.0" in out
    assert "CR             25.0%" in out


def test_cli_validation_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("profile: klingon\nout_dir: x\n", encoding="utf-8")
    rc = cli.main(["run", "--config", str(cfg)])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_cli_stage_failure_exit_code(tmp_path, capsys):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    rc = cli.main(["summarise", "--config", str(cfg_path), "--quiet"])
    assert rc == 2  # upstream artifacts are missing


def test_cli_run_single_stage_and_effective_config(tmp_path, capsys):
    raw = _small_config(tmp_path / "d", tmp_path / "o")
    cfg_path = tmp_path / "cfg.yaml"
    cfg_path.write_text(yaml.safe_dump(raw), encoding="utf-8")
    rc = cli.main(["preprocess", "--config", str(cfg_path)])
    out = capsys.readouterr().out
    assert rc == 0
    assert "effective configuration" in out
    assert (tmp_path / "o" / "corpus_hist.txt").exists()


def test_cli_eval_standalone(tmp_path, capsys):
    cands = tmp_path / "c.jsonl"
    refs = tmp_path / "r.jsonl"
    cands.write_text(json.dumps({"id": "1", "summary": "a b"}) + "\n", encoding="utf-8")
    refs.write_text(json.dumps({"id": "1", "text": "a b"}) + "\n", encoding="utf-8")
    rc = cli.main([
        "eval", "--candidates", str(cands),
        "--references", str(refs), "--unit", "word",
        "--report", str(tmp_path / "rep.tsv"), "--means", str(tmp_path / "m.json"),
    ])
    assert rc == 0
    assert "100.00" in capsys.readouterr().out
