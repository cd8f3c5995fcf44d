import numpy as np
import pytest

from crossera.embeddings import (
    EmbeddingModel,
    FeatureScheme,
    MissingStrokeWarning,
    Vocab,
    build_vocab,
    char_ngram_scheme,
    feature_grams,
    featurize,
    load_embeddings,
    load_stroke_table,
    save_embeddings,
    stroke_ngram_scheme,
)
from crossera.embeddings.features import hash_feature
from crossera.embeddings.trainer import build_token_features
from crossera.errors import EmptyInputError, ParseError, ValidationError


# --------------------------------------------------------------------- vocab


def test_build_vocab_counts():
    vocab = build_vocab(iter(["a", "a", "b"]))
    assert vocab.tokens == ("a", "b")
    assert vocab.counts == (2, 1)
    assert vocab.id_of == {"a": 0, "b": 1}


def test_build_vocab_min_count():
    vocab = build_vocab(["a", "a", "b"], min_count=2)
    assert vocab.tokens == ("a",)


def test_build_vocab_truncates_to_most_frequent():
    # 60,001 distinct tokens; the most frequent 50,000 survive
    stream = []
    for i in range(60_001):
        stream.extend([f"t{i}"] * (2 if i < 50_000 else 1))
    vocab = build_vocab(stream, min_count=1, max_size=50_000)
    assert len(vocab) == 50_000
    assert "t0" in vocab and "t59999" not in vocab


def test_build_vocab_ties_broken_by_first_occurrence():
    vocab = build_vocab(["b", "a", "b", "a", "c"], max_size=2)
    assert vocab.tokens == ("b", "a")


def test_build_vocab_empty_rejected():
    with pytest.raises(EmptyInputError):
        build_vocab([])


# ------------------------------------------------------------------ featurize


def test_char_ngrams_with_boundaries():
    scheme = char_ngram_scheme(3, 3, bucket_count=1000)
    grams = feature_grams("wort", scheme)
    assert grams == ["<wo", "wor", "ort", "rt>", "<wort>"]
    ids = featurize("wort", scheme)
    assert ids == [hash_feature(g, 1000) for g in grams]
    assert all(0 <= i < 1000 for i in ids)


def test_char_ngrams_short_token_no_duplicate_whole_form():
    # "<ab>" has length 4, inside [3, 6]: it already appears as an n-gram
    scheme = char_ngram_scheme(3, 6, bucket_count=1000)
    grams = feature_grams("ab", scheme)
    assert grams.count("<ab>") == 1


def test_stroke_ngrams():
    scheme = stroke_ngram_scheme({"大": "134"}, n_min=2, n_max=2, bucket_count=100)
    assert feature_grams("大", scheme) == ["13", "34"]


def test_stroke_ngrams_concatenate_characters():
    scheme = stroke_ngram_scheme({"大": "134", "一": "1"}, n_min=3, n_max=4, bucket_count=100)
    assert feature_grams("大一", scheme) == ["134", "341", "1341"]


def test_stroke_missing_character_warns_not_fails():
    scheme = stroke_ngram_scheme({"大": "134"}, n_min=2, n_max=2, bucket_count=100)
    with pytest.warns(MissingStrokeWarning):
        grams = feature_grams("大卡", scheme)
    assert grams == ["13", "34"]


def test_scheme_none_gives_no_features():
    scheme = FeatureScheme(kind="none", n_min=1, n_max=1, bucket_count=1)
    assert featurize("anything", scheme) == []


def test_scheme_validation():
    with pytest.raises(ValidationError):
        FeatureScheme(kind="stroke-ngram", n_min=2, n_max=2, bucket_count=10)
    with pytest.raises(ValidationError):
        FeatureScheme(kind="char-ngram", n_min=3, n_max=2, bucket_count=10)
    with pytest.raises(ValidationError):
        FeatureScheme(kind="char-ngram", n_min=3, n_max=6, bucket_count=10,
                      stroke_table={"a": "1"})


def test_featurize_deterministic():
    scheme = char_ngram_scheme(3, 6, bucket_count=2_000_000)
    assert featurize("Frieden", scheme) == featurize("Frieden", scheme)


def test_stroke_table_loader(tmp_path):
    path = tmp_path / "strokes.tsv"
    path.write_text("大\t134\n一\t1\n", encoding="utf-8")
    assert load_stroke_table(path) == {"大": "134", "一": "1"}
    bad = tmp_path / "bad.tsv"
    bad.write_text("大\t967\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_stroke_table(bad)


# ------------------------------------------------------------------- compose


def _tiny_model(scheme, vocab_tokens=("a", "b"), dim=4, seed=0):
    rng = np.random.default_rng(seed)
    vocab = Vocab(tokens=vocab_tokens, counts=tuple([2] * len(vocab_tokens)))
    offsets, ids = build_token_features(vocab, scheme)
    buckets = scheme.bucket_count if scheme.active else 1
    return EmbeddingModel(
        vocab=vocab, dim=dim,
        word_vectors=rng.standard_normal((len(vocab), dim)),
        context_vectors=rng.standard_normal((len(vocab), dim)),
        feature_vectors=rng.standard_normal((buckets, dim)) if scheme.active
        else np.zeros((1, dim)),
        scheme=scheme, feature_offsets=offsets, feature_ids=ids,
    )


def test_compose_scheme_none_is_word_vector():
    scheme = FeatureScheme(kind="none", n_min=1, n_max=1, bucket_count=1)
    model = _tiny_model(scheme)
    np.testing.assert_array_equal(model.compose("a"), model.word_vectors[0])
    assert not model.is_oov("a")


def test_compose_oov_scheme_none_zero_and_flagged():
    scheme = FeatureScheme(kind="none", n_min=1, n_max=1, bucket_count=1)
    model = _tiny_model(scheme)
    np.testing.assert_array_equal(model.compose("zzz"), np.zeros(4))
    assert model.is_oov("zzz")


def test_compose_in_vocab_adds_feature_mean():
    scheme = char_ngram_scheme(3, 3, bucket_count=50)
    model = _tiny_model(scheme, vocab_tokens=("wort", "berg"))
    feats = featurize("wort", scheme)
    expected = model.word_vectors[0] + model.feature_vectors[feats].sum(axis=0) / len(feats)
    np.testing.assert_allclose(model.compose("wort"), expected, rtol=1e-12)


def test_compose_oov_with_features_is_feature_mean():
    # a vocabulary-pruned surface form still composes from its n-grams alone
    scheme = char_ngram_scheme(3, 3, bucket_count=50)
    model = _tiny_model(scheme, vocab_tokens=("wort", "berg"))
    feats = featurize("tal", scheme)
    expected = model.feature_vectors[feats].sum(axis=0) / len(feats)
    np.testing.assert_allclose(model.compose("tal"), expected, rtol=1e-12)
    assert not model.is_oov("tal")


# ----------------------------------------------------------------- save/load


def test_save_load_roundtrip(tmp_path):
    scheme = char_ngram_scheme(3, 3, bucket_count=64)
    model = _tiny_model(scheme, vocab_tokens=("wort", "berg", "tal"), dim=5)
    path = tmp_path / "vectors.vec"
    save_embeddings(model, path)
    table = load_embeddings(path)
    assert table.tokens == ("wort", "berg", "tal")
    composed = np.stack([model.compose(t) for t in table.tokens])
    assert np.abs(table.vectors - composed).max() <= 1e-5


def test_load_arity_mismatch(tmp_path):
    path = tmp_path / "bad.vec"
    path.write_text("2 3\na 1 2 3\nb 1 2 3 4\n", encoding="utf-8")
    with pytest.raises(ParseError) as err:
        load_embeddings(path)
    assert err.value.line == 3


def test_load_empty_table(tmp_path):
    path = tmp_path / "empty.vec"
    path.write_text("0 0\n", encoding="utf-8")
    table = load_embeddings(path)
    assert len(table) == 0


def test_load_bad_header(tmp_path):
    path = tmp_path / "bad.vec"
    path.write_text("3\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_embeddings(path)
