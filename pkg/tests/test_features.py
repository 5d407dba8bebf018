import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbsent.features import (EmptyVocabularyError, NounLemmatizer, TfidfVectorizer, TokenizerConfig,
                             Vocabulary, VocabularyFormatError, fit_vocabulary, lemmatize, ngrams,
                             stop_words, tokenize, transform)

WORDS = ["inflation", "rise", "fall", "policy", "policies", "rate", "rates", "growth", "the", "of",
         "pre-covid", "3.6", "2023", "Export", "exports", "risk", "risks", "Committee"]
corpora = st.lists(st.lists(st.sampled_from(WORDS), max_size=8).map(" ".join), min_size=1, max_size=8)


@pytest.mark.parametrize("text, tokens", [
    ("Headline inflation increased to 3.6 percent", ["headline", "inflation", "increased", "3.6", "percent"]),
    ("the a of", []),
    ("pre-COVID levels", ["pre-covid", "level"]),
    ("GDP grew 2.5% in 2023.", ["gdp", "grew", "2.5", "2023"]),
    ("", []),
])
def test_tokenize_examples(text, tokens):
    assert tokenize(text) == tokens


@pytest.mark.parametrize("token, lemma", [
    ("policies", "policy"), ("measures", "measure"), ("3.6", "3.6"), ("glasses", "glass"),
    ("boxes", "box"), ("branches", "branch"), ("wishes", "wish"), ("children", "child"),
    ("crises", "crisis"), ("increased", "increased"), ("policy", "policy"),
])
def test_lemmatize_examples(token, lemma):
    assert lemmatize(token) == lemma


def test_lemmatizer_rule_order_and_fallback():
    lem = NounLemmatizer({"city", "bus", "dog"}, {"mice": "mouse"})
    assert lem("cities") == "city"
    assert lem("buses") == "bus"  # ses -> s
    assert lem("dogs") == "dog"
    assert lem("mice") == "mouse"
    assert lem("cats") == "cats"  # no candidate in the lexicon


def test_stop_list_size():
    words = stop_words()
    assert len(words) == 318
    assert {"to", "the", "of"} <= words and all(w == w.lower() for w in words)


def test_custom_config_pluggable():
    config = TokenizerConfig(stop_words=frozenset(), lemmatizer=str.upper)
    assert tokenize("The rates", config) == ["THE", "RATES"]


def test_ngrams_after_pipeline():
    tokens = tokenize("raise the policy rate")
    assert "raise policy" in ngrams(tokens, 1, 3)
    assert ngrams(["a", "b", "c"], 2, 2) == {"a b", "b c"}


def test_vocabulary_example():
    vocab = fit_vocabulary(["inflation rise", "inflation fall"])
    assert vocab.terms == ["fall", "inflation", "inflation fall", "inflation rise", "rise"]
    assert {t: vocab.df(t) for t in vocab.terms} == {
        "fall": 1, "inflation": 2, "inflation fall": 1, "inflation rise": 1, "rise": 1}
    assert vocab.corpus_size == 2


def test_vocabulary_singletons():
    vocab = fit_vocabulary(["inflation"])
    assert vocab.terms == ["inflation"] and vocab.df("inflation") == 1 and vocab.corpus_size == 1
    vocab = fit_vocabulary(["growth", "growth"])
    assert vocab.terms == ["growth"] and vocab.df("growth") == 2 and vocab.corpus_size == 2


def test_vocabulary_errors():
    with pytest.raises(EmptyVocabularyError):
        fit_vocabulary([])
    with pytest.raises(EmptyVocabularyError):
        fit_vocabulary(["the of", "a"])
    with pytest.raises(ValueError):
        fit_vocabulary(["x"], ngram_range=(2, 1))


def test_tfidf_hand_example():
    corpus = ["inflation rise", "inflation fall"]
    vocab = fit_vocabulary(corpus)
    row = transform(corpus, vocab).toarray()[0]
    idf_rare = math.log(2 / 1) + 1
    raw = {"inflation": 1.0, "rise": idf_rare, "inflation rise": idf_rare}
    norm = math.sqrt(sum(v * v for v in raw.values()))
    assert round(idf_rare, 4) == 1.6931 and round(norm, 4) == 2.5949
    for term, weight in raw.items():
        assert row[vocab.term_to_index[term]] == pytest.approx(weight / norm, abs=1e-12)
    assert [round(row[vocab.term_to_index[t]], 4) for t in ("inflation", "rise", "inflation rise")] == \
        [0.3854, 0.6525, 0.6525]
    assert row[vocab.term_to_index["fall"]] == 0.0


def test_out_of_vocabulary_row_is_zero():
    vocab = fit_vocabulary(["inflation rise"])
    X = transform(["completely unrelated words"], vocab)
    assert X.nnz == 0 and X.shape == (1, len(vocab))


def test_single_document_idf_is_one():
    vocab = fit_vocabulary(["growth rate"])
    assert np.all(vocab.idf == 1.0)
    row = transform(["growth rate"], vocab).toarray()[0]
    assert np.allclose(row, 1 / math.sqrt(3))


@settings(max_examples=200)
@given(corpora)
def test_row_norms(texts):
    try:
        vocab = fit_vocabulary(texts)
    except EmptyVocabularyError:
        return
    X = transform(texts, vocab)
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    nonzero = np.diff(X.indptr) > 0
    assert np.all(np.abs(norms[nonzero] - 1) < 1e-9)
    assert np.all(norms[~nonzero] == 0)
    for i in range(X.shape[0]):
        cols = X.indices[X.indptr[i]:X.indptr[i + 1]]
        assert np.all(np.diff(cols) > 0)


@given(corpora)
def test_presence_matches_df(texts):
    try:
        vocab = fit_vocabulary(texts)
    except EmptyVocabularyError:
        return
    X = transform(texts, vocab).tocsc()
    assert np.array_equal(np.diff(X.indptr), vocab.document_frequency)
    assert np.all(X.data > 0)
    assert np.all((1 <= vocab.document_frequency) & (vocab.document_frequency <= len(texts)))
    lengths = {t.count(" ") + 1 for t in vocab.terms}
    assert lengths <= {1, 2, 3}
    assert vocab.terms == sorted(vocab.terms)


@given(st.lists(st.sampled_from(WORDS), max_size=10), st.lists(st.sampled_from([" ", "  ", "\t", "\n "]), min_size=10, max_size=10))
def test_whitespace_invariance(words, gaps):
    plain = " ".join(words)
    spaced = "".join(w + g for w, g in zip(words, gaps))
    vocab = fit_vocabulary(WORDS)
    assert (transform([plain], vocab) != transform([spaced], vocab)).nnz == 0


@given(st.text(max_size=40))
def test_tokenize_lowercase_idempotent(text):
    assert tokenize(text.lower()) == tokenize(text)


@given(corpora)
def test_vocabulary_file_round_trip(texts):
    try:
        vocab = fit_vocabulary(texts)
    except EmptyVocabularyError:
        return
    again = Vocabulary.loads(vocab.dumps())
    assert again.term_to_index == vocab.term_to_index
    assert np.array_equal(again.document_frequency, vocab.document_frequency)
    assert (again.corpus_size, again.ngram_min, again.ngram_max) == (vocab.corpus_size, 1, max(
        t.count(" ") + 1 for t in vocab.terms))
    assert again.dumps() == vocab.dumps()


def test_vocabulary_save_load(tmp_path):
    vocab = fit_vocabulary(["inflation rise", "inflation fall"])
    vocab.save(tmp_path / "v.tsv")
    text = (tmp_path / "v.tsv").read_text(encoding="utf-8")
    assert text.splitlines()[0] == "cbsent-vocab v1 N=2"
    assert "inflation\t1\t2" in text.splitlines()
    assert Vocabulary.load(tmp_path / "v.tsv").term_to_index == vocab.term_to_index


@pytest.mark.parametrize("text, message", [
    ("nonsense\n", "header"),
    ("cbsent-vocab v2 N=1\nx\t0\t1\n", "version"),
    ("cbsent-vocab v1 N=1\nx\t0\n", "line 2"),
    ("cbsent-vocab v1 N=1\nx\t1\t1\n", "indices"),
])
def test_vocabulary_format_errors(text, message):
    with pytest.raises(VocabularyFormatError, match=message):
        Vocabulary.loads(text)


def test_vectorizer_fits_on_train_only():
    vec = TfidfVectorizer().fit(["inflation rise"])
    before = vec.vocabulary_.dumps()
    vec.transform(["inflation fall", "new words entirely"])
    assert vec.vocabulary_.dumps() == before
    with pytest.raises(RuntimeError):
        TfidfVectorizer().transform(["x"])
