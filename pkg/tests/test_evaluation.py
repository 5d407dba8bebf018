import math
import random
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbsent import evaluation, features
from cbsent.evaluation import (DEFAULT_GRIDS, FoldError, GridSearchError, GridSpec, StratificationError,
                               class_distribution, classification_report, format_distribution, grid_search,
                               render_keyvalue, render_markdown, stratified_kfold, stratified_split)
from cbsent.synthetic import class_counts, generate_corpus

import oracles


def labels_with_counts(counts):
    y = [c for c, n in counts.items() for _ in range(n)]
    random.Random(0).shuffle(y)
    return np.array(y)


# -- splitting ---------------------------------------------------------------

def test_split_794():
    y = labels_with_counts({-1: 169, 0: 307, 1: 318})
    split = stratified_split(y, 0.2, 42)
    assert (len(split.train), len(split.test)) == (635, 159)


def test_split_ten_balanced():
    y = np.array([0] * 5 + [1] * 5)
    split = stratified_split(y, 0.2, 1)
    assert sorted(y[split.test].tolist()) == [0, 1]


@settings(max_examples=200)
@given(st.dictionaries(st.integers(-3, 3), st.integers(2, 40), min_size=1, max_size=4),
       st.floats(0.05, 0.95), st.integers(0, 2**32))
def test_split_contract(counts, fraction, seed):
    y = labels_with_counts(counts)
    split = stratified_split(y, fraction, seed)
    n = len(y)
    assert len(split.test) == math.floor(Fraction(fraction) * n + Fraction(1, 2))
    assert sorted(split.train.tolist() + split.test.tolist()) == list(range(n))
    test_counts = Counter(y[split.test].tolist())
    for c, size in counts.items():
        assert abs(test_counts[c] - fraction * size) <= 1
        assert abs(test_counts[c] / size - fraction) <= 1 / size
    again = stratified_split(y, fraction, seed)
    assert np.array_equal(again.test, split.test)


def test_split_errors():
    with pytest.raises(StratificationError):
        stratified_split([0, 0, 0, 1], 0.5, 0)
    with pytest.raises(ValueError):
        stratified_split([0, 0, 1, 1], 1.0, 0)


def test_kfold_ten_rows():
    y = np.array([0] * 5 + [1] * 5)
    for fold in stratified_kfold(y, 5, 3):
        assert sorted(y[fold.test].tolist()) == [0, 1]


def test_kfold_k2_four_rows():
    folds = stratified_kfold(np.array([0, 1, 0, 1]), 2, 0)
    assert [sorted(np.array([0, 1, 0, 1])[f.test].tolist()) for f in folds] == [[0, 1], [0, 1]]


@settings(max_examples=200)
@given(st.dictionaries(st.integers(-2, 2), st.integers(5, 30), min_size=2, max_size=4),
       st.integers(2, 5), st.integers(0, 2**32))
def test_kfold_partition_and_oracle(counts, k, seed):
    y = labels_with_counts(counts)
    folds = stratified_kfold(y, k, seed)
    tests = [f.test.tolist() for f in folds]
    assert sorted(sum(tests, [])) == list(range(len(y)))
    sizes = [len(t) for t in tests]
    assert max(sizes) - min(sizes) <= 1
    for f in folds:
        assert sorted(f.train.tolist() + f.test.tolist()) == list(range(len(y)))
    expected = oracles.kfold_assignment(y.tolist(), k, seed)
    assert [[i for i in range(len(y)) if expected[i] == f] for f in range(k)] == tests


def test_kfold_errors():
    with pytest.raises(FoldError):
        stratified_kfold([0, 0, 1, 1], 1, 0)
    with pytest.raises(FoldError):
        stratified_kfold([0, 0, 0, 1, 1], 3, 0)


# -- metrics -----------------------------------------------------------------

def assert_report_matches_oracle(y_true, y_pred, labels):
    report = classification_report(y_true, y_pred, labels)
    rows, macro = oracles.confusion_metrics(y_true, y_pred, labels)
    assert [(p, r, f) for p, r, f in zip(report.precision.tolist(), report.recall.tolist(), report.f1.tolist())] == rows
    assert (report.macro_precision, report.macro_recall, report.macro_f1) == macro


@settings(max_examples=300)
@given(st.lists(st.tuples(st.sampled_from([-1, 0, 1]), st.sampled_from([-1, 0, 1])), max_size=50))
def test_report_matches_confusion_oracle(pairs):
    y_true = [t for t, _ in pairs]
    y_pred = [p for _, p in pairs]
    assert_report_matches_oracle(y_true, y_pred, [-1, 0, 1])


@given(st.lists(st.tuples(st.sampled_from([-1, 0, 1]), st.sampled_from([-1, 0, 1])), min_size=1, max_size=50),
       st.randoms())
def test_report_permutation_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    a = classification_report([t for t, _ in pairs], [p for _, p in pairs], [-1, 0, 1])
    b = classification_report([t for t, _ in shuffled], [p for _, p in shuffled], [-1, 0, 1])
    assert a.rows() == b.rows()


def test_report_examples():
    r = classification_report([1, 1, 0], [1, 0, 0], [0, 1])
    assert r.precision.tolist() == [0.5, 1.0] and r.recall.tolist() == [1.0, 0.5]
    assert np.round(r.f1, 4).tolist() == [0.6667, 0.6667] and round(r.macro_f1, 4) == 0.6667
    perfect = classification_report([0, 1, -1], [0, 1, -1])
    assert all(v == 1.0 for row in perfect.rows() for v in row[1:])
    degenerate = classification_report([1, 1], [0, 0], [0, 1])
    assert degenerate.precision[1] == 0.0 and degenerate.recall[1] == 0.0
    absent = classification_report([0, 0], [0, 0], [-1, 0, 1])
    assert absent.macro_f1 == pytest.approx(1 / 3)


def test_report_shape_errors():
    with pytest.raises(ValueError):
        classification_report([1, 0], [1])
    with pytest.raises(ValueError, match="not in"):
        classification_report([1, 2], [1, 1], [0, 1])


# -- grid search -------------------------------------------------------------

@pytest.fixture(scope="module")
def small_corpus():
    records = generate_corpus(90, seed=5)
    texts = [r.text for r in records]
    y = np.array([r.sentiment for r in records])
    X = features.TfidfVectorizer().fit_transform(texts)
    return X, y


def test_grid_enumeration_row_major():
    grid = GridSpec("svm", {"C": [1, 10], "kernel": ["linear", "rbf"]})
    assert grid.candidates() == [{"C": 1, "kernel": "linear"}, {"C": 1, "kernel": "rbf"},
                                 {"C": 10, "kernel": "linear"}, {"C": 10, "kernel": "rbf"}]
    assert len(grid) == 4


def test_default_grids():
    assert DEFAULT_GRIDS["nb"].params == {"alpha": [0.00001, 0.0001, 0.001, 0.1, 1, 10, 100, 1000]}
    assert len(DEFAULT_GRIDS["svm"]) == 27 and len(DEFAULT_GRIDS["rf"]) == 16


@pytest.mark.parametrize("family, params, base", [
    ("nb", {"alpha": [1000, 0.1, 1e-5, 10]}, None),
    ("nb", {"alpha": [1.0, 1.0]}, None),  # exact tie: earliest wins
    ("svm", {"C": [0.1, 10], "kernel": ["linear", "rbf"], "gamma": [0.5]}, None),
    ("rf", {"n_estimators": [3], "max_depth": [1, 4], "max_features": ["sqrt", "log2"]}, {"seed": 3}),
    ("rf", {"n_estimators": [2], "min_samples_split": [2, 2]}, {"seed": 1}),
])
def test_grid_search_matches_exhaustive_cv(small_corpus, family, params, base):
    X, y = small_corpus
    grid = GridSpec(family, params)
    best, scores = grid_search(family, grid, X, y, k=3, seed=11, base_params=base)
    means, winner = oracles.exhaustive_cv(family, grid.candidates(), X, y, 3, 11, base)
    assert np.allclose(scores, means, rtol=0, atol=1e-12)
    assert best == {**(base or {}), **grid.candidates()[winner]}


def test_grid_search_tie_keeps_earliest(small_corpus):
    X, y = small_corpus
    grid = GridSpec("nb", {"alpha": [5.0, 5.0, 5.0]})
    best, scores = grid_search("nb", grid, X, y, k=3, seed=0)
    assert scores[0] == scores[1] == scores[2] and best == {"alpha": 5.0}


def test_grid_search_parallel_identical(small_corpus):
    X, y = small_corpus
    grid = GridSpec("nb", {"alpha": [0.001, 0.1, 10]})
    assert grid_search("nb", grid, X, y, 3, 2) == grid_search("nb", grid, X, y, 3, 2, n_jobs=2)


def test_grid_search_error_names_candidate_and_fold(small_corpus):
    X, y = small_corpus
    y = y.copy()
    with pytest.raises(GridSearchError) as info:
        grid_search("nb", GridSpec("nb", {"alpha": [1, -1]}), X, y, 3, 0)
    assert info.value.candidate == 1 and info.value.fold == 0


def test_grid_search_logs_each_candidate(small_corpus, caplog):
    X, y = small_corpus
    with caplog.at_level("INFO", logger="cbsent.evaluation"):
        grid_search("nb", GridSpec("nb", {"alpha": [0.1, 1]}), X, y, 3, 0)
    assert sum("candidate" in rec.message for rec in caplog.records) == 2


# -- distribution and rendering ----------------------------------------------

def test_distribution_794():
    y = labels_with_counts({-1: 169, 0: 307, 1: 318})
    dist = class_distribution(y)
    assert dist[-1][0] == 169 and round(100 * dist[-1][1], 1) == 21.3
    assert format_distribution(dist).splitlines()[0] == "negative 21.3% (169)"
    assert sum(frac for _, frac in dist.values()) == pytest.approx(1, abs=1e-12)


def test_distribution_trivial():
    assert class_distribution([]) == {}
    assert format_distribution(class_distribution([1, 1])) == "positive 100.0% (2)\n"


def test_render_layout():
    report = classification_report([1, 1, 0, -1], [1, 0, 0, -1], [-1, 0, 1])
    md = render_markdown({"Naive Bayes": report})
    lines = md.splitlines()
    assert lines[0] == "|  | precision | recall | f1-score |"
    assert lines[2] == "| Naive Bayes |  |  |  |"
    assert [l.split("|")[1].strip() for l in lines[3:]] == ["Negative", "Neutral", "Positive", "macro avg"]
    assert lines[4] == "| Neutral | 0.50 | 1.00 | 0.67 |"
    kv = render_keyvalue({"NB": report}).splitlines()
    assert "NB.neutral.precision=0.5" in kv and "NB.macro_avg.f1=" + repr(report.macro_f1) in kv
    assert len(kv) == 12


def test_class_counts_sum():
    assert sum(class_counts(794).values()) == 794
    assert class_counts(794)[-1] == 169
