"""Stratified splitting, cross-validated grid search and macro-averaged reports."""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

from . import models
from .rng import Xoshiro256

log = logging.getLogger(__name__)

CLASS_NAMES = {-1: "Negative", 0: "Neutral", 1: "Positive"}


class StratificationError(ValueError):
    pass


class FoldError(ValueError):
    pass


class GridSearchError(RuntimeError):
    def __init__(self, candidate: int, fold: int, params: Mapping[str, Any], cause: Exception):
        super().__init__(f"candidate {candidate} {dict(params)} failed on fold {fold}: {cause}")
        self.candidate, self.fold, self.params = candidate, fold, dict(params)


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray


def _class_members(y: np.ndarray) -> dict[Any, list[int]]:
    members: dict[Any, list[int]] = {}
    for i, label in enumerate(y.tolist()):
        members.setdefault(label, []).append(i)
    return dict(sorted(members.items()))


def stratified_split(y: Sequence, test_fraction: float = 0.2, seed: int = 42) -> SplitIndices:
    """Per-class shuffled holdout split.

    The total test size is ``round(test_fraction * n)``; it is shared out
    between classes by largest remainder (ties to the smaller label), so
    each class contributes within one row of its exact quota.
    """
    y = np.asarray(y)
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    members = _class_members(y)
    small = [c for c, rows in members.items() if len(rows) < 2]
    if small:
        raise StratificationError(f"classes with fewer than 2 members cannot be stratified: {small}")
    frac = Fraction(test_fraction)  # exact binary value, no decimal guessing
    total = math.floor(frac * len(y) + Fraction(1, 2))
    quotas = {c: frac * len(rows) for c, rows in members.items()}
    counts = {c: math.floor(q) for c, q in quotas.items()}
    leftover = total - sum(counts.values())
    by_remainder = sorted(members, key=lambda c: -(quotas[c] - counts[c]))  # stable: smaller label first
    for c in by_remainder[:leftover]:
        counts[c] += 1

    rng = Xoshiro256(seed)
    train, test = [], []
    for c, rows in members.items():
        rows = list(rows)
        rng.shuffle(rows)
        test.extend(rows[:counts[c]])
        train.extend(rows[counts[c]:])
    return SplitIndices(np.array(sorted(train), dtype=np.int64), np.array(sorted(test), dtype=np.int64))


def stratified_kfold(y: Sequence, k: int = 5, seed: int = 42) -> list[SplitIndices]:
    """Per-class shuffle, then deal rows round-robin into ``k`` folds.

    The dealing position carries over from one class to the next, which
    keeps fold sizes within one row of each other.
    """
    y = np.asarray(y)
    if k < 2:
        raise FoldError(f"k must be at least 2, got {k}")
    members = _class_members(y)
    small = {c: len(rows) for c, rows in members.items() if len(rows) < k}
    if small:
        raise FoldError(f"classes smaller than k={k}: {small}")
    rng = Xoshiro256(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    position = 0
    for rows in members.values():
        rows = list(rows)
        rng.shuffle(rows)
        for r in rows:
            fold_of[r] = position % k
            position += 1
    folds = []
    for f in range(k):
        folds.append(SplitIndices(np.flatnonzero(fold_of != f), np.flatnonzero(fold_of == f)))
    return folds


@dataclass
class ClassificationReport:
    labels: list
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    accuracy: float
    confusion: np.ndarray = field(repr=False)

    @property
    def macro_precision(self) -> float:
        return float(np.mean(self.precision))

    @property
    def macro_recall(self) -> float:
        return float(np.mean(self.recall))

    @property
    def macro_f1(self) -> float:
        return float(np.mean(self.f1))

    @property
    def weighted_f1(self) -> float:
        total = self.support.sum()
        return float((self.f1 * self.support).sum() / total) if total else 0.0

    def rows(self) -> list[tuple[str, float, float, float]]:
        """``(name, precision, recall, f1)`` per class, then the macro average."""
        out = [(class_name(lab), float(p), float(r), float(f))
               for lab, p, r, f in zip(self.labels, self.precision, self.recall, self.f1)]
        out.append(("macro avg", self.macro_precision, self.macro_recall, self.macro_f1))
        return out


def class_name(label) -> str:
    return CLASS_NAMES.get(label, str(label))


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros(len(num), dtype=np.float64)
    nz = den > 0
    out[nz] = num[nz] / den[nz]
    return out


def classification_report(y_true: Sequence, y_pred: Sequence, labels: Sequence | None = None) -> ClassificationReport:
    """Per-class precision/recall/F1 plus macro averages.

    Every class in ``labels`` is reported (and enters the macro means) even
    if it never occurs; undefined ratios are 0.
    """
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise models.ShapeError(f"y_true {y_true.shape} and y_pred {y_pred.shape} differ")
    labels = sorted(set(y_true.tolist()) | set(y_pred.tolist())) if labels is None else sorted(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    unknown = set(y_true.tolist()) - set(index) | set(y_pred.tolist()) - set(index)
    if unknown:
        raise ValueError(f"labels {sorted(unknown)} not in {labels}")
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true.tolist(), y_pred.tolist()):
        confusion[index[t], index[p]] += 1
    tp = np.diag(confusion).astype(np.float64)
    predicted = confusion.sum(axis=0).astype(np.float64)
    actual = confusion.sum(axis=1).astype(np.float64)
    precision = _safe_div(tp, predicted)
    recall = _safe_div(tp, actual)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    accuracy = float(tp.sum() / len(y_true)) if len(y_true) else 0.0
    return ClassificationReport(list(labels), precision, recall, f1, actual.astype(np.int64), accuracy, confusion)


def macro_f1(y_true, y_pred, labels=None) -> float:
    return classification_report(y_true, y_pred, labels).macro_f1


@dataclass(frozen=True)
class GridSpec:
    family: str
    params: dict[str, list]

    def candidates(self) -> list[dict[str, Any]]:
        """Row-major enumeration: the first parameter varies slowest."""
        names = list(self.params)
        return [dict(zip(names, combo)) for combo in itertools.product(*(self.params[n] for n in names))]

    def __len__(self) -> int:
        return math.prod(len(v) for v in self.params.values())


# default search spaces, one per family
DEFAULT_GRIDS = {
    "nb": GridSpec("nb", {"alpha": [0.00001, 0.0001, 0.001, 0.1, 1, 10, 100, 1000]}),
    "svm": GridSpec("svm", {"C": [0.1, 1, 10], "kernel": ["linear", "rbf", "poly"], "gamma": [0.01, 0.1, 0.5]}),
    "rf": GridSpec("rf", {"n_estimators": [100, 200], "max_depth": [20, 30],
                          "min_samples_split": [2, 5], "max_features": ["sqrt", "log2"]}),
}


def _score_job(args):
    index, family, params, X, y, folds, labels = args
    scores = []
    for f, split in enumerate(folds):
        try:
            model = models.fit(family, X[split.train], y[split.train], params)
            pred = model.predict(X[split.test])
        except Exception as exc:
            raise GridSearchError(index, f, params, exc) from exc
        scores.append(macro_f1(y[split.test], pred, labels))
    return index, float(np.mean(scores))


def grid_search(family: str, grid: GridSpec, X, y, k: int = 5, seed: int = 42,
                base_params: Mapping[str, Any] | None = None, n_jobs: int = 1):
    """Pick the candidate with the best mean Macro-F1 over stratified folds.

    Returns ``(best_params, scores)`` where ``scores[i]`` is the mean CV
    Macro-F1 of candidate ``i`` in :meth:`GridSpec.candidates` order. Ties
    keep the earliest candidate. ``base_params`` (e.g. a forest seed) are
    merged under every candidate.
    """
    candidates = grid.candidates()
    if not candidates:
        raise ValueError("empty grid")
    y = np.asarray(y)
    folds = stratified_kfold(y, k, seed)
    labels = sorted(set(y.tolist()))
    jobs = [(i, family, {**(base_params or {}), **c}, X, y, folds, labels) for i, c in enumerate(candidates)]
    scores = [0.0] * len(candidates)
    if n_jobs == 1:
        results = map(_score_job, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=None if n_jobs < 0 else n_jobs)
        results = pool.map(_score_job, jobs)
    try:
        for i, score in results:
            scores[i] = score
            log.info("%s candidate %d %s: mean CV macro-F1 %.4f", family, i, candidates[i], score)
    finally:
        if n_jobs != 1:
            pool.shutdown()
    best = 0
    for i in range(1, len(scores)):
        if scores[i] > scores[best]:
            best = i
    return {**(base_params or {}), **candidates[best]}, scores


def class_distribution(y: Sequence) -> dict[Any, tuple[int, float]]:
    """``label -> (count, fraction)`` in ascending label order."""
    y = list(np.asarray(y).tolist())
    if not y:
        return {}
    labels, counts = np.unique(y, return_counts=True)
    return {lab: (int(c), int(c) / len(y)) for lab, c in zip(labels.tolist(), counts.tolist())}


def format_distribution(dist: Mapping[Any, tuple[int, float]]) -> str:
    """One line per class, e.g. ``negative 21.3% (169)``."""
    return "".join(f"{class_name(lab).lower()} {100 * frac:.1f}% ({count})\n"
                   for lab, (count, frac) in dist.items())


def render_markdown(reports: Mapping[str, ClassificationReport]) -> str:
    """Comparison table: a header row per model, then class and macro rows."""
    lines = ["|  | precision | recall | f1-score |", "|---|---|---|---|"]
    for name, report in reports.items():
        lines.append(f"| {name} |  |  |  |")
        for row_name, p, r, f in report.rows():
            lines.append(f"| {row_name} | {p:.2f} | {r:.2f} | {f:.2f} |")
    return "\n".join(lines) + "\n"


def render_keyvalue(reports: Mapping[str, ClassificationReport]) -> str:
    """Flat ``model.class.metric=value`` lines at full precision."""
    out = []
    for model, report in reports.items():
        for row_name, p, r, f in report.rows():
            key = row_name.lower().replace(" ", "_")
            for metric, v in (("precision", p), ("recall", r), ("f1", f)):
                out.append(f"{model}.{key}.{metric}={v!r}")
    return "\n".join(out) + "\n"
