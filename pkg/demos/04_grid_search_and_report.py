"""Hyperparameter selection by stratified cross-validation, then a report.

Each grid candidate is scored by mean macro-F1 over stratified folds of
the training rows only; the best candidate is refitted on all training
rows and evaluated once on the held-out rows.
"""
import logging

import numpy as np

from cbsent import evaluation, features, models
from cbsent.evaluation import GridSpec
from cbsent.synthetic import generate_corpus

logging.basicConfig(level=logging.INFO, format="%(message)s")

records = generate_corpus(300, seed=1)
texts = [r.text for r in records]
y = np.array([r.sentiment for r in records])
split = evaluation.stratified_split(y, 0.2, seed=42)
vec = features.TfidfVectorizer().fit([texts[i] for i in split.train])
X_train = vec.transform([texts[i] for i in split.train])
X_test = vec.transform([texts[i] for i in split.test])

grids = {
    "rf": GridSpec("rf", {"n_estimators": [25], "max_depth": [5, 20]}),
    "svm": GridSpec("svm", {"C": [0.1, 10], "kernel": ["linear", "rbf"], "gamma": [0.1]}),
    "nb": evaluation.DEFAULT_GRIDS["nb"],
}
reports = {}
for family, grid in grids.items():
    best, scores = evaluation.grid_search(family, grid, X_train, y[split.train], k=5, seed=42,
                                          base_params={"seed": 42} if family == "rf" else None)
    print(family, "best", best, "cv", round(max(scores), 3))
    model = models.fit(family, X_train, y[split.train], best)
    reports[models.FAMILY_NAMES[family]] = evaluation.classification_report(
        y[split.test], model.predict(X_test), [-1, 0, 1])

print(evaluation.render_markdown(reports))
