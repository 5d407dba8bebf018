"""Fitting the three classifier families on a synthetic corpus.

The generator builds template sentences whose predicate carries the label
(-1 negative, 0 neutral, 1 positive). Each model is fitted on the training
rows and scored on the held-out rows.
"""
import time

import numpy as np

from cbsent import evaluation, features, models
from cbsent.models.persist import dumps_model, loads_model
from cbsent.synthetic import generate_corpus

records = generate_corpus(400, seed=0)
texts = [r.text for r in records]
y = np.array([r.sentiment for r in records])
print(evaluation.format_distribution(evaluation.class_distribution(y)))

split = evaluation.stratified_split(y, 0.2, seed=42)
vec = features.TfidfVectorizer().fit([texts[i] for i in split.train])
X_train = vec.transform([texts[i] for i in split.train])
X_test = vec.transform([texts[i] for i in split.test])
print("train", X_train.shape, "test", X_test.shape)

settings = {
    "nb": {"alpha": 0.1},
    "svm": {"C": 1, "kernel": "linear"},
    "rf": {"n_estimators": 50, "max_depth": 20, "seed": 42},
}
for family, params in settings.items():
    start = time.perf_counter()
    model = models.fit(family, X_train, y[split.train], params)
    pred = model.predict(X_test)
    report = evaluation.classification_report(y[split.test], pred, [-1, 0, 1])
    print(f"{models.FAMILY_NAMES[family]:<14} macro-F1 {report.macro_f1:.3f}  ({time.perf_counter() - start:.1f}s)")

# Trained models are text files and reload to the same predictions.
text = dumps_model(model)
print(text.splitlines()[0])
assert (loads_model(text).predict(X_test) == pred).all()
