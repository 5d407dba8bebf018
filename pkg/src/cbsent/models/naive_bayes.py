"""Multinomial Naive Bayes with additive (Laplace/Lidstone) smoothing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._common import ParameterError, check_fit_inputs, check_predict_inputs


@dataclass(frozen=True)
class NBParams:
    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")


@dataclass
class NBModel:
    labels: np.ndarray
    log_prior: np.ndarray  # (n_classes,)
    log_likelihood: np.ndarray  # (n_classes, n_features)
    alpha: float

    family = "nb"

    @property
    def n_features(self) -> int:
        return self.log_likelihood.shape[1]

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = check_predict_inputs(X, self.n_features)
        return np.asarray(X @ self.log_likelihood.T) + self.log_prior

    def predict(self, X) -> np.ndarray:
        # argmax returns the first maximum, i.e. the smallest label on ties
        return self.labels[np.argmax(self.joint_log_likelihood(X), axis=1)]


def nb_fit(X, y, params: NBParams = NBParams()) -> NBModel:
    """Fit class priors and smoothed per-class feature distributions.

    Feature values may be fractional (TF-IDF weights); they are summed per
    class exactly as counts would be.
    """
    X, y, labels, y_index = check_fit_inputs(X, y)
    n_classes = len(labels)
    onehot = np.zeros((len(y), n_classes))
    onehot[np.arange(len(y)), y_index] = 1.0
    class_sums = np.asarray(X.T @ onehot).T  # (n_classes, n_features)
    smoothed = class_sums + params.alpha
    log_likelihood = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    class_count = onehot.sum(axis=0)
    log_prior = np.log(class_count) - np.log(len(y))
    return NBModel(labels, log_prior, log_likelihood, float(params.alpha))


def nb_predict(model: NBModel, X) -> np.ndarray:
    return model.predict(X)
