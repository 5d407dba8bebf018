from __future__ import annotations

import numpy as np
import scipy.sparse as sp


class ModelError(ValueError):
    pass


class FitError(ModelError):
    pass


class ParameterError(ModelError):
    pass


class ShapeError(ModelError):
    pass


def as_matrix(X):
    """Return ``X`` as CSR if sparse, else as a 2-D float64 array."""
    if sp.issparse(X):
        return sp.csr_matrix(X, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError(f"expected a 2-D feature matrix, got {X.ndim}-D")
    return X


def as_dense(X) -> np.ndarray:
    X = as_matrix(X)
    return X.toarray() if sp.issparse(X) else X


def check_fit_inputs(X, y):
    """Validate a training set; returns ``(X, y, labels, y_index)``.

    ``labels`` are the distinct classes ascending and ``y_index`` maps each
    row to its position in ``labels``.
    """
    X = as_matrix(X)
    y = np.asarray(y)
    if y.ndim != 1 or X.shape[0] != len(y):
        raise ShapeError(f"X has {X.shape[0]} rows but y has shape {y.shape}")
    labels, y_index = np.unique(y, return_inverse=True)
    if len(labels) < 2:
        raise FitError(f"need at least 2 distinct classes, got {labels.tolist()}")
    return X, y, labels, y_index


def check_predict_inputs(X, n_features: int):
    X = as_matrix(X)
    if X.shape[1] != n_features:
        raise ShapeError(f"model expects {n_features} features, got {X.shape[1]}")
    return X
