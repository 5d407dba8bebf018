"""From-scratch classifiers sharing a ``fit``/``predict`` contract."""

from __future__ import annotations

from typing import Any, Mapping, Union

from ._common import FitError, ModelError, ParameterError, ShapeError
from .forest import RFModel, RFParams, rf_fit, rf_predict
from .naive_bayes import NBModel, NBParams, nb_fit, nb_predict
from .persist import IncompatibleVersionError, ModelFormatError, load_model, save_model
from .svm import SVMModel, SVMParams, kernel_eval, kernel_matrix, svm_fit, svm_predict

TrainedModel = Union[NBModel, SVMModel, RFModel]

FAMILIES = {
    "nb": (NBParams, nb_fit),
    "svm": (SVMParams, svm_fit),
    "rf": (RFParams, rf_fit),
}
FAMILY_NAMES = {"rf": "Random Forest", "svm": "SVM", "nb": "Naive Bayes"}


def make_params(family: str, params: Mapping[str, Any]):
    try:
        cls, _ = FAMILIES[family]
    except KeyError:
        raise ParameterError(f"unknown model family {family!r}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ParameterError(f"{family}: {exc}") from None


def fit(family: str, X, y, params: Mapping[str, Any] | None = None) -> TrainedModel:
    """Fit a model of ``family`` ("nb", "svm" or "rf") with keyword params."""
    p = make_params(family, params or {})
    return FAMILIES[family][1](X, y, p)


__all__ = [
    "FAMILIES", "FAMILY_NAMES", "FitError", "IncompatibleVersionError", "ModelError",
    "ModelFormatError", "NBModel", "NBParams", "ParameterError", "RFModel", "RFParams",
    "SVMModel", "SVMParams", "ShapeError", "TrainedModel", "fit", "kernel_eval",
    "kernel_matrix", "load_model", "make_params", "nb_fit", "nb_predict", "rf_fit",
    "rf_predict", "save_model", "svm_fit", "svm_predict",
]
