"""Soft-margin kernel SVM trained by SMO, one-vs-one for multiclass.

Each binary machine solves the dual

    min  1/2 a^T Q a - e^T a    s.t.  0 <= a_i <= C,  y^T a = 0

with ``Q_ij = y_i y_j K(x_i, x_j)``, using second-order working-set
selection (Fan, Chen & Lin, 2005). Training stops once the maximal KKT
violation drops below ``tolerance`` or the iteration cap is hit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from ._common import ParameterError, check_fit_inputs, check_predict_inputs

log = logging.getLogger(__name__)

KERNELS = ("linear", "rbf", "poly")
TAU = 1e-12


@dataclass(frozen=True)
class SVMParams:
    C: float = 1.0
    kernel: str = "rbf"
    gamma: float = 0.1
    degree: int = 3
    coef0: float = 0.0
    tolerance: float = 1e-3
    # per-machine SMO iteration cap; None means 10 * n_samples
    max_iter: int | None = None
    # accepted for configuration compatibility; only False is supported
    probability: bool = False

    def __post_init__(self):
        if self.probability:
            raise ParameterError("probability estimates are not implemented; predict returns labels only")
        if self.kernel not in KERNELS:
            raise ParameterError(f"unknown kernel {self.kernel!r}; expected one of {KERNELS}")
        if not self.C > 0:
            raise ParameterError(f"C must be positive, got {self.C}")
        if self.kernel != "linear" and not self.gamma > 0:
            raise ParameterError(f"gamma must be positive for the {self.kernel} kernel")
        if not self.tolerance > 0:
            raise ParameterError("tolerance must be positive")
        if self.degree < 1:
            raise ParameterError("degree must be at least 1")


def _rowwise_sq_norms(A) -> np.ndarray:
    if sp.issparse(A):
        return np.asarray(A.multiply(A).sum(axis=1)).ravel()
    return np.einsum("ij,ij->i", A, A)


def kernel_matrix(kind: str, A, B, gamma: float = 0.1, degree: int = 3, coef0: float = 0.0) -> np.ndarray:
    """Gram matrix ``K[i, j] = k(A[i], B[j])`` for dense or sparse inputs."""
    if kind not in KERNELS:
        raise ParameterError(f"unknown kernel {kind!r}")
    dot = A @ B.T
    dot = dot.toarray() if sp.issparse(dot) else np.asarray(dot, dtype=np.float64)
    if kind == "linear":
        return dot
    if kind == "poly":
        return (gamma * dot + coef0) ** degree
    sq = _rowwise_sq_norms(A)[:, None] + _rowwise_sq_norms(B)[None, :] - 2.0 * dot
    return np.exp(-gamma * np.maximum(sq, 0.0))


def kernel_eval(kind: str, gamma: float, degree: int, coef0: float, x, z) -> float:
    """Kernel value for a single pair of vectors (dense 1-D or sparse rows)."""
    def row(v):
        return sp.csr_matrix(v) if sp.issparse(v) else np.atleast_2d(np.asarray(v, dtype=np.float64))
    x, z = row(x), row(z)
    if x.shape[1] != z.shape[1]:
        raise ParameterError(f"dimension mismatch: {x.shape[1]} vs {z.shape[1]}")
    return float(kernel_matrix(kind, x, z, gamma, degree, coef0)[0, 0])


@dataclass
class BinaryMachine:
    """One pairwise classifier: ``positive`` label is the smaller of the pair."""

    positive: int
    negative: int
    support_vectors: sp.csr_matrix
    alpha: np.ndarray  # dual coefficients, each in (0, C]
    y: np.ndarray  # +1 / -1 per support vector
    bias: float
    iterations: int = 0
    converged: bool = True

    def decision_function(self, K: np.ndarray) -> np.ndarray:
        """``K`` is the kernel between query rows and this machine's SVs."""
        return K @ (self.alpha * self.y) + self.bias


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tolerance: float, max_iter: int):
    """Solve the binary dual problem on a precomputed Gram matrix.

    Returns ``(alpha, bias, iterations, converged)`` where the decision
    function is ``sum_i alpha_i y_i K(x_i, x) + bias``.
    """
    n = len(y)
    y = y.astype(np.float64)
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of the dual objective, Q a - e
    diag = np.diag(K).copy()
    pos, neg = y > 0, y < 0
    converged = False
    it = 0
    while it < max_iter:
        at_upper = alpha >= C
        at_lower = alpha <= 0
        i_up = (~at_upper & pos) | (~at_lower & neg)
        i_low = (~at_upper & neg) | (~at_lower & pos)
        minus_yg = -y * grad
        if not i_up.any() or not i_low.any():
            converged = True
            break
        up_vals = np.where(i_up, minus_yg, -np.inf)
        i = int(np.argmax(up_vals))
        g_max = up_vals[i]
        g_min = np.min(np.where(i_low, minus_yg, np.inf))
        if g_max - g_min < tolerance:
            converged = True
            break

        # second-order choice of j among violating I_low members
        Ki = K[i]
        b = g_max - minus_yg
        a = diag[i] + diag - 2.0 * Ki
        a = np.where(a > 0, a, TAU)
        cand = i_low & (b > 0)
        gain = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(gain))
        Kj = K[j]

        old_i, old_j = alpha[i], alpha[j]
        yi, yj = y[i], y[j]
        if yi != yj:
            quad = diag[i] + diag[j] - 2.0 * Ki[j]
            quad = quad if quad > 0 else TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            ai, aj = old_i + delta, old_j + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * Ki[j]
            quad = quad if quad > 0 else TAU
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            ai, aj = old_i - delta, old_j + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        # Q_i = y_i y K_i
        grad += y * (yi * (ai - old_i) * Ki + yj * (aj - old_j) * Kj)
        it += 1

    # bias from free vectors, else the midpoint of the feasible interval
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = float(yg[free].mean())
    else:
        upper_bound_set = ((alpha >= C) & neg) | ((alpha <= 0) & pos)
        lower_bound_set = ((alpha >= C) & pos) | ((alpha <= 0) & neg)
        ub = yg[upper_bound_set].min() if upper_bound_set.any() else np.inf
        lb = yg[lower_bound_set].max() if lower_bound_set.any() else -np.inf
        if np.isfinite(ub) and np.isfinite(lb):
            rho = float((ub + lb) / 2)
        else:
            rho = float(ub if np.isfinite(ub) else lb)
    return alpha, -rho, it, converged


@dataclass
class SVMModel:
    labels: np.ndarray
    params: SVMParams
    machines: list[BinaryMachine]
    n_features: int

    family = "svm"

    @property
    def converged(self) -> bool:
        return all(m.converged for m in self.machines)

    def decision_functions(self, X) -> np.ndarray:
        """Decision values, one column per machine (pair order as stored)."""
        X = check_predict_inputs(X, self.n_features)
        p = self.params
        out = np.empty((X.shape[0], len(self.machines)))
        for col, m in enumerate(self.machines):
            K = kernel_matrix(p.kernel, X, m.support_vectors, p.gamma, p.degree, p.coef0)
            out[:, col] = m.decision_function(K)
        return out

    def predict(self, X) -> np.ndarray:
        dec = self.decision_functions(X)
        index = {lab: k for k, lab in enumerate(self.labels.tolist())}
        n = dec.shape[0]
        votes = np.zeros((n, len(self.labels)), dtype=np.int64)
        strength = np.zeros((n, len(self.labels)))
        for col, m in enumerate(self.machines):
            d = dec[:, col]
            # zero decision goes to the smaller label, like every other tie
            winner = np.where(d >= 0, index[m.positive], index[m.negative])
            votes[np.arange(n), winner] += 1
            strength[np.arange(n), winner] += np.abs(d)
        out = np.empty(n, dtype=self.labels.dtype)
        for r in range(n):
            best = np.flatnonzero(votes[r] == votes[r].max())
            if len(best) > 1:
                s = strength[r, best]
                best = best[s == s.max()]
            out[r] = self.labels[best[0]]
        return out


def svm_fit(X, y, params: SVMParams = SVMParams()) -> SVMModel:
    """Train one SMO machine per unordered class pair."""
    X, y, labels, _ = check_fit_inputs(X, y)
    Xs = sp.csr_matrix(X)
    K_full = kernel_matrix(params.kernel, Xs, Xs, params.gamma, params.degree, params.coef0)
    machines = []
    for a, b in combinations(labels.tolist(), 2):
        rows = np.flatnonzero((y == a) | (y == b))
        yy = np.where(y[rows] == a, 1.0, -1.0)
        cap = params.max_iter if params.max_iter is not None else 10 * len(y)
        alpha, bias, iters, ok = smo_solve(K_full[np.ix_(rows, rows)], yy, params.C, params.tolerance, cap)
        if not ok:
            log.warning("SMO for pair (%s, %s) hit the iteration cap (%d) before converging", a, b, cap)
        sv = np.flatnonzero(alpha > 0)
        machines.append(BinaryMachine(a, b, Xs[rows[sv]], alpha[sv], yy[sv], bias, iters, ok))
    return SVMModel(labels, params, machines, X.shape[1])


def svm_predict(model: SVMModel, X) -> np.ndarray:
    return model.predict(X)
