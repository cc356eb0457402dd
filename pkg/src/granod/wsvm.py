"""Per-sample weighted soft-margin linear SVM trained by SMO, plus Platt scaling.

The dual solved is

    min_eta  1/2 sum_ij eta_i eta_j y_i y_j <x_i, x_j> - sum_k eta_k
    s.t.     sum_k eta_k y_k = 0,   0 <= eta_k <= mu_k * C^{y_k}
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

TAU = 1e-12


@dataclass(frozen=True, eq=False)
class TrainingSet:
    features: np.ndarray
    labels: np.ndarray
    weights: np.ndarray
    c_plus: float
    c_minus: float

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.labels, dtype=float)
        mu = np.asarray(self.weights, dtype=float)
        if X.shape[0] != y.shape[0] or mu.shape != y.shape:
            raise ValueError("features, labels and weights disagree in length")
        if not np.all(np.isfinite(X)):
            raise ValueError("non-finite feature value")
        if not np.all(np.isfinite(mu)) or np.any(mu < 0):
            raise ValueError("weights must be finite and non-negative")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        if len(np.unique(y)) < 2:
            raise ValueError("training set needs both classes")
        if self.c_plus <= 0 or self.c_minus <= 0:
            raise ValueError("penalties must be positive")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "weights", mu)

    @classmethod
    def with_ratio(cls, features, labels, weights, t: float, c_minus: float = 1.0,
                   invert_ratio: bool = False) -> "TrainingSet":
        """C+ / C- = t / (1 - t), or its inverse when ``invert_ratio``."""
        ratio = t / (1.0 - t)
        if invert_ratio:
            ratio = 1.0 / ratio
        return cls(features, labels, weights, c_minus * ratio, c_minus)

    @property
    def upper_bounds(self) -> np.ndarray:
        return self.weights * np.where(self.labels > 0, self.c_plus, self.c_minus)


@dataclass(frozen=True, eq=False)
class WsvmModel:
    w: np.ndarray
    b: float
    dual_vars: np.ndarray
    converged: bool
    iterations: int = 0
    platt_a: float = 0.0
    platt_b: float = 0.0

    def with_platt(self, a: float, b: float) -> "WsvmModel":
        return WsvmModel(self.w, self.b, self.dual_vars, self.converged, self.iterations, a, b)


def dual_objective(eta, X, y) -> float:
    v = (eta * y) @ X
    return float(0.5 * v @ v - eta.sum())


def primal_objective(w, b, ts: TrainingSet) -> float:
    slack = np.maximum(0.0, 1.0 - ts.labels * (ts.features @ w + b))
    return float(0.5 * w @ w + ts.upper_bounds @ slack)


def train(ts: TrainingSet, tol: float = 1e-3, max_passes: int = 200) -> WsvmModel:
    """SMO with maximal-violating-pair working-set selection.

    Each step picks i maximising and j minimising -y_k * grad_k over the index
    sets that can still move, i.e. the pair with the largest error gap, and
    solves the two-variable subproblem analytically. Stops once that gap is at
    most ``tol`` or after ``max_passes * l`` steps.
    """
    X, y, C = ts.features, ts.labels, ts.upper_bounds
    l = len(y)
    K = X @ X.T
    eta = np.zeros(l)
    grad = -np.ones(l)  # gradient of the dual objective, Q @ eta - 1
    max_iter = max_passes * max(l, 1)
    converged = False
    it = 0
    while it < max_iter:
        minus_yg = -y * grad
        up = ((y > 0) & (eta < C)) | ((y < 0) & (eta > 0))
        low = ((y > 0) & (eta > 0)) | ((y < 0) & (eta < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(minus_yg[up])])
        j = int(np.flatnonzero(low)[np.argmin(minus_yg[low])])
        gap = minus_yg[i] - minus_yg[j]
        if gap <= tol:
            converged = True
            break
        it += 1
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0:
            quad = TAU
        # move along d = (y_i, -y_j) scaled by step s >= 0
        room_i = C[i] - eta[i] if y[i] > 0 else eta[i]
        room_j = eta[j] if y[j] > 0 else C[j] - eta[j]
        s = min(gap / quad, room_i, room_j)
        old_i, old_j = eta[i], eta[j]
        # a variable that runs out of room is set to its bound exactly; leaving it a
        # rounding hair inside would keep it selectable with a zero-length step
        if s == room_i:
            eta[i] = C[i] if y[i] > 0 else 0.0
        else:
            eta[i] = old_i + y[i] * s
        if s == room_j:
            eta[j] = 0.0 if y[j] > 0 else C[j]
        else:
            eta[j] = old_j - y[j] * s
        di, dj = eta[i] - old_i, eta[j] - old_j
        grad += y * (K[:, i] * (y[i] * di) + K[:, j] * (y[j] * dj))

    if not converged:
        log.warning("SMO stopped after %d steps without meeting tol=%g", it, tol)
    w = (eta * y) @ X
    b = _intercept(eta, y, C, grad)
    return WsvmModel(w, b, eta, converged, it)


def _intercept(eta, y, C, grad) -> float:
    # y_k f(x_k) = 1 on free vectors  =>  b = y_k - w.x_k = -y_k * grad_k
    minus_yg = -y * grad
    free = (eta > 1e-12 * np.maximum(C, 1.0)) & (eta < C - 1e-12 * np.maximum(C, 1.0))
    if free.any():
        return float(minus_yg[free].mean())
    up = ((y > 0) & (eta < C)) | ((y < 0) & (eta > 0))
    low = ((y > 0) & (eta > 0)) | ((y < 0) & (eta < C))
    hi = minus_yg[low].min() if low.any() else minus_yg.max()
    lo = minus_yg[up].max() if up.any() else minus_yg.min()
    return float(0.5 * (hi + lo))


def decision_values(model: WsvmModel, features) -> np.ndarray:
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if model.w.size == 1 else X[None, :]
    if X.shape[1] != model.w.size:
        raise ValueError(f"expected {model.w.size} features, got {X.shape[1]}")
    return X @ model.w + model.b


def _sigmoid_neg(a, b, f):
    """1 / (1 + exp(a f + b)) without overflow."""
    z = a * f + b
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    ez = np.exp(-z[pos])
    out[pos] = ez / (1.0 + ez)
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return out


def fit_platt(values, labels, max_iter: int = 100, min_step: float = 1e-10,
              sigma: float = 1e-12) -> tuple[float, float]:
    """Fit P(y=+1 | f) = 1 / (1 + exp(a f + b)).

    Newton's method with backtracking on the regularised likelihood, using the
    smoothed targets (N+ + 1)/(N+ + 2) and 1/(N- + 2).
    """
    f = np.asarray(values, dtype=float)
    y = np.asarray(labels)
    pos = y > 0
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("Platt scaling needs both classes")
    t = np.where(pos, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def nll(a, b):
        z = a * f + b
        # sum t*log(1+e^{z}) ... expressed stably via logaddexp
        return float(np.sum(t * np.logaddexp(0.0, z) + (1.0 - t) * np.logaddexp(0.0, -z)))

    a, b = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    fval = nll(a, b)
    for _ in range(max_iter):
        p = _sigmoid_neg(a, b, f)
        d2 = p * (1.0 - p)
        h11 = sigma + np.sum(f * f * d2)
        h22 = sigma + np.sum(d2)
        h21 = np.sum(f * d2)
        d1 = t - p
        g1 = np.sum(f * d1)
        g2 = np.sum(d1)
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            na, nb = a + step * da, b + step * db
            nf = nll(na, nb)
            if nf < fval + 1e-4 * step * gd:
                a, b, fval = na, nb, nf
                break
            step /= 2.0
        else:
            log.debug("Platt line search failed")
            break
    return float(a), float(b)


def calibrate(model: WsvmModel, ts: TrainingSet) -> WsvmModel:
    a, b = fit_platt(decision_values(model, ts.features), ts.labels)
    return model.with_platt(a, b)


def predict_probability(model: WsvmModel, features) -> np.ndarray:
    return _sigmoid_neg(model.platt_a, model.platt_b, decision_values(model, features))
