"""Multi-view probability fusion, three-way regions and the end-to-end detector."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import wsvm
from .balls import ViewHierarchy, generate_views, view_scores
from .dataset import MixedDataset, normalize

log = logging.getLogger(__name__)

GUARD = 1e-12


def _ceil(x: float) -> int:
    # products like 100 * 0.97 land a hair above the integer in binary floating point
    return int(math.ceil(x - 1e-9))


def outlier_count(n: int, t: float) -> int:
    return _ceil(t * n)


def map_to_probability(scores, t: float) -> np.ndarray:
    """Piecewise-linear map putting scores >= the o-th largest into [0.5, 1]
    and the rest into [0, 0.5], o = ceil(t n)."""
    s = np.asarray(scores, dtype=float)
    n = s.size
    if not 0.0 < t < 1.0:
        raise ValueError(f"contamination must lie in (0, 1), got {t}")
    o = outlier_count(n, t)
    if o < 1 or o >= n:
        raise ValueError(f"ceil(t*n) = {o} must lie in [1, n-1] for n = {n}")
    desc = np.sort(s)[::-1]
    s_o, s_o1 = desc[o - 1], desc[o]
    hi, lo = desc[0], desc[-1]
    top = s >= s_o
    p = np.empty(n)
    p[top] = (s[top] - s_o) / (2.0 * (hi - s_o) + GUARD) + 0.5
    p[~top] = (s[~top] - lo) / (2.0 * (s_o1 - lo) + GUARD)
    return np.clip(p, 0.0, 1.0)


def binary_entropy(p) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return np.clip(h, 0.0, 1.0)


def view_weight(probabilities) -> float:
    """1 - mean binary entropy (base 2)."""
    return float(1.0 - binary_entropy(probabilities).mean())


def sample_weights(entropies, view_weights) -> np.ndarray:
    """mu(x) = 1 - sum_k nu_k H_k(x) / K; ``entropies`` is K x n."""
    H = np.atleast_2d(np.asarray(entropies, dtype=float))
    nu = np.asarray(view_weights, dtype=float)
    if H.shape[0] != nu.size or nu.size < 1:
        raise ValueError("need one entropy row per view weight")
    return np.clip(1.0 - (nu[:, None] * H).sum(axis=0) / nu.size, 0.0, 1.0)


def fuse(probabilities, view_weights) -> np.ndarray:
    """Weighted mean of per-view probabilities; uniform if all weights vanish."""
    P = np.atleast_2d(np.asarray(probabilities, dtype=float))
    nu = np.asarray(view_weights, dtype=float)
    if P.shape[0] != nu.size or nu.size < 1:
        raise ValueError("need one probability row per view weight")
    total = nu.sum()
    if total < GUARD:
        return P.mean(axis=0)
    return ((nu / total)[:, None] * P).sum(axis=0)


def threshold_indices(n: int, t: float, delta_tw: float) -> tuple[int, int]:
    """1-based ascending ranks of the alpha and beta order statistics."""
    ia = _ceil(n * (1.0 - t + delta_tw * t))
    ib = _ceil(n * (1.0 - t - delta_tw * (1.0 - t)))
    for name, i in (("alpha", ia), ("beta", ib)):
        if not 1 <= i <= n:
            raise ValueError(f"{name} index {i} outside [1, {n}] for t={t}, delta={delta_tw}")
    return ia, ib


def thresholds(fused, t: float, delta_tw: float = 0.7) -> tuple[float, float]:
    P = np.sort(np.asarray(fused, dtype=float))
    ia, ib = threshold_indices(P.size, t, delta_tw)
    return float(P[ia - 1]), float(P[ib - 1])


def partition(fused, alpha: float, beta: float):
    """(POS, BND, NEG) index arrays; POS wins where alpha == beta."""
    if beta > alpha:
        raise ValueError("beta must not exceed alpha")
    P = np.asarray(fused, dtype=float)
    pos = P >= alpha
    neg = (P <= beta) & ~pos
    bnd = ~pos & ~neg
    return np.flatnonzero(pos), np.flatnonzero(bnd), np.flatnonzero(neg)


@dataclass(frozen=True)
class PipelineConfig:
    delta: float
    lam: float
    contamination: float
    delta_tw: float = 0.7
    c_minus: float = 1.0
    seed: int = 0
    invert_c_ratio: bool = False
    smo_tol: float = 1e-3
    smo_max_passes: int = 200

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if not 0.0 < self.contamination < 1.0:
            raise ValueError("contamination must lie in (0, 1)")
        if not 0.0 <= self.delta_tw <= 1.0:
            raise ValueError("three-way delta must lie in [0, 1]")
        if self.c_minus <= 0:
            raise ValueError("c_minus must be positive")


@dataclass(frozen=True, eq=False)
class ViewResult:
    level: int
    n_balls: int
    scores: np.ndarray
    probabilities: np.ndarray
    entropies: np.ndarray
    view_weight: float


@dataclass(frozen=True, eq=False)
class FusionState:
    per_view: tuple[ViewResult, ...]
    fused: np.ndarray
    sample_weights: np.ndarray
    alpha: float
    beta: float
    pos: np.ndarray
    bnd: np.ndarray
    neg: np.ndarray
    contamination: float
    delta_tw: float

    def region_labels(self) -> np.ndarray:
        out = np.empty(self.fused.size, dtype=object)
        out[self.pos], out[self.bnd], out[self.neg] = "POS", "BND", "NEG"
        return out


@dataclass(frozen=True, eq=False)
class PipelineResult:
    final: np.ndarray
    state: FusionState
    model: wsvm.WsvmModel | None
    hierarchy: ViewHierarchy
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def fell_back(self) -> bool:
        return self.model is None


def svm_features(ds: MixedDataset) -> np.ndarray:
    """Numerical columns as-is, nominal columns one-hot expanded."""
    cols = []
    for j, attr in enumerate(ds.schema):
        x = ds.values[:, j]
        if attr.kind == "nominal":
            k = len(ds.categories.get(j, ())) or int(x.max()) + 1
            cols.append(np.eye(k)[x.astype(int)])
        else:
            cols.append(x[:, None])
    return np.hstack(cols)


def score_views(ds: MixedDataset, hierarchy: ViewHierarchy, cfg: PipelineConfig) -> list[ViewResult]:
    out = []
    for view in hierarchy:
        s = view_scores(ds, view, cfg.delta, cfg.lam)
        p = map_to_probability(s, cfg.contamination)
        h = binary_entropy(p)
        out.append(ViewResult(view.level, len(view), s, p, h, float(1.0 - h.mean())))
    return out


def fuse_views(per_view, t: float, delta_tw: float) -> FusionState:
    P = np.array([v.probabilities for v in per_view])
    H = np.array([v.entropies for v in per_view])
    nu = np.array([v.view_weight for v in per_view])
    fused = fuse(P, nu)
    mu = sample_weights(H, nu)
    alpha, beta = thresholds(fused, t, delta_tw)
    pos, bnd, neg = partition(fused, alpha, beta)
    return FusionState(tuple(per_view), fused, mu, alpha, beta, pos, bnd, neg, t, delta_tw)


def run_pipeline(ds: MixedDataset, cfg: PipelineConfig) -> PipelineResult:
    """Views -> per-view scores and probabilities -> fusion -> three-way split ->
    weighted SVM on POS (+1) and NEG (-1) -> Platt-calibrated probability for
    every sample. Falls back to the fused probability when a region is empty or
    SMO does not converge."""
    ds = normalize(ds)
    hierarchy = generate_views(ds, cfg.delta)
    state = fuse_views(score_views(ds, hierarchy, cfg), cfg.contamination, cfg.delta_tw)

    warnings = []
    if state.pos.size == 0 or state.neg.size == 0:
        warnings.append("empty POS or NEG region; final probability is the fused one")
        return PipelineResult(state.fused.copy(), state, None, hierarchy, tuple(warnings))

    X = svm_features(ds)
    idx = np.concatenate([state.pos, state.neg])
    y = np.concatenate([np.ones(state.pos.size), -np.ones(state.neg.size)])
    ts = wsvm.TrainingSet.with_ratio(X[idx], y, state.sample_weights[idx], cfg.contamination,
                                     cfg.c_minus, cfg.invert_c_ratio)
    try:
        model = wsvm.train(ts, tol=cfg.smo_tol, max_passes=cfg.smo_max_passes)
    except ValueError as exc:
        warnings.append(f"weighted SVM training failed ({exc}); final probability is the fused one")
        return PipelineResult(state.fused.copy(), state, None, hierarchy, tuple(warnings))
    if not model.converged:
        warnings.append("SMO did not converge; final probability is the fused one")
        return PipelineResult(state.fused.copy(), state, None, hierarchy, tuple(warnings))
    model = wsvm.calibrate(model, ts)
    final = wsvm.predict_probability(model, X)
    return PipelineResult(final, state, model, hierarchy, tuple(warnings))
