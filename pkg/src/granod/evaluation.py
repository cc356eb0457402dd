"""Detection metrics and cross-method rank statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


def _check_binary(labels) -> np.ndarray:
    y = np.asarray(labels).astype(int)
    if not np.all(np.isin(y, (0, 1))):
        raise ValueError("labels must be 0 (inlier) or 1 (outlier)")
    if y.sum() == 0 or y.sum() == y.size:
        raise ValueError("labels must contain both outliers and inliers")
    return y


def identified_outliers(probs, t: float) -> np.ndarray:
    """Indices with probability at least the ceil(t n)-th largest value."""
    p = np.asarray(probs, dtype=float)
    if not 0.0 < t <= 1.0:
        raise ValueError(f"t must lie in (0, 1], got {t}")
    k = int(math.ceil(t * p.size - 1e-9))
    k = min(max(k, 1), p.size)
    theta = np.sort(p)[::-1][k - 1]
    return np.flatnonzero(p >= theta)


def precision_recall(probs, labels, t: float) -> tuple[float, float]:
    y = np.asarray(labels).astype(int)
    if y.sum() == 0:
        raise ValueError("no ground-truth outliers")
    found = identified_outliers(probs, t)
    hits = int(y[found].sum())
    precision = hits / found.size if found.size else 0.0
    return precision, hits / int(y.sum())


def roc_points(probs, labels) -> list[tuple[float, float]]:
    """(fpr, tpr) after admitting each distinct score, highest first."""
    y = _check_binary(labels)
    p = np.asarray(probs, dtype=float)
    order = np.argsort(-p, kind="stable")
    p, y = p[order], y[order]
    # last index of each run of equal scores
    ends = np.flatnonzero(np.r_[p[1:] != p[:-1], True])
    tp = np.cumsum(y)[ends]
    fp = np.cumsum(1 - y)[ends]
    P, N = y.sum(), y.size - y.sum()
    pts = [(0.0, 0.0)] + [(float(f / N), float(t / P)) for f, t in zip(fp, tp)]
    return pts


def auroc(probs, labels) -> float:
    """Mann-Whitney form: P(outlier > inlier) + 0.5 P(tie)."""
    y = _check_binary(labels)
    r = rankdata(np.asarray(probs, dtype=float))  # average ranks handle ties
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    return float((r[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def trapezoid_area(points) -> float:
    pts = np.asarray(points, dtype=float)
    return float(np.sum(np.diff(pts[:, 0]) * (pts[1:, 1] + pts[:-1, 1]) / 2.0))


@dataclass(frozen=True, eq=False)
class MetricReport:
    auroc: float
    pr_curve: list[tuple[float, float, float]]
    roc_points: list[tuple[float, float]]


def metric_report(probs, labels, ts=None) -> MetricReport:
    ts = default_grid() if ts is None else list(ts)
    pr = [(t, *precision_recall(probs, labels, t)) for t in ts]
    return MetricReport(auroc(probs, labels), pr, roc_points(probs, labels))


def default_grid() -> list[float]:
    """5%, 10%, ..., 100%."""
    return [round(0.05 * k, 2) for k in range(1, 21)]


@dataclass(frozen=True, eq=False)
class RankTable:
    methods: list[str]
    datasets: list[str]
    ranks: np.ndarray

    @classmethod
    def from_scores(cls, methods, datasets, scores, higher_is_better: bool = True) -> "RankTable":
        s = np.asarray(scores, dtype=float)
        if s.shape != (len(datasets), len(methods)):
            raise ValueError("score table shape does not match names")
        keyed = -s if higher_is_better else s
        return cls(list(methods), list(datasets), np.vstack([rankdata(row) for row in keyed]))

    @property
    def average_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=0)


def friedman_from_average_ranks(avg_ranks, n_datasets: int) -> tuple[float, float]:
    """(tau_chi2, tau_F) from per-method average ranks."""
    r = np.asarray(avg_ranks, dtype=float)
    M, N = r.size, int(n_datasets)
    if M < 2 or N < 2:
        raise ValueError("need at least two methods and two datasets")
    chi2 = 12.0 * N / (M * (M + 1)) * (np.sum(r ** 2) - M * (M + 1) ** 2 / 4.0)
    denom = N * (M - 1) - chi2
    # every dataset ranks the methods identically: chi2 hits its maximum and tau_F diverges
    if denom <= 1e-12 * N * M:
        return float(chi2), math.inf
    return float(chi2), float((N - 1) * chi2 / denom)


def friedman_statistic(rt: RankTable) -> tuple[float, float]:
    return friedman_from_average_ranks(rt.average_ranks, len(rt.datasets))


def nemenyi_cd(M: int, N: int, q_phi: float) -> float:
    if M < 2 or N < 1 or q_phi < 0:
        raise ValueError("need M >= 2, N >= 1 and q_phi >= 0")
    return float(q_phi * math.sqrt(M * (M + 1) / (6.0 * N)))
