"""Slow, independent reference implementations used to check the library.

Nothing here imports granod; each function is written out loop by loop.
"""

import math

import numpy as np


def granule_scores_bruteforce(X, nominal, delta, lam, log=math.log):
    """Outlier scores by direct loops over samples, attributes and prefixes."""
    X = [list(map(float, row)) for row in X]
    n, m = len(X), len(X[0])

    def column_std(a):
        mean = sum(row[a] for row in X) / n
        return math.sqrt(sum((row[a] - mean) ** 2 for row in X) / n)

    plain = []
    for a in range(m):
        eps = column_std(a) / delta
        R = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if nominal[a]:
                    R[i][j] = 1.0 if X[i][a] == X[j][a] else 0.0
                else:
                    d = abs(X[i][a] - X[j][a])
                    R[i][j] = 1.0 - d if d <= eps else 0.0
        plain.append(R)

    weighted = []
    for R in plain:
        den = [sum(R[i]) / n for i in range(n)]
        weighted.append([[R[i][j] * math.exp(-lam * (den[i] - den[j]) ** 2) for j in range(n)]
                         for i in range(n)])

    def densities(attrs):
        out = []
        for i in range(n):
            row = 0.0
            for j in range(n):
                row += min(weighted[a][i][j] for a in attrs)
            out.append(row / n)
        return out

    def sig(attrs):
        return -log(sum(densities(attrs)) / n)

    single = [sig([a]) for a in range(m)]
    order = sorted(range(m), key=lambda a: (-single[a], a))
    total = [0.0] * n
    for k in range(1, m + 1):
        prefix = order[:k]
        s = sig(prefix)
        for i, d in enumerate(densities(prefix)):
            total[i] += s * d
    return [1.0 - t / m for t in total], order


def auroc_pairs(scores, labels):
    """Mann-Whitney by enumerating every outlier/inlier pair."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def svm_dual_oracle(X, y, upper):
    """Solve min 1/2 a'Qa - 1'a, y'a = 0, 0 <= a <= upper with a conic solver,
    then project the answer back onto the feasible set.

    Returns (eta, objective).
    """
    import cvxpy as cp

    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    upper = np.asarray(upper, dtype=float)
    G = (y[:, None] * X)  # Q = G G'
    eta = cp.Variable(len(y))
    objective = cp.Minimize(0.5 * cp.sum_squares(G.T @ eta) - cp.sum(eta))
    problem = cp.Problem(objective, [y @ eta == 0, eta >= 0, eta <= upper])
    problem.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    a = np.clip(np.asarray(eta.value, dtype=float), 0.0, upper)
    a = _polish(a, G, y, upper)
    return a, _dual_value(a, G)


def _dual_value(a, G):
    v = G.T @ a
    return float(0.5 * v @ v - a.sum())


def _polish(a, G, y, upper, rounds=200):
    """Projected-gradient steps on the box and hyperplane; keeps the better point."""
    best, best_val = a.copy(), _dual_value(a, G)
    Q = G @ G.T
    step = 1.0 / max(np.linalg.eigvalsh(Q).max(), 1e-12)
    x = a.copy()
    for _ in range(rounds):
        g = Q @ x - 1.0
        x = _project(x - step * g, y, upper)
        val = _dual_value(x, G)
        if val < best_val:
            best, best_val = x.copy(), val
    return best


def _project(z, y, upper):
    """Euclidean projection onto {0 <= a <= upper, y'a = 0} by bisection on the multiplier."""
    def residual(mu):
        return y @ np.clip(z - mu * y, 0.0, upper)

    lo, hi = -1.0, 1.0
    while residual(lo) < 0:
        lo *= 2.0
    while residual(hi) > 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if residual(mid) > 0:
            lo = mid
        else:
            hi = mid
    return np.clip(z - 0.5 * (lo + hi) * y, 0.0, upper)
