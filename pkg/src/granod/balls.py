"""Granular balls and the bottom-up multi-scale view hierarchy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import MixedDataset
from .fgd import attribute_epsilon, relation_from_differences, scores_from_relations


@dataclass(frozen=True, eq=False)
class GranularBall:
    """Members are original sample indices, sorted ascending.

    ``center`` has one entry per feature: the member mean for numerical
    attributes, the modal category code for nominal ones. ``radius`` is the
    largest Euclidean distance from the numerical centre to a member.
    """

    members: np.ndarray
    center: np.ndarray
    radius: float

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class ScaleView:
    level: int
    balls: tuple[GranularBall, ...]
    sample_to_ball: np.ndarray

    def __len__(self):
        return len(self.balls)


@dataclass(frozen=True, eq=False)
class ViewHierarchy:
    views: tuple[ScaleView, ...]

    def __len__(self):
        return len(self.views)

    def __iter__(self):
        return iter(self.views)

    def __getitem__(self, k):
        return self.views[k]


def _mode(codes: np.ndarray) -> float:
    vals, counts = np.unique(codes, return_counts=True)
    # np.unique sorts, so argmax picks the smallest code among ties
    return float(vals[np.argmax(counts)])


def ball_from_members(ds: MixedDataset, members) -> GranularBall:
    members = np.unique(np.asarray(members, dtype=int))
    if members.size == 0:
        raise ValueError("a granular ball needs at least one member")
    if members[0] < 0 or members[-1] >= ds.n:
        raise IndexError("member index out of range")
    rows = ds.values[members]
    nominal = ds.nominal_mask
    center = rows.mean(axis=0)
    for j in np.flatnonzero(nominal):
        center[j] = _mode(rows[:, j])
    num = ~nominal
    if members.size == 1 or not num.any():
        radius = 0.0
    else:
        radius = float(np.sqrt(((rows[:, num] - center[num]) ** 2).sum(axis=1)).max())
    return GranularBall(members, center, radius)


def _radius_term(radius, attr_count: int):
    # r ** (1/|A|), with 0 -> 0
    return np.power(np.maximum(radius, 0.0), 1.0 / attr_count)


def ball_attribute_similarity(b1: GranularBall, b2: GranularBall, attr: int, eps: float,
                              attr_count: int, nominal: bool = False) -> float:
    """Similarity of two balls on one attribute.

    ``eps`` is the attribute threshold std(a)/delta computed over the raw samples.
    Nominal attributes compare modes only.
    """
    if nominal:
        return float(b1.center[attr] == b2.center[attr])
    gap = abs(b1.center[attr] - b2.center[attr])
    reach = abs(_radius_term(b1.radius, attr_count) + _radius_term(b2.radius, attr_count))
    dis = max(gap - reach, 0.0)
    return 1.0 - dis if dis <= eps else 0.0


class _BallRelations:
    """Per-attribute ball-to-ball relation matrices for one view."""

    def __init__(self, ds: MixedDataset, balls, delta: float):
        self.centers = np.array([b.center for b in balls])
        radii = np.array([b.radius for b in balls])
        self.reach = _radius_term(radii, ds.m)
        self.nominal = ds.nominal_mask
        self.eps = np.array([attribute_epsilon(ds.values[:, a], delta) for a in range(ds.m)])
        self.m = ds.m

    def __call__(self, a: int) -> np.ndarray:
        c = self.centers[:, a]
        if self.nominal[a]:
            return (c[:, None] == c[None, :]).astype(float)
        gap = np.abs(c[:, None] - c[None, :])
        dis = np.maximum(gap - np.abs(self.reach[:, None] + self.reach[None, :]), 0.0)
        return relation_from_differences(dis, self.eps[a])

    def combined(self) -> np.ndarray:
        out = self(0)
        for a in range(1, self.m):
            np.minimum(out, self(a), out=out)
        return out


def ball_relation(ds: MixedDataset, view: ScaleView, delta: float) -> np.ndarray:
    """Min-over-attributes ball similarity matrix of a view."""
    return _BallRelations(ds, view.balls, delta).combined()


def singleton_view(ds: MixedDataset) -> ScaleView:
    balls = tuple(ball_from_members(ds, [i]) for i in range(ds.n))
    return ScaleView(1, balls, np.arange(ds.n))


def _make_view(ds, level, groups) -> ScaleView:
    groups = sorted((np.sort(g) for g in groups), key=lambda g: int(g[0]))
    balls = tuple(ball_from_members(ds, g) for g in groups)
    s2b = np.empty(ds.n, dtype=int)
    for k, b in enumerate(balls):
        s2b[b.members] = k
    return ScaleView(level, balls, s2b)


def _closest_pair(ds, balls):
    centers = np.array([b.center for b in balls])
    d2 = np.zeros((len(balls), len(balls)))
    for a, nominal in enumerate(ds.nominal_mask):
        c = centers[:, a]
        # nominal mismatch counts as unit distance
        d2 += (c[:, None] != c[None, :]) if nominal else (c[:, None] - c[None, :]) ** 2
    iu, ju = np.triu_indices(len(balls), k=1)
    # lexsort: last key is primary; ties resolved by (i, j)
    k = np.lexsort((ju, iu, d2[iu, ju]))[0]
    return int(iu[k]), int(ju[k])


def coarsen(view: ScaleView, ds: MixedDataset, delta: float) -> ScaleView:
    """Greedy maximum-similarity pairing of the balls in ``view``.

    Pairs are visited by descending similarity (ties by ball index pair) and
    merged when both partners are still free and their similarity is positive.
    If nothing merges, the two balls with the closest centres are merged so the
    ball count always drops.
    """
    nb = len(view.balls)
    if nb < 2:
        raise ValueError("cannot coarsen a view with a single ball")
    R = _BallRelations(ds, view.balls, delta).combined()
    iu, ju = np.triu_indices(nb, k=1)
    sim = R[iu, ju]
    keep = sim > 0
    iu, ju, sim = iu[keep], ju[keep], sim[keep]
    order = np.lexsort((ju, iu, -sim))
    used = np.zeros(nb, dtype=bool)
    pairs = []
    for k in order:
        i, j = iu[k], ju[k]
        if used[i] or used[j]:
            continue
        used[i] = used[j] = True
        pairs.append((i, j))
        if nb - 2 * len(pairs) < 2:
            break
    if not pairs:
        i, j = _closest_pair(ds, view.balls)
        used[i] = used[j] = True
        pairs.append((i, j))
    groups = [np.concatenate([view.balls[i].members, view.balls[j].members]) for i, j in pairs]
    groups += [view.balls[k].members for k in np.flatnonzero(~used)]
    return _make_view(ds, view.level + 1, groups)


def generate_views(ds: MixedDataset, delta: float) -> ViewHierarchy:
    """All views from n singletons down to a single ball, finest first."""
    views = [singleton_view(ds)]
    while len(views[-1].balls) != 1:
        views.append(coarsen(views[-1], ds, delta))
    return ViewHierarchy(tuple(views))


def view_scores(ds: MixedDataset, view: ScaleView, delta: float, lam: float) -> np.ndarray:
    """Granule-density scores of the balls, copied to each member sample.

    Each ball counts once in the density computation, whatever its size.
    """
    rel = _BallRelations(ds, view.balls, delta)
    ball_scores = scores_from_relations(rel, ds.m, lam)
    return ball_scores[view.sample_to_ball]


def view_records(view: ScaleView, ds: MixedDataset):
    """One dict per ball, for text dumps."""
    for k, b in enumerate(view.balls):
        yield {
            "level": view.level,
            "ball": k,
            "members": b.members.tolist(),
            "center": [float(x) for x in b.center],
            "radius": b.radius,
        }
