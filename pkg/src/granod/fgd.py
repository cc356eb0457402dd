"""Fuzzy relations with relative granule density and the granule-density outlier score.

The scorer works on any entity set for which per-attribute relation matrices can
be produced: raw samples here, granular balls in :mod:`granod.balls`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dataset import MixedDataset


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    values: np.ndarray
    density_weighted: bool = False
    lam: float = 0.0

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class GranuleSummary:
    cardinalities: np.ndarray
    densities: np.ndarray


@dataclass(frozen=True, eq=False)
class AttributeOrdering:
    ordered_attrs: tuple[int, ...]
    per_attr_sig: np.ndarray      # Sig({a}) for a in ordered_attrs
    per_subset_sig: np.ndarray    # Sig(A_i) for the nested prefixes

    @property
    def subset_prefixes(self) -> list[tuple[int, ...]]:
        return [self.ordered_attrs[: i + 1] for i in range(len(self.ordered_attrs))]


def attribute_epsilon(column: np.ndarray, delta: float) -> float:
    """Neighbourhood threshold std(a) / delta (population std)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return float(np.std(column)) / delta


def relation_from_differences(diff: np.ndarray, eps: float) -> np.ndarray:
    """1 - |d| where |d| <= eps, else 0."""
    return np.where(diff <= eps, 1.0 - diff, 0.0)


def attribute_similarity(ds: MixedDataset, attr: int, delta: float) -> SimilarityMatrix:
    if not 0 <= attr < ds.m:
        raise IndexError(f"attribute {attr} out of range for {ds.m} features")
    col = ds.values[:, attr]
    if ds.schema[attr].kind == "nominal":
        vals = (col[:, None] == col[None, :]).astype(float)
    else:
        eps = attribute_epsilon(col, delta)
        vals = relation_from_differences(np.abs(col[:, None] - col[None, :]), eps)
    return SimilarityMatrix(vals)


def combine_min(mats: Sequence[SimilarityMatrix]) -> SimilarityMatrix:
    if not mats:
        raise ValueError("combine_min needs at least one matrix")
    n = mats[0].n
    if any(m.n != n for m in mats):
        raise ValueError("relation matrices have different sizes")
    out = mats[0].values.copy()
    for m in mats[1:]:
        np.minimum(out, m.values, out=out)
    weighted = all(m.density_weighted for m in mats)
    return SimilarityMatrix(out, weighted, mats[0].lam if weighted else 0.0)


def granule_summary(m: SimilarityMatrix) -> GranuleSummary:
    card = m.values.sum(axis=1)
    return GranuleSummary(card, card / m.n)


def density_weight(m: SimilarityMatrix, lam: float) -> SimilarityMatrix:
    """Attenuate R(x_i, x_j) by exp(-lam * (Den(x_i) - Den(x_j))^2)."""
    if lam < 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    if m.density_weighted:
        raise ValueError("matrix is already density weighted")
    den = granule_summary(m).densities
    factor = np.exp(-lam * (den[:, None] - den[None, :]) ** 2)
    return SimilarityMatrix(m.values * factor, True, float(lam))


def significance_from_densities(densities: np.ndarray) -> float:
    return float(-np.log(np.mean(densities)))


def subset_significance(m: SimilarityMatrix) -> float:
    """-ln of the mean fuzzy granule density; lies in [0, ln n]."""
    return significance_from_densities(granule_summary(m).densities)


RelationFactory = Callable[[int], np.ndarray]


def _weighted(relation: RelationFactory, a: int, lam: float) -> SimilarityMatrix:
    return density_weight(SimilarityMatrix(relation(a)), lam)


def _fold(relation: RelationFactory, m: int, lam: float):
    if m < 1:
        raise ValueError("need at least one attribute")
    sig = np.array([subset_significance(_weighted(relation, a, lam)) for a in range(m)])
    order = tuple(int(a) for a in np.argsort(-sig, kind="stable"))
    acc = None
    prefix_den = []
    for a in order:
        r = _weighted(relation, a, lam).values
        if acc is None:
            acc = r
        else:
            np.minimum(acc, r, out=acc)
        prefix_den.append(acc.sum(axis=1) / acc.shape[0])
    prefix_den = np.array(prefix_den)
    prefix_sig = -np.log(prefix_den.mean(axis=1))
    return AttributeOrdering(order, sig[list(order)], prefix_sig), prefix_den


def order_from_relations(relation: RelationFactory, m: int, lam: float) -> AttributeOrdering:
    """Sort attributes by single-attribute significance (descending, stable) and
    accumulate the significance of each nested prefix.

    ``relation(a)`` returns the plain fuzzy relation matrix of attribute ``a``.
    It is called twice per attribute so that only two n x n matrices are alive
    at any time.
    """
    return _fold(relation, m, lam)[0]


def scores_from_relations(relation: RelationFactory, m: int, lam: float) -> np.ndarray:
    """Outlier score S(x) = 1 - mean_i Sig(A_i) * Den_{A_i}(x) over the prefix chain."""
    ordering, prefix_den = _fold(relation, m, lam)
    return 1.0 - (ordering.per_subset_sig[:, None] * prefix_den).mean(axis=0)


def sample_relation_factory(ds: MixedDataset, delta: float) -> RelationFactory:
    return lambda a: attribute_similarity(ds, a, delta).values


def order_attributes(ds: MixedDataset, delta: float, lam: float) -> AttributeOrdering:
    return order_from_relations(sample_relation_factory(ds, delta), ds.m, lam)


def outlier_scores(ds: MixedDataset, delta: float, lam: float) -> np.ndarray:
    """Granule-density outlier scores of every sample, in input order."""
    return scores_from_relations(sample_relation_factory(ds, delta), ds.m, lam)
