import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from granod.dataset import from_arrays, normalize
from granod.fusion import (
    PipelineConfig, binary_entropy, fuse, map_to_probability, partition, run_pipeline,
    sample_weights, svm_features, threshold_indices, thresholds, view_weight,
)

scores = arrays(np.float64, st.integers(4, 60), elements=st.floats(-5, 5, allow_nan=False))


def test_mapping_hand_example():
    p = map_to_probability([0.9, 0.7, 0.5, 0.3], 0.5)
    np.testing.assert_allclose(p, [1.0, 0.5, 0.5, 0.0], atol=1e-9)


def test_mapping_constant_scores_carry_no_information():
    # every score ties with S^o, so all land on the 0.5 branch boundary
    p = map_to_probability(np.full(10, 0.3), 0.2)
    np.testing.assert_array_equal(p, 0.5)
    assert view_weight(p) == 0.0


def test_mapping_rejects_too_large_t():
    with pytest.raises(ValueError):
        map_to_probability([1.0, 2.0], 0.9)


@given(scores, st.floats(0.01, 0.6))
def test_mapping_is_monotone_and_splits_at_o(s, t):
    o = int(np.ceil(t * s.size - 1e-9))
    if not 1 <= o < s.size:
        return
    p = map_to_probability(s, t)
    order = np.argsort(s, kind="stable")
    assert np.all(np.diff(p[order]) >= -1e-12)
    assert np.all((p >= 0) & (p <= 1))
    top = s >= np.sort(s)[::-1][o - 1]
    assert np.all(p[top] >= 0.5) and np.all(p[~top] <= 0.5)


def test_view_weight_examples():
    assert view_weight(np.full(6, 0.5)) == 0.0
    assert view_weight([0.0, 1.0, 1.0]) == 1.0
    assert view_weight([1.0, 0.0, 0.5, 0.5]) == pytest.approx(0.5)
    assert binary_entropy([0.5])[0] == 1.0


def test_sample_weight_examples():
    assert sample_weights([[0.0], [0.0]], [0.7, 0.3])[0] == 1.0
    assert sample_weights([[1.0], [1.0]], [1.0, 1.0])[0] == 0.0
    np.testing.assert_array_equal(sample_weights([[1.0, 0.3]], [0.0]), [1.0, 1.0])


def test_fuse_examples():
    np.testing.assert_array_equal(fuse([[0.2, 0.9]], [0.4]), [0.2, 0.9])
    assert fuse([[0.8], [0.4]], [1.0, 1.0])[0] == pytest.approx(0.6)
    assert fuse([[0.8], [0.4]], [0.0, 0.0])[0] == pytest.approx(0.6)


@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 20)), elements=st.floats(0, 1)),
       st.data())
def test_fuse_is_a_convex_combination(P, data):
    nu = np.array(data.draw(st.lists(st.floats(0, 1), min_size=P.shape[0], max_size=P.shape[0])))
    f = fuse(P, nu)
    assert np.all(f >= P.min(axis=0) - 1e-12) and np.all(f <= P.max(axis=0) + 1e-12)


def test_threshold_and_partition_hand_example():
    P = np.arange(1, 101) / 100
    assert threshold_indices(100, 0.1, 0.7) == (97, 27)
    alpha, beta = thresholds(P, 0.1, 0.7)
    assert (alpha, beta) == (0.97, 0.27)
    pos, bnd, neg = partition(P, alpha, beta)
    assert (pos.size, bnd.size, neg.size) == (4, 69, 27)


def test_threshold_degenerate_cases():
    P = np.linspace(0, 1, 50)
    a, b = thresholds(P, 0.2, 0.0)
    assert a == b
    assert partition(P, a, b)[1].size == 0
    const = np.full(8, 0.4)
    a, b = thresholds(const, 0.25)
    assert a == b == 0.4
    pos, bnd, neg = partition(const, a, b)
    assert pos.size == 8 and bnd.size == neg.size == 0
    with pytest.raises(ValueError):
        partition(P, 0.1, 0.2)


@given(st.integers(5, 200), st.floats(0.01, 0.5), st.floats(0.0, 1.0))
def test_region_counts_on_distinct_values(n, t, d):
    P = np.random.default_rng(n).permutation(n) / n
    try:
        ia, ib = threshold_indices(n, t, d)
    except ValueError:
        return
    pos, bnd, neg = partition(P, *thresholds(P, t, d))
    assert pos.size == n - ia + 1
    assert neg.size == (ib if ib < ia else ia - 1)
    cover = np.sort(np.concatenate([pos, bnd, neg]))
    np.testing.assert_array_equal(cover, np.arange(n))


def test_svm_features_one_hot_nominals():
    ds = from_arrays([[0, 0.5], [2, 0.1], [1, 0.0]], kinds=["nominal", "numerical"])
    F = svm_features(ds)
    np.testing.assert_array_equal(F, [[1, 0, 0, 0.5], [0, 0, 1, 0.1], [0, 1, 0, 0.0]])


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(delta=0, lam=1, contamination=0.1)
    with pytest.raises(ValueError):
        PipelineConfig(delta=1, lam=-1, contamination=0.1)
    with pytest.raises(ValueError):
        PipelineConfig(delta=1, lam=1, contamination=1.0)


def test_identical_rows_fall_back_to_constant_output():
    ds = normalize(from_arrays(np.ones((12, 3))))
    r = run_pipeline(ds, PipelineConfig(0.5, 10.0, 0.2))
    assert np.all(r.final == r.final[0])
    assert r.fell_back or np.ptp(r.final) == 0


def _blob_with_outliers(seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0.5, 0.05, size=(60, 2)), rng.uniform(0, 1, size=(6, 2))])
    return normalize(from_arrays(X, labels=[0] * 60 + [1] * 6))


def test_pipeline_outputs_are_well_formed():
    ds = _blob_with_outliers()
    r = run_pipeline(ds, PipelineConfig(0.5, 10.0, 0.1))
    s = r.state
    assert r.final.shape == (ds.n,) and np.all((r.final >= 0) & (r.final <= 1))
    assert np.all((s.fused >= 0) & (s.fused <= 1))
    assert np.all((s.sample_weights >= 0) & (s.sample_weights <= 1))
    assert s.beta <= s.alpha
    assert len(s.per_view) == len(r.hierarchy)
    assert set(s.region_labels()) <= {"POS", "BND", "NEG"}


def test_pipeline_is_deterministic():
    ds = _blob_with_outliers(3)
    cfg = PipelineConfig(0.5, 10.0, 0.1)
    a, b = run_pipeline(ds, cfg), run_pipeline(ds, cfg)
    assert a.final.tobytes() == b.final.tobytes()
