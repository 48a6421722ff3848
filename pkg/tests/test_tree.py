import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minimaxsplit import (
    CLASSIFICATION,
    REGRESSION,
    ConfigError,
    DataError,
    Dataset,
    GrowConfig,
    classify,
    grow,
    partition_report,
    tree_from_json,
    tree_to_json,
)


def small_regression():
    return Dataset(features=[[0.0, 1, 2, 3]], targets=[0.0, 4, 5, 9],
                   task=REGRESSION)


class TestStumpExample:
    """One fully worked stump: every number checkable by hand."""

    def grown(self):
        return grow(small_regression(), GrowConfig(criterion="minimax", max_depth=1))

    def test_structure(self):
        t = self.grown()
        assert t.n_nodes == 3 and t.n_leaves == 2
        assert t.feature[0] == 0 and t.threshold[0] == 1.5

    def test_leaf_values(self):
        t = self.grown()
        assert t.predict([0.5]) == 2.0
        assert t.predict([3.0]) == 7.0
        np.testing.assert_array_equal(t.predict([[0.0], [1.0], [2.0], [3.0]]),
                                      [2.0, 2.0, 7.0, 7.0])

    def test_risk_trace(self):
        t = self.grown()
        # root SSE 41 over 4 points, then two children of SSE 8 each
        assert t.risk_trace == [10.25, 4.0]

    def test_leaf_reasons(self):
        t = self.grown()
        assert t.leaf_reason[0] is None
        assert t.leaf_reason[1] == "depth" and t.leaf_reason[2] == "depth"

    def test_partition_report(self):
        rep = partition_report(self.grown())
        assert rep.n_cells == 2
        assert rep.cell_counts == (2, 2)
        assert rep.cell_values == (2.0, 7.0)
        assert rep.size_mean == 2.0 and rep.size_sd == 0.0
        assert rep.risk_sum == 16.0 and rep.risk_mean == 4.0

    def test_cell_bounds(self):
        t = self.grown()
        lows, highs = t.cell_bounds()
        assert lows[0, 0] == -math.inf and highs[0, 0] == math.inf
        assert highs[int(t.left[0]), 0] == 1.5
        assert lows[int(t.right[0]), 0] == 1.5

    def test_depth_zero_truncation(self):
        t = self.grown()
        assert t.predict([0.0], max_depth=0) == 4.5
        assert t.partition_ids(0).tolist() == [0]


class TestLeafSizeSplit:
    def test_two_eight_partition(self):
        y = [100.0, 100] + [0.0] * 8
        data = Dataset(features=[list(range(10))], targets=y, task=REGRESSION)
        t = grow(data, GrowConfig(criterion="variance", max_depth=1))
        rep = partition_report(t)
        assert sorted(rep.cell_counts) == [2, 8]
        assert rep.size_mean == 5.0 and rep.size_sd == 3.0
        assert rep.risk_sum == 0.0 and rep.max_risk == 0.0


class TestStoppingRules:
    def test_constant_target(self):
        data = Dataset(features=[[0.0, 1, 2]], targets=[5.0, 5, 5], task=REGRESSION)
        t = grow(data, GrowConfig(criterion="minimax", max_depth=4))
        assert t.n_nodes == 1 and t.leaf_reason[0] == "constant_target"

    def test_constant_features(self):
        data = Dataset(features=[[2.0, 2, 2]], targets=[0.0, 1, 2], task=REGRESSION)
        t = grow(data, GrowConfig(criterion="minimax", max_depth=4))
        assert t.n_nodes == 1 and t.leaf_reason[0] == "constant_features"

    def test_n_min_is_strict(self):
        data = small_regression()
        blocked = grow(data, GrowConfig(criterion="minimax", max_depth=3, n_min=4))
        assert blocked.n_nodes == 1 and blocked.leaf_reason[0] == "n_min"
        open_ = grow(data, GrowConfig(criterion="minimax", max_depth=1, n_min=3))
        assert open_.n_nodes == 3

    def test_no_valid_split_under_feature_draws(self):
        # with m_try=1 a node may draw the constant feature and must give up
        X = [[7.0, 7, 7, 7], [0.0, 1, 2, 3]]
        data = Dataset(features=X, targets=[0.0, 4, 5, 9], task=REGRESSION)
        reasons = set()
        for seed in range(16):
            t = grow(data, GrowConfig(criterion="variance", max_depth=3,
                                      m_try=1, seed=seed))
            reasons.update(r for r in t.leaf_reason if r is not None)
        assert "no_valid_split" in reasons

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            GrowConfig(criterion="minimax", max_depth=-1)
        with pytest.raises(ConfigError):
            GrowConfig(criterion="minimax", max_depth=2, n_min=0)
        with pytest.raises(ConfigError):
            GrowConfig(criterion="minimax", max_depth=2,
                       fixed_features=(0,), m_try=1)
        with pytest.raises(ConfigError):
            GrowConfig(criterion="minimax", max_depth=2, m_try=0)

    def test_grow_validation(self):
        data = small_regression()
        with pytest.raises(ConfigError):
            grow(data, GrowConfig(criterion="minimax", max_depth=2, m_try=5))
        with pytest.raises(ConfigError):
            grow(data, GrowConfig(criterion="cyclic_minimax", max_depth=2, m_try=1))
        with pytest.raises(ConfigError):
            grow(data, GrowConfig(criterion="entropy_sum", max_depth=2))
        with pytest.raises(ConfigError):
            grow(data, GrowConfig(criterion="minimax", max_depth=2,
                                  fixed_features=(3,)))


class TestCyclicPersistence:
    """A node whose scheduled feature is constant waits for the next level
    instead of dying; split_level records where it finally cut."""

    def data(self):
        return Dataset(features=[[5.0, 5, 5, 5], [0.0, 1, 2, 3]],
                       targets=[0.0, 0, 10, 10], task=REGRESSION)

    def test_root_waits_one_level(self):
        t = grow(self.data(), GrowConfig(criterion="cyclic_minimax", max_depth=2))
        assert t.split_level[0] == 1 and t.depth[0] == 0
        assert t.feature[0] == 1 and t.threshold[0] == 1.5
        np.testing.assert_array_equal(
            t.predict([[0.0, 0.5], [0.0, 2.5]]), [0.0, 10.0])

    def test_truncated_partitions_follow_split_level(self):
        t = grow(self.data(), GrowConfig(criterion="cyclic_minimax", max_depth=2))
        assert t.partition_ids(1).tolist() == [0]
        assert len(t.partition_ids(2)) == 2
        # cutting at depth 1 therefore predicts the root mean everywhere
        assert t.predict([0.0, 3.0], max_depth=1) == 5.0

    def test_exhausted_schedule(self):
        # both features constant from the start: plain constant-features leaf
        data = Dataset(features=[[1.0, 1], [2.0, 2]], targets=[0.0, 1],
                       task=REGRESSION)
        t = grow(data, GrowConfig(criterion="cyclic_minimax", max_depth=3))
        assert t.n_nodes == 1 and t.leaf_reason[0] == "constant_features"


class TestClassification:
    def data(self):
        return Dataset(features=[[0.0, 1, 2, 3, 4, 5, 6]],
                       targets=[1.0, 1, 1, 1, -1, -1, -1],
                       task=CLASSIFICATION)

    def test_pure_leaves_and_smoothed_log_odds(self):
        t = grow(self.data(), GrowConfig(criterion="entropy_minimax", max_depth=1))
        assert t.threshold[0] == 3.5
        labels, lo = classify(t, [[1.0], [5.0]])
        np.testing.assert_array_equal(labels, [1.0, -1.0])
        assert lo[0] == pytest.approx(math.log(4.5 / 0.5), abs=1e-12)
        assert lo[1] == pytest.approx(math.log(0.5 / 3.5), abs=1e-12)

    def test_label_threshold_at_half(self):
        t = grow(self.data(), GrowConfig(criterion="entropy_minimax", max_depth=0))
        # root has 4/7 positives -> +1
        assert t.predict([2.0]) == 1.0

    def test_classify_rejects_regression_tree(self):
        t = grow(small_regression(), GrowConfig(criterion="minimax", max_depth=1))
        with pytest.raises(ConfigError):
            classify(t, [[0.0]])
        with pytest.raises(ConfigError):
            t.predict_log_odds([[0.0]])


class TestSerialization:
    def test_round_trip_is_byte_stable(self):
        data = Dataset(features=[[0.0, 1, 2, 3], [3.0, 1, 0, 2]],
                       targets=[0.0, 4, 5, 9], task=REGRESSION)
        t = grow(data, GrowConfig(criterion="minimax", max_depth=3))
        text = tree_to_json(t)
        again = tree_to_json(tree_from_json(text))
        assert text == again
        doc = json.loads(text)
        assert doc["format"] == "tree-v1"

    def test_round_trip_preserves_predictions(self):
        rng = np.random.default_rng(7)
        data = Dataset(features=rng.normal(size=(3, 200)),
                       targets=rng.normal(size=200), task=REGRESSION)
        t = grow(data, GrowConfig(criterion="variance", max_depth=5))
        back = tree_from_json(tree_to_json(t))
        X = rng.normal(size=(50, 3))
        np.testing.assert_array_equal(t.predict(X), back.predict(X))
        assert back.risk_trace == t.risk_trace
        assert back.leaf_reason == t.leaf_reason

    def test_classification_round_trip(self):
        rng = np.random.default_rng(11)
        data = Dataset(features=rng.normal(size=(2, 80)),
                       targets=np.where(rng.random(80) < 0.5, -1.0, 1.0),
                       task=CLASSIFICATION)
        t = grow(data, GrowConfig(criterion="entropy_sum", max_depth=4))
        back = tree_from_json(tree_to_json(t))
        X = rng.normal(size=(30, 2))
        np.testing.assert_array_equal(t.predict(X), back.predict(X))
        np.testing.assert_array_equal(t.predict_log_odds(X), back.predict_log_odds(X))

    def test_bad_documents(self):
        with pytest.raises(DataError):
            tree_from_json("{\"format\": \"something-else\"}")
        with pytest.raises(DataError):
            tree_from_json("[]")


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1),
       crit=st.sampled_from(["variance", "minimax", "cyclic_minimax"]))
def test_trace_never_increases(seed, crit):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 200))
    d = int(rng.integers(1, 4))
    data = Dataset(features=rng.normal(size=(d, n)),
                   targets=rng.normal(size=n), task=REGRESSION)
    depth = int(rng.integers(0, 7))
    t = grow(data, GrowConfig(criterion=crit, max_depth=depth))
    trace = t.risk_trace
    assert len(trace) == depth + 1
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert trace[0] == pytest.approx(float(np.var(data.targets)), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_partitions_cover_training_data(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 150))
    data = Dataset(features=rng.normal(size=(2, n)),
                   targets=rng.normal(size=n), task=REGRESSION)
    t = grow(data, GrowConfig(criterion="minimax", max_depth=5))
    X = data.features.T
    for cut in (0, 1, 3, None):
        ids = t.partition_ids(cut)
        hits = t.apply(X, cut)
        assert set(np.unique(hits)) <= set(ids.tolist())
        counts = {int(i): int(c) for i, c in zip(*np.unique(hits, return_counts=True))}
        for i in ids:
            assert counts.get(int(i), 0) == int(t.count[i])
    rep = partition_report(t)
    assert sum(rep.cell_counts) == n
    assert rep.risk_mean == pytest.approx(t.risk_trace[-1], rel=1e-9, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_feature_subsampling_is_reproducible(seed):
    rng = np.random.default_rng(seed)
    data = Dataset(features=rng.normal(size=(4, 100)),
                   targets=rng.normal(size=100), task=REGRESSION)
    cfg = GrowConfig(criterion="minimax", max_depth=4, m_try=2, seed=seed)
    a = grow(data, cfg)
    b = grow(data, cfg)
    assert tree_to_json(a) == tree_to_json(b)
