import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from minimaxsplit import (
    CLASSIFICATION,
    REGRESSION,
    ConfigError,
    DataError,
    Dataset,
    ForestConfig,
    ForestModel,
    GrowConfig,
    forest_from_json,
    forest_to_json,
    grow,
    load_model,
    model_to_json,
    train_forest,
    tree_to_json,
)


def toy_regression(seed=0, n=200, d=3):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(d, n))
    y = np.sin(6 * X[0]) + 0.5 * X[1] + 0.1 * rng.normal(size=n)
    return Dataset(features=X, targets=y, task=REGRESSION)


class TestSingleTreeEquivalence:
    def test_one_tree_no_bootstrap_equals_grow(self):
        data = toy_regression()
        forest = train_forest(data, ForestConfig(criterion="minimax", n_trees=1,
                                                 max_depth=4, bootstrap=False))
        alone = grow(data, GrowConfig(criterion="minimax", max_depth=4))
        assert tree_to_json(forest.trees[0]) == tree_to_json(alone)
        X = data.features.T[:20]
        np.testing.assert_array_equal(forest.predict(X), alone.predict(X))
        np.testing.assert_array_equal(forest.bootstrap_indices[0], np.arange(200))


class TestAveraging:
    def test_ensemble_never_beats_jensen(self):
        """MSE of the averaged prediction is at most the average per-tree MSE
        (bias-variance identity for a plain mean)."""
        data = toy_regression(seed=1)
        test = toy_regression(seed=2)
        X, y = test.features.T, test.targets
        forest = train_forest(data, ForestConfig(criterion="variance", n_trees=20,
                                                 max_depth=6), seed=5)
        ens = float(np.mean((forest.predict(X) - y) ** 2))
        per_tree = [float(np.mean((t.predict(X) - y) ** 2)) for t in forest.trees]
        assert ens <= np.mean(per_tree) + 1e-10

    def test_prediction_is_tree_mean(self):
        data = toy_regression(seed=3)
        forest = train_forest(data, ForestConfig(criterion="minimax", n_trees=7,
                                                 max_depth=3), seed=9)
        X = data.features.T[:15]
        want = np.mean([t.predict_value(X) for t in forest.trees], axis=0)
        np.testing.assert_array_equal(forest.predict(X), want)


class TestDeterminism:
    def test_same_seed_same_bytes(self):
        data = toy_regression(seed=4)
        cfg = ForestConfig(criterion="minimax", n_trees=6, max_depth=4, m_try=2)
        a = train_forest(data, cfg, seed=21)
        b = train_forest(data, cfg, seed=21)
        assert forest_to_json(a) == forest_to_json(b)
        c = train_forest(data, cfg, seed=22)
        assert forest_to_json(c) != forest_to_json(a)

    def test_threads_do_not_change_bytes(self):
        data = toy_regression(seed=6)
        cfg = ForestConfig(criterion="variance", n_trees=8, max_depth=4, m_try=2)
        seq = train_forest(data, cfg, seed=3, threads=1)
        par = train_forest(data, cfg, seed=3, threads=4)
        assert forest_to_json(seq) == forest_to_json(par)

    def test_thread_validation(self):
        data = toy_regression()
        with pytest.raises(ConfigError):
            train_forest(data, ForestConfig(criterion="minimax", n_trees=2,
                                            max_depth=2), threads=0)


class TestCyclicPlans:
    def test_m_try_one_maps_to_plain_minimax(self):
        data = toy_regression(seed=8)
        forest = train_forest(data, ForestConfig(criterion="cyclic_minimax",
                                                 n_trees=3, max_depth=3, m_try=1))
        assert forest.criterion == "cyclic_minimax"
        assert all(t.criterion == "minimax" for t in forest.trees)

    def test_full_feature_set_keeps_schedule(self):
        data = toy_regression(seed=8)
        for m_try in (None, 3):
            forest = train_forest(data, ForestConfig(criterion="cyclic_minimax",
                                                     n_trees=2, max_depth=3,
                                                     m_try=m_try))
            assert all(t.criterion == "cyclic_minimax" for t in forest.trees)

    def test_partial_subsets_rejected(self):
        data = toy_regression(seed=8)
        with pytest.raises(ConfigError):
            train_forest(data, ForestConfig(criterion="cyclic_minimax", n_trees=2,
                                            max_depth=2, m_try=2))

    def test_m_try_over_dimension_rejected(self):
        data = toy_regression()
        with pytest.raises(ConfigError):
            train_forest(data, ForestConfig(criterion="minimax", n_trees=2,
                                            max_depth=2, m_try=4))


class TestClassificationVoting:
    def make(self, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-1, 1, size=(2, 300))
        y = np.where(X[0] + 0.3 * X[1] > 0, 1.0, -1.0)
        return Dataset(features=X, targets=y, task=CLASSIFICATION)

    def test_votes_recover_signal(self):
        data = self.make()
        forest = train_forest(data, ForestConfig(criterion="entropy_minimax",
                                                 n_trees=15, max_depth=6), seed=2)
        grid = np.array([[0.8, 0.0], [-0.8, 0.0]])
        np.testing.assert_array_equal(forest.predict(grid), [1.0, -1.0])

    def test_value_is_mean_log_odds(self):
        data = self.make(seed=1)
        forest = train_forest(data, ForestConfig(criterion="entropy_sum",
                                                 n_trees=5, max_depth=4), seed=4)
        X = data.features.T[:10]
        want = np.mean([t.predict_log_odds(X) for t in forest.trees], axis=0)
        np.testing.assert_array_equal(forest.predict_value(X), want)
        labels = forest.predict(X)
        np.testing.assert_array_equal(labels, np.where(want >= 0, 1.0, -1.0))


class TestSerialization:
    def test_round_trip_bytes_and_predictions(self):
        data = toy_regression(seed=10)
        forest = train_forest(data, ForestConfig(criterion="minimax", n_trees=4,
                                                 max_depth=4), seed=13)
        text = forest_to_json(forest)
        back = forest_from_json(text)
        assert forest_to_json(back) == text
        X = data.features.T[:25]
        np.testing.assert_array_equal(back.predict(X), forest.predict(X))

    def test_load_model_dispatch(self):
        data = toy_regression(seed=12)
        tree = grow(data, GrowConfig(criterion="variance", max_depth=3))
        forest = train_forest(data, ForestConfig(criterion="variance", n_trees=2,
                                                 max_depth=3))
        from minimaxsplit import TreeModel
        assert isinstance(load_model(model_to_json(tree)), TreeModel)
        assert isinstance(load_model(model_to_json(forest)), ForestModel)
        with pytest.raises(DataError):
            load_model("{\"format\": \"mystery\"}")
        with pytest.raises(DataError):
            load_model("not json at all")
        with pytest.raises(ConfigError):
            model_to_json(object())

    def test_forest_json_rejects_tree_document(self):
        data = toy_regression(seed=12)
        tree = grow(data, GrowConfig(criterion="variance", max_depth=2))
        with pytest.raises(DataError):
            forest_from_json(tree_to_json(tree))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_bootstrap_indices_are_recorded(seed):
    data = toy_regression(seed=seed % 100, n=60)
    forest = train_forest(data, ForestConfig(criterion="variance", n_trees=3,
                                             max_depth=2), seed=seed)
    assert len(forest.bootstrap_indices) == 3
    for idx in forest.bootstrap_indices:
        assert idx.shape == (60,)
        assert idx.min() >= 0 and idx.max() < 60
    # distinct trees see distinct resamples almost surely
    assert not np.array_equal(forest.bootstrap_indices[0],
                              forest.bootstrap_indices[1])
