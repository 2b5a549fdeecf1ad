"""Gradient-boosted relation models: split kernel contract, tree
fitting, loss monotonicity, determinism, serialization, and the
backend-equivalence guarantee."""

from __future__ import annotations

import json
import logging

import numpy as np
import pytest

from helpers import make_fv, tree_features
from ttpmine.features.layout import FeatureLayout
from ttpmine.gbdt.ensemble import (
    GbdtEnsemble,
    GbdtTrainingError,
    TrainConfig,
    _downsample_rows,
    ensemble_from_dict,
    ensemble_to_dict,
    load_ensemble,
    predict,
    predict_batch,
    save_ensemble,
    train,
)
from ttpmine.gbdt.kernel import BACKEND, available_backends, best_split
from ttpmine.gbdt.tree import (
    LEAF_VALUE_CAP,
    fit_tree,
    predict_tree,
    remap_tree_features,
    tree_max_feature,
)
from ttpmine.labels import ALL_LABELS, BEFORE, CONCURRENT, NULL, SIMULTANEOUS_OVERLAP


def _sorted_columns(X, residuals):
    """Presorted Fortran (vals, grads) pair the kernel contract expects."""
    order = np.argsort(X, axis=0, kind="stable")
    vals = np.asfortranarray(np.take_along_axis(X, order, axis=0))
    grads = np.asfortranarray(residuals[order])
    return vals, grads


class TestSplitKernel:
    def test_two_point_split(self):
        vals = np.asfortranarray([[0.0], [1.0]])
        grads = np.asfortranarray([[-0.5], [0.5]])
        feat, pos, gain = best_split(vals, grads)
        assert (feat, pos) == (0, 0)
        # gl^2/1 + gr^2/1 - (gl+gr)^2/2 = .25 + .25 - 0.
        assert gain == pytest.approx(0.5, abs=1e-15)

    def test_no_split_on_constant_column(self):
        vals = np.asfortranarray([[1.0], [1.0], [1.0]])
        grads = np.asfortranarray([[1.0], [-1.0], [0.0]])
        assert best_split(vals, grads) == (-1, -1, 0.0)

    def test_degenerate_shapes(self):
        one = np.asfortranarray([[3.0]])
        assert best_split(one, one.copy()) == (-1, -1, 0.0)
        empty = np.zeros((4, 0), order="F")
        assert best_split(empty, empty.copy()) == (-1, -1, 0.0)

    def test_tie_prefers_lowest_feature_then_position(self):
        # Identical columns: both features give the same best gain; the
        # first-maximum rule must pick feature 0.
        col = np.array([[0.0], [1.0], [2.0], [3.0]])
        grad = np.array([[-1.0], [-1.0], [1.0], [1.0]])
        vals = np.asfortranarray(np.hstack([col, col]))
        grads = np.asfortranarray(np.hstack([grad, grad]))
        feat, pos, _ = best_split(vals, grads)
        assert feat == 0
        assert pos == 1

    def test_split_never_lands_between_equal_values(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            m = int(rng.integers(2, 12))
            X = rng.integers(0, 3, size=(m, 3)).astype(np.float64)
            r = rng.normal(size=m)
            vals, grads = _sorted_columns(X, r)
            feat, pos, gain = best_split(vals, grads)
            if feat >= 0:
                assert vals[pos, feat] < vals[pos + 1, feat]
                assert gain > 0 or gain == pytest.approx(0.0, abs=1e-12)


class TestBackendEquivalence:
    def test_compiled_backend_present(self):
        backends = available_backends()
        assert "python" in backends
        assert BACKEND in backends

    def test_bit_identical_split_choices(self):
        backends = available_backends()
        if len(backends) < 2:
            pytest.skip("only one split backend built")
        rng = np.random.default_rng(20260822)
        for case in range(60):
            m = int(rng.integers(2, 40))
            nf = int(rng.integers(1, 8))
            if case % 3 == 0:
                X = rng.integers(0, 4, size=(m, nf)).astype(np.float64)
            else:
                X = rng.normal(size=(m, nf))
            r = rng.normal(size=m)
            vals, grads = _sorted_columns(X, r)
            results = {
                name: fn(vals.copy(order="F"), grads.copy(order="F"))
                for name, fn in backends.items()
            }
            (fa, pa, ga), (fb, pb, gb) = results["python"], results[BACKEND]
            assert (fa, pa) == (fb, pb), case
            assert ga == gb, case  # exact float equality, not approx

    def test_identical_trees_per_backend(self):
        backends = available_backends()
        if len(backends) < 2:
            pytest.skip("only one split backend built")
        rng = np.random.default_rng(9)
        for _ in range(10):
            m = int(rng.integers(4, 30))
            X = rng.normal(size=(m, 5))
            r = rng.normal(size=m)
            h = np.full(m, 0.25)
            trees = [
                fit_tree(X, r, h, max_depth=3, split_fn=fn)
                for fn in backends.values()
            ]
            first = json.dumps(trees[0], sort_keys=True)
            for other in trees[1:]:
                assert json.dumps(other, sort_keys=True) == first


class TestFitTree:
    def test_stump_fixture(self):
        tree = fit_tree(
            np.array([[0.0], [1.0]]),
            np.array([-0.5, 0.5]),
            np.array([0.25, 0.25]),
            max_depth=1,
        )
        assert tree["feature"] == 0
        assert tree["threshold"] == 0.5
        assert tree["left"] == {"value": -2.0}  # -0.5/0.25
        assert tree["right"] == {"value": 2.0}

    def test_depth_zero_is_single_leaf(self):
        tree = fit_tree(
            np.array([[0.0], [1.0]]),
            np.array([1.0, 3.0]),
            np.array([0.5, 0.5]),
            max_depth=0,
        )
        assert tree == {"value": 4.0}  # 4.0 / 1.0

    def test_leaf_value_cap(self):
        tree = fit_tree(
            np.array([[0.0], [1.0]]),
            np.array([-5.0, 5.0]),
            np.array([0.25, 0.25]),
            max_depth=1,
        )
        assert tree["left"]["value"] == -LEAF_VALUE_CAP
        assert tree["right"]["value"] == LEAF_VALUE_CAP

    def test_zero_hessian_leaf_is_zero(self):
        tree = fit_tree(
            np.array([[0.0]]),
            np.array([3.0]),
            np.array([0.0]),
            max_depth=2,
        )
        assert tree == {"value": 0.0}

    def test_constant_features_make_leaf(self):
        tree = fit_tree(
            np.ones((4, 2)),
            np.array([1.0, -1.0, 1.0, -1.0]),
            np.full(4, 0.25),
            max_depth=3,
        )
        assert "value" in tree

    def test_partition_matches_threshold(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            m = int(rng.integers(2, 25))
            X = rng.normal(size=(m, 4))
            r = rng.normal(size=m)
            tree = fit_tree(X, r, np.full(m, 0.25), max_depth=3)

            def check(node, rows):
                if "value" in node:
                    assert abs(node["value"]) <= LEAF_VALUE_CAP
                    return
                mask = rows[:, node["feature"]] <= node["threshold"]
                assert 0 < mask.sum() < len(rows)  # both children nonempty
                check(node["left"], rows[mask])
                check(node["right"], rows[~mask])

            check(tree, X)

    def test_predict_tree_routes_rows(self):
        tree = {
            "feature": 1,
            "threshold": 0.5,
            "left": {"value": -1.0},
            "right": {"value": 3.0},
        }
        X = np.array([[9.0, 0.0], [9.0, 1.0], [9.0, 0.5]])
        np.testing.assert_array_equal(predict_tree(tree, X), [-1.0, 3.0, -1.0])

    def test_remap_and_max_feature(self):
        tree = {
            "feature": 0,
            "threshold": 0.5,
            "left": {"value": -1.0},
            "right": {"feature": 2, "threshold": 1.0, "left": {"value": 0.0}, "right": {"value": 1.0}},
        }
        mapping = np.array([10, 40, 53])
        remapped = remap_tree_features(tree, mapping)
        assert remapped["feature"] == 10
        assert remapped["right"]["feature"] == 53
        assert tree_max_feature(remapped) == 53
        assert tree_max_feature({"value": 1.0}) == -1


class TestTrainConfig:
    def test_defaults(self):
        config = TrainConfig()
        assert config.trees == 200
        assert config.max_depth == 3
        assert config.learning_rate == 0.1
        assert config.negative_downsample_ratio == 10.0
        assert config.seed == 0
        assert config.decision_threshold == 0.5

    def test_validation(self):
        with pytest.raises(ValueError, match="trees"):
            TrainConfig(trees=0)
        with pytest.raises(ValueError, match="max_depth"):
            TrainConfig(max_depth=0)
        with pytest.raises(ValueError, match="learning_rate"):
            TrainConfig(learning_rate=0.0)
        with pytest.raises(ValueError, match="learning_rate"):
            TrainConfig(learning_rate=1.5)
        with pytest.raises(ValueError, match="negative_downsample_ratio"):
            TrainConfig(negative_downsample_ratio=0.0)
        with pytest.raises(ValueError, match="decision_threshold"):
            TrainConfig(decision_threshold=1.0)

    def test_dict_round_trip(self):
        config = TrainConfig(trees=30, max_depth=2, seed=7)
        assert TrainConfig.from_dict(config.to_dict()) == config
        assert TrainConfig.from_dict({**config.to_dict(), "extra": 1}) == config


def _separable_data(n_per_side=12, n_features=8, signal_slot=1):
    features, labels = [], []
    for k in range(2 * n_per_side):
        values = np.zeros(n_features)
        positive = k < n_per_side
        values[signal_slot] = 1.0 if positive else 0.0
        features.append(make_fv(values, report_id=f"r{k:02d}"))
        labels.append(frozenset({BEFORE}) if positive else frozenset({NULL}))
    return features, labels


def _random_training_data(rng, n_rows, n_features):
    features, labels = [], []
    for k in range(n_rows):
        values = rng.normal(size=n_features)
        features.append(make_fv(values, report_id=f"r{k:02d}"))
        positives = frozenset(lab for lab in ALL_LABELS[:3] if rng.random() < 0.3)
        labels.append(positives or frozenset({NULL}))
    return features, labels


class TestDownsampling:
    LABELS = [
        frozenset({NULL}),
        frozenset({NULL}),
        frozenset({BEFORE}),
        frozenset({NULL}),
        frozenset({BEFORE}),
        frozenset({NULL}),
        frozenset({NULL}),
    ]

    def test_cap_and_determinism(self):
        y = np.array([1.0 if BEFORE in labs else 0.0 for labs in self.LABELS])
        config = TrainConfig(negative_downsample_ratio=1.0, seed=3)
        rows = _downsample_rows(0, self.LABELS, y, config)
        again = _downsample_rows(0, self.LABELS, y, config)
        np.testing.assert_array_equal(rows, again)
        assert {2, 4} <= set(rows.tolist())  # positives always kept
        # 2 positives at ratio 1.0 keep at most 2 of the 5 NULL-only rows.
        assert len(rows) == 4
        assert np.array_equal(rows, np.sort(rows))

    def test_generous_ratio_keeps_everything(self):
        y = np.array([1.0 if BEFORE in labs else 0.0 for labs in self.LABELS])
        rows = _downsample_rows(0, self.LABELS, y, TrainConfig())
        np.testing.assert_array_equal(rows, np.arange(len(self.LABELS)))

    def test_label_index_changes_sample(self):
        labels = [frozenset({NULL})] * 40 + [frozenset({BEFORE})]
        y = np.zeros(41)
        y[40] = 1.0
        config = TrainConfig(negative_downsample_ratio=5.0, seed=0)
        a = _downsample_rows(0, labels, y, config)
        b = _downsample_rows(1, labels, y, config)
        assert len(a) == len(b) == 6
        assert not np.array_equal(a, b)

    def test_mixed_label_rows_never_dropped(self):
        labels = [frozenset({NULL})] * 30 + [frozenset({BEFORE, SIMULTANEOUS_OVERLAP})]
        y = np.zeros(31)
        y[30] = 1.0
        rows = _downsample_rows(0, labels, y, TrainConfig(negative_downsample_ratio=1.0))
        assert 30 in rows.tolist()
        assert len(rows) == 2


class TestTraining:
    def test_loss_non_increasing_on_random_data(self):
        rng = np.random.default_rng(20260822)
        config = TrainConfig(trees=15, max_depth=3, seed=1)
        for _ in range(20):
            n_rows = int(rng.integers(8, 40))
            features, labels = _random_training_data(rng, n_rows, n_features=12)
            model = train(features, labels, config)
            for lm in model.models.values():
                if lm.degenerate:
                    continue
                assert len(lm.loss_curve) == config.trees + 1
                curve = lm.loss_curve
                assert all(b <= a + 1e-9 for a, b in zip(curve, curve[1:]))

    def test_separable_fixture_perfect_f1(self):
        features, labels = _separable_data()
        model = train(features, labels, TrainConfig(trees=60, max_depth=2))
        predictions = predict_batch(model, features)
        assert all(
            (BEFORE in pred.labels) == (BEFORE in truth)
            for pred, truth in zip(predictions, labels)
        )
        # Positive probabilities end far from the boundary.
        assert all(
            pred.probabilities[BEFORE] > 0.9
            for pred, truth in zip(predictions, labels)
            if BEFORE in truth
        )

    def test_same_seed_bit_identical_model(self):
        rng = np.random.default_rng(4)
        features, labels = _random_training_data(rng, 30, n_features=10)
        config = TrainConfig(trees=12, max_depth=3, seed=5)
        a = train(features, labels, config)
        b = train(features, labels, config)
        assert json.dumps(ensemble_to_dict(a), sort_keys=True) == json.dumps(
            ensemble_to_dict(b), sort_keys=True
        )

    def test_degenerate_label_prior_model(self, caplog):
        features, labels = _separable_data(n_per_side=6)
        with caplog.at_level(logging.WARNING, logger="ttpmine.gbdt.ensemble"):
            model = train(features, labels, TrainConfig(trees=5))
        lm = model.models[CONCURRENT]
        assert lm.degenerate is True
        assert lm.trees == []
        assert lm.init_score == pytest.approx(np.log(1e-6 / (1 - 1e-6)))
        assert any("no positives" in r.message for r in caplog.records)
        pred = predict(model, features[0])
        assert pred.probabilities[CONCURRENT] == pytest.approx(1e-6, rel=1e-3)
        assert CONCURRENT not in pred.labels

    def test_single_stump_monotone_in_signal(self):
        features, labels = [], []
        for x0 in range(10):
            values = np.zeros(4)
            values[0] = float(x0)
            features.append(make_fv(values, report_id=f"r{x0}"))
            labels.append(frozenset({BEFORE}) if x0 >= 5 else frozenset({NULL}))
        model = train(features, labels, TrainConfig(trees=1, max_depth=1))
        probs = [
            predict(model, fv).probabilities[BEFORE] for fv in features
        ]
        assert all(b >= a for a, b in zip(probs, probs[1:]))
        assert probs[-1] > probs[0]

    def test_input_validation(self):
        features, labels = _separable_data(n_per_side=3)
        with pytest.raises(GbdtTrainingError, match="no training vectors"):
            train([], [], TrainConfig(trees=2))
        with pytest.raises(GbdtTrainingError, match="vectors vs"):
            train(features, labels[:-1], TrainConfig(trees=2))
        mixed = features[:-1] + [
            make_fv(np.zeros(8), layout_version="other-layout")
        ]
        with pytest.raises(GbdtTrainingError, match="mixed layout versions"):
            train(mixed, labels, TrainConfig(trees=2))

    def test_nan_feature_named_by_position(self):
        features, labels = _separable_data(n_per_side=3)
        bad = np.zeros(8)
        bad[3] = np.nan
        features[1] = make_fv(bad, report_id="rbad")
        with pytest.raises(GbdtTrainingError, match="row 1, slot 3"):
            train(features, labels, TrainConfig(trees=2))


class TestFeatureGroups:
    def _grouped_data(self, rng):
        layout = FeatureLayout(bins=10)
        features, labels = [], []
        for k in range(24):
            values = rng.normal(scale=0.01, size=layout.total)
            positive = k % 2 == 0
            signal = 1.0 if positive else 0.0
            values[60] = signal  # an f4 slot
            values[12] = signal  # an f1 slot
            features.append(
                make_fv(values, report_id=f"r{k:02d}", layout_version=layout.version)
            )
            labels.append(frozenset({BEFORE}) if positive else frozenset({NULL}))
        return layout, features, labels

    def test_split_candidates_restricted_to_mask(self):
        rng = np.random.default_rng(2)
        layout, features, labels = self._grouped_data(rng)
        model = train(
            features,
            labels,
            TrainConfig(trees=8, max_depth=2),
            feature_groups=("f4",),
            layout=layout,
        )
        allowed = set(np.flatnonzero(layout.mask(["f4"])).tolist())
        used = set()
        for lm in model.models.values():
            for tree in lm.trees:
                used |= tree_features(tree)
        assert used
        assert used <= allowed
        # Slot indices are stored globally (the f4 block starts at 53),
        # proving the local-to-global remap happened.
        assert max(used) >= 53
        assert 12 not in used

    def test_feature_groups_without_layout(self):
        rng = np.random.default_rng(2)
        _, features, labels = self._grouped_data(rng)
        with pytest.raises(GbdtTrainingError, match="needs the layout"):
            train(features, labels, TrainConfig(trees=2), feature_groups=("f1",))

    def test_layout_version_mismatch(self):
        rng = np.random.default_rng(2)
        _, features, labels = self._grouped_data(rng)
        with pytest.raises(GbdtTrainingError, match="does not match"):
            train(
                features,
                labels,
                TrainConfig(trees=2),
                feature_groups=("f1",),
                layout=FeatureLayout(bins=5),
            )


class TestPredictAndSerialize:
    def _model_and_features(self):
        features, labels = _separable_data(n_per_side=8)
        model = train(features, labels, TrainConfig(trees=20, max_depth=2))
        return model, features

    def test_predict_metadata(self):
        model, features = self._model_and_features()
        pred = predict(model, features[0])
        assert pred.pair == (features[0].tx, features[0].ty)
        assert pred.report_id == features[0].report_id
        assert set(pred.probabilities) == set(ALL_LABELS)
        assert all(0.0 <= p <= 1.0 for p in pred.probabilities.values())

    def test_null_fallback_when_nothing_decided(self):
        model, features = self._model_and_features()
        pred = predict(model, features[-1])  # a NULL-side row
        assert pred.labels == frozenset({NULL})

    def test_layout_mismatch_rejected(self):
        model, _ = self._model_and_features()
        stray = make_fv(np.zeros(8), layout_version="v1-bins5")
        with pytest.raises(ValueError, match="re-extract features or retrain"):
            predict(model, stray)

    def test_round_trip_preserves_predictions(self, tmp_path):
        model, features = self._model_and_features()
        path = tmp_path / "model.json"
        save_ensemble(model, path)
        loaded = load_ensemble(path)
        assert isinstance(loaded, GbdtEnsemble)
        assert loaded.layout_version == model.layout_version
        assert loaded.config == model.config
        for fv in features[:6]:
            a = predict(model, fv)
            b = predict(loaded, fv)
            assert a.labels == b.labels
            for lab in ALL_LABELS:
                assert a.probabilities[lab] == b.probabilities[lab]

    def test_serialized_format_fields(self):
        model, _ = self._model_and_features()
        data = ensemble_to_dict(model)
        assert data["format_version"] == "1"
        assert data["layout_version"] == "test-layout"
        assert data["n_features"] == 8
        assert set(data["labels"]) == set(ALL_LABELS)

    def test_tree_beyond_layout_rejected(self):
        model, _ = self._model_and_features()
        data = ensemble_to_dict(model)
        data["labels"][BEFORE]["trees"] = [
            {
                "feature": 99,
                "threshold": 0.0,
                "left": {"value": 0.0},
                "right": {"value": 0.0},
            }
        ]
        with pytest.raises(ValueError, match="beyond the layout"):
            ensemble_from_dict(data)
