import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_dataset, random_dataset
from jroc.dataset import FeatureConfig, mask_features
from jroc.predictors import (BaggingPredictor, ConfusionMatrix, KNNPredictor, MajorityPredictor,
                             SchemaError, TreePredictor, best_numeric_split, evaluate_confusion,
                             parse_predictor_spec, split_model_list, train_bagging, train_knn,
                             train_majority, train_tree)
from jroc.rng import Rng


def test_majority_and_tie_rule():
    d = make_dataset([[0], [1], [2]], [0, 0, 1])
    p = train_majority(d)
    assert list(p.predict(d)) == [0, 0, 0]
    assert p.predict_one([None]) == 0
    tie = make_dataset([[0], [1]], [0, 1])
    assert train_majority(tie).predict_one([5.0]) == 0
    # class 1 more frequent: majority follows counts, not index
    assert train_majority(make_dataset([[0], [1], [2]], [1, 0, 1])).predict_one([0]) == 1


def test_knn_missing_aware_distance_example():
    d = make_dataset([[0, 0], [10, 10]], [0, 1])
    p = train_knn(d, 1)
    # one shared dimension: |1-0|/10 and |1-10|/10, both rescaled by m/used = 2
    dist = p.distances(*d.encode_instance([1.0, None]))
    assert dist[0] == pytest.approx([0.2, 1.8])
    assert p.predict_one([1.0, None]) == 0
    assert p.predict_one([None, 9.0]) == 1


def test_knn_fallbacks_and_exact_match(iris):
    p = train_knn(iris, 1)
    _, first = np.unique(iris.values, axis=0, return_index=True)
    distinct = iris.take(sorted(first))
    assert np.array_equal(train_knn(distinct, 1).predict(distinct), distinct.y)
    assert p.predict_one([None] * 4) == p.majority
    with pytest.raises(ValueError):
        train_knn(iris.take(range(3)), 5)


def test_knn_perfect_on_distinct_training_rows():
    rng = np.random.default_rng(1)
    d = make_dataset(rng.normal(size=(40, 3)), rng.integers(0, 3, 40))
    assert np.array_equal(train_knn(d, 1).predict(d), d.y)


def test_knn_nominal_distance():
    d = make_dataset([[0, 0.0], [1, 0.0], [2, 5.0]], [0, 1, 1], nominal={0: 3})
    p = train_knn(d, 1)
    assert p.predict_one([1, 0.0]) == 1
    assert p.predict_one([0, None]) == 0


def _gain_oracle(x, y, c, thr):
    def ent(labels):
        if not labels:
            return 0.0
        n = len(labels)
        return -sum((labels.count(k) / n) * math.log2(labels.count(k) / n)
                    for k in range(c) if labels.count(k))
    left = [b for a, b in zip(x, y) if a <= thr]
    right = [b for a, b in zip(x, y) if a > thr]
    return ent(list(y)) - (len(left) * ent(left) + len(right) * ent(right)) / len(y)


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 2)), min_size=2, max_size=25))
def test_best_numeric_split_matches_brute_force(rows):
    x = np.array([float(a) for a, _ in rows])
    y = np.array([b for _, b in rows])
    gain, thr = best_numeric_split(x, y, 3)
    xs = sorted(set(x))
    mids = [(a + b) / 2 for a, b in zip(xs, xs[1:])]
    if not mids:
        assert gain == 0.0
        return
    best = max(_gain_oracle(list(x), list(y), 3, t) for t in mids)
    assert gain == pytest.approx(best, abs=1e-9)
    assert _gain_oracle(list(x), list(y), 3, thr) == pytest.approx(best, abs=1e-9)


def test_tree_threshold_data_splits_at_midpoint():
    d = make_dataset([[1], [2], [3], [7], [8], [9]], [0, 0, 0, 1, 1, 1])
    t = train_tree(d, 3)
    assert t.root.feature == 0 and t.root.threshold == pytest.approx(5.0)
    assert np.array_equal(t.predict(d), d.y)
    assert t.depth() == 1


def test_tree_pure_class_is_single_leaf():
    d = make_dataset([[1, 2], [3, 4], [5, 6]], [1, 1, 1], labels=("a", "b"))
    t = train_tree(d, 4)
    assert t.root.is_leaf and t.root.prediction == 1


def test_tree_missing_root_attribute_follows_default_branch():
    # right branch gets more rows, so a missing value is routed there
    d = make_dataset([[1, 0], [2, 0], [7, 0], [8, 0], [9, 0]], [0, 0, 1, 1, 1])
    t = train_tree(d, 2)
    assert t.root.default == 1
    assert t.predict_one([None, 0]) == t.root.children[1].prediction == 1


def test_tree_nominal_split():
    d = make_dataset([[0], [0], [1], [1], [2]], [0, 0, 1, 1, 0], nominal={0: 3})
    t = train_tree(d, 2)
    assert len(t.root.children) == 3
    assert [t.predict_one([k]) for k in range(3)] == [0, 1, 0]


def _identity_bootstrap_seed(n):
    for s in range(10_000):
        r = Rng(s)
        if sorted(r.randbelow(n) for _ in range(n)) == list(range(n)):
            return s
    raise AssertionError("no seed found")


def test_bagging_single_round_on_identity_sample_equals_tree():
    rng = np.random.default_rng(4)
    d = random_dataset(rng, n=5, m=2, c=2)
    seed = _identity_bootstrap_seed(d.n)
    bag = train_bagging(d, 1, seed, max_depth=3)
    assert sorted(bag.samples[0]) == list(range(d.n))
    probe = random_dataset(rng, n=30, m=2, c=2)
    assert np.array_equal(bag.predict(probe), train_tree(d, 3).predict(probe))


def test_bagging_determinism_and_unanimity(iris):
    a = train_bagging(iris, 5, 11)
    b = train_bagging(iris, 5, 11)
    assert np.array_equal(a.predict(iris), b.predict(iris))
    assert a.samples == b.samples
    pure = make_dataset([[1], [2], [3]], [1, 1, 1], labels=("a", "b"))
    assert list(train_bagging(pure, 7, 0).predict(pure)) == [1, 1, 1]


def test_bagging_identical_members_vote_like_one(iris):
    bag = BaggingPredictor(3, 4, 0).fit(iris)
    # replace members with copies of one tree: the vote must agree with it
    bag.members = [bag.members[0]] * 3
    assert np.array_equal(bag.predict(iris), bag.members[0].predict(iris))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 5000))
def test_all_predictors_robust_to_masking(seed):
    rng = np.random.default_rng(seed)
    d = random_dataset(rng, p_missing=0.15, nominal=True)
    models = [MajorityPredictor(), KNNPredictor(3), TreePredictor(4), BaggingPredictor(3, 3, seed)]
    cfg = FeatureConfig(tuple(bool(b) for b in rng.integers(0, 2, d.m)))
    for p in models:
        p.fit(d)
        for test in (mask_features(d, cfg), mask_features(d, FeatureConfig.none_active(d.m))):
            out = p.predict(test)
            assert out.shape == (d.n,) and out.min() >= 0 and out.max() < d.c
        assert 0 <= p.predict_one([None] * d.m) < d.c


def test_schema_mismatch_and_unfitted(iris, diabetes):
    p = train_majority(iris)
    with pytest.raises(SchemaError):
        p.predict(diabetes)
    with pytest.raises(RuntimeError):
        KNNPredictor(1).predict(iris)


def test_confusion_matrix_examples():
    d = make_dataset([[0], [1], [2]], [0, 0, 1])
    cm = evaluate_confusion(train_majority(d), d)
    assert cm.counts.tolist() == [[2, 1], [0, 0]]
    assert cm.total == 3
    perfect = ConfusionMatrix.from_predictions([0, 1, 2, 2], [0, 1, 2, 2], 3)
    assert np.trace(perfect.counts) == 4 and perfect.counts.sum() == 4


def test_confusion_total_matches_size(iris):
    cm = evaluate_confusion(train_tree(iris, 3), mask_features(iris, FeatureConfig.from_bitstring("1010")))
    assert cm.total == iris.n and (cm.counts >= 0).all()


def test_predictor_specs():
    assert parse_predictor_spec("knn:k=5").model_id == "knn:k=5"
    specs = split_model_list("majority,knn:k=5,tree:depth=6,bag:rounds=10,depth=6")
    assert [s.model_id for s in specs] == ["majority", "knn:k=5", "tree:depth=6", "bag:rounds=10;depth=6"]
    for bad in ("svm", "knn:k=0", "knn:depth=3", "tree:depth=x", "knn:k"):
        with pytest.raises(ValueError):
            parse_predictor_spec(bad)
    with pytest.raises(ValueError):
        split_model_list(" , ")
