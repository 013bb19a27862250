import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_dataset, random_dataset
from jroc.costs import CostContext, random_context, uniform_context
from jroc.dataset import FeatureConfig
from jroc.lattice import (SearchMethod, backward_guided, backward_size, evaluate_config, full_enumeration,
                          lattice_configs, monte_carlo, points_to_csv, read_points_csv, sample_configs,
                          search)
from jroc.predictors import Predictor, train_knn, train_majority, train_tree


class Constant(Predictor):
    model_id = "const"

    def _fit(self, d):
        pass

    def _predict_arrays(self, values, missing):
        return np.zeros(values.shape[0], dtype=np.int64)


def _stub(m):
    d = make_dataset(np.zeros((2, m)), [0, 1])
    return Constant().fit(d), d


@pytest.mark.parametrize("m", range(1, 11))
def test_point_counts(m):
    p, d = _stub(m)
    ctx = uniform_context(m, 2)
    assert len(full_enumeration(p, d, ctx)) == 2 ** m
    for guide in ("MC", "TC", "JC"):
        assert len(backward_guided(p, d, ctx, guide)) == m * (m + 1) // 2 + 1 == backward_size(m)
    assert len(monte_carlo(p, d, ctx, seed=m)) == min(backward_size(m), 2 ** m)


def test_paper_counts():
    assert backward_size(4) == 11 and backward_size(8) == 37
    assert len(lattice_configs(4)) == 16 and len(lattice_configs(8)) == 256


def test_lattice_order():
    cfgs = lattice_configs(3)
    assert [c.label() for c in cfgs] == ["ALL", "-1", "-2", "-3", "-1-2", "-1-3", "-2-3", "-1-2-3"]
    assert len({c.bitstring for c in lattice_configs(6)}) == 64


def test_evaluate_config_examples(iris):
    ctx = CostContext((3, 2, 10, 5), ((0, 20, 15), (5, 0, 15), (30, 15, 0)))
    maj = train_majority(iris)
    pt = evaluate_config(maj, iris, FeatureConfig.none_active(4), ctx)
    # majority predicts class 0 (setosa) for everyone: 50 versicolour at 20, 50 virginica at 15
    assert pt.tc == 0 and pt.mc == pytest.approx((50 * 20 + 50 * 15) / 150)
    assert evaluate_config(maj, iris, FeatureConfig((False, False, False, True)), ctx).tc == 5
    _, first = np.unique(iris.values, axis=0, return_index=True)
    distinct = iris.take(sorted(first))
    knn = train_knn(distinct, 1)
    full = evaluate_config(knn, distinct, FeatureConfig.all_active(4), ctx)
    assert full.mc == 0 and full.tc == 20
    assert evaluate_config(knn, distinct, FeatureConfig.all_active(4), ctx) == full


def test_btc_uniform_costs_removes_in_index_order(iris):
    p = train_tree(iris, 3)
    ps = backward_guided(p, iris, uniform_context(4, 3), "TC")
    pivots, start = [], 1
    for size in (4, 3, 2, 1):
        pivots.append(ps.points[start].config)  # first candidate of each round is the pivot chosen
        start += size
    assert [c.label() for c in pivots] == ["-1", "-1-2", "-1-2-3", "-1-2-3-4"]


def test_backward_sets_are_lattice_subsets(iris):
    ctx = random_context(4, 3, 10, 3)
    p = train_knn(iris, 3)
    full = {pt.config.bitstring: pt for pt in full_enumeration(p, iris, ctx)}
    for guide in ("MC", "TC", "JC"):
        ps = backward_guided(p, iris, ctx, guide)
        assert all(full[pt.config.bitstring] == pt for pt in ps)
        # each round moves to the best candidate under the guide
        assert len({pt.config.bitstring for pt in ps}) == len(ps)


def test_backward_guide_choice(iris):
    ctx = random_context(4, 3, 10, 5)
    p = train_tree(iris, 4)
    for guide, key in (("MC", lambda q: q.mc), ("TC", lambda q: q.tc), ("JC", lambda q: q.jc(0.3))):
        pts = backward_guided(p, iris, ctx, guide, alpha=0.3).points
        pivot, start = pts[0].config, 1
        for size in (4, 3, 2, 1):
            cands = pts[start:start + size]
            assert [c.config for c in cands] == [pivot.deactivate(j) for j in range(4) if pivot.active[j]]
            # first candidate attaining the minimum becomes the next pivot
            low = min(key(c) for c in cands)
            pivot = next(c.config for c in cands if key(c) == low)
            start += size


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_uniform_test_costs_make_bmc_equal_bjc(seed):
    rng = np.random.default_rng(seed)
    d = random_dataset(rng, p_missing=0.05)
    ctx = random_context(d.m, d.c, 8, seed)
    ctx = CostContext((1.0 / d.m,) * d.m, ctx.misclass, float(rng.uniform(0.05, 0.95)))
    p = train_knn(d, 3)
    assert backward_guided(p, d, ctx, "MC").configs() == backward_guided(p, d, ctx, "JC").configs()


def test_uniform_misclass_does_not_force_btc_equal_bjc():
    # counterexample: the class is the most expensive attribute, so the TC guide
    # drops it first while the JC guide keeps it, although M is uniform
    grid = [[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)]
    d = make_dataset(grid, [r[0] for r in grid])
    p = train_tree(d, 3)
    ctx = CostContext((0.5, 0.3, 0.2), ((0, 2), (2, 0)), 0.9)
    btc = backward_guided(p, d, ctx, "TC").configs()
    bjc = backward_guided(p, d, ctx, "JC").configs()
    assert [c.bitstring for c in btc[4:6]] == ["001", "010"]
    assert [c.bitstring for c in bjc[4:6]] == ["001", "100"]


def test_rnd_sampling():
    cfgs = sample_configs(4, 11, 7)
    assert len(cfgs) == 11 == len({c.bitstring for c in cfgs})
    assert cfgs == sample_configs(4, 11, 7)
    assert {c.bitstring for c in sample_configs(4, 16, 1)} == {c.bitstring for c in lattice_configs(4)}
    with pytest.raises(ValueError):
        sample_configs(3, 9, 0)


def test_full_cap_and_method_parse(iris):
    p = train_majority(iris)
    with pytest.raises(ValueError):
        full_enumeration(p, iris, uniform_context(4, 3), cap=3)
    assert SearchMethod.parse("bjc").name == "BJC"
    with pytest.raises(ValueError):
        SearchMethod.parse("forward")
    with pytest.raises(ValueError):
        backward_guided(p, iris, uniform_context(4, 3), "XX")
    with pytest.raises(ValueError):
        full_enumeration(p, iris, uniform_context(3, 3))


def test_jobs_and_cache_do_not_change_results(iris):
    p = train_knn(iris, 5)
    ctx = random_context(4, 3, 10, 9)
    a = full_enumeration(p, iris, ctx)
    cache = {}
    b = full_enumeration(p, iris, ctx, jobs=4, cache=cache)
    assert a.points == b.points and len(cache) == 16
    for name in ("Full", "BMC", "BTC", "BJC", "RND"):
        m = SearchMethod(name, None, 3)
        assert search(p, iris, ctx, m).points == search(p, iris, ctx, m, jobs=3, cache=cache).points


def test_points_csv_round_trip(iris):
    pts = list(full_enumeration(train_tree(iris, 3), iris, random_context(4, 3, 10, 1)))
    text = points_to_csv(pts)
    assert text.startswith("# schema=1\nmodel_id,config_bitstring,tc,mc\n")
    assert read_points_csv(text) == pts
    for bad in ("", "# schema=1\na,b\n", "# schema=1\nmodel_id,config_bitstring,tc,mc\nx,10,1\n",
                "# schema=1\nmodel_id,config_bitstring,tc,mc\nx,12,1,1\n",
                "# schema=1\nmodel_id,config_bitstring,tc,mc\nx,10,nan,1\n"):
        with pytest.raises(ValueError):
            read_points_csv(bad)
