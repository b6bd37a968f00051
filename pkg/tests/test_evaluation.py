import math

import numpy as np
import pytest
import scipy.stats

from rewirebench import (BudgetExceeded, CompatibilityError, GraphTask,
                         InputError, NodeTask, RewireConfig, SearchSpace,
                         accuracy, auroc, build_graph, make_splits,
                         model_select, significance, stratified_kfold)
from rewirebench.evaluation import check_compatibility, stratified_holdout

from conftest import random_graph


def blob_node_task(n_per_class=30, seed=0):
    """Two communities, dense inside and sparse across, separable features."""
    rng = np.random.default_rng(seed)
    n = 2 * n_per_class
    labels = np.repeat([0, 1], n_per_class)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            p = 0.3 if labels[i] == labels[j] else 0.02
            if rng.random() < p:
                edges.append((i, j))
    feats = rng.normal(size=(n, 3)) + np.where(labels[:, None] == 0, 2.0, -2.0)
    g = build_graph(edges, feats, labels=labels, name="blobs")
    return NodeTask(graph=g, name="blobs")


def blob_graph_task(n_graphs=40, seed=0):
    """Dense vs sparse random graphs, label = density class."""
    rng = np.random.default_rng(seed)
    graphs = []
    for i in range(n_graphs):
        y = i % 2
        graphs.append(random_graph(10, 0.9 if y else 0.12, rng, connected=True))
    labels = np.array([i % 2 for i in range(n_graphs)])
    return GraphTask(graphs=graphs, labels=labels, name="density")


class TestSplits:
    def test_kfold_partitions(self):
        labels = np.array([0] * 20 + [1] * 15)
        folds = stratified_kfold(labels, k=5, seed=1)
        all_idx = np.concatenate(folds)
        assert np.array_equal(np.sort(all_idx), np.arange(35))

    def test_kfold_stratified_within_one(self):
        labels = np.array([0] * 20 + [1] * 15 + [2] * 10)
        for fold in stratified_kfold(labels, k=5, seed=3):
            counts = np.bincount(labels[fold], minlength=3)
            assert abs(counts[0] - 4) <= 1
            assert abs(counts[1] - 3) <= 1
            assert abs(counts[2] - 2) <= 1

    def test_kfold_deterministic(self):
        labels = np.random.default_rng(0).integers(0, 3, size=40)
        a = stratified_kfold(labels, seed=7)
        b = stratified_kfold(labels, seed=7)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_k_exceeds_population(self):
        with pytest.raises(InputError):
            stratified_kfold(np.array([0, 1]), k=5)

    def test_holdout_fraction(self):
        labels = np.array([0] * 40 + [1] * 40)
        rest, held = stratified_holdout(labels, np.arange(80), 0.25, seed=0)
        assert held.shape[0] == 20
        assert np.array_equal(np.sort(np.concatenate([rest, held])),
                              np.arange(80))
        assert np.bincount(labels[held]).tolist() == [10, 10]

    def test_make_splits_60_20_20(self):
        labels = np.array([0] * 50 + [1] * 50)
        splits = make_splits(labels, seed=0)
        assert len(splits) == 5
        for s in splits:
            assert s.test.shape[0] == 20
            assert s.val.shape[0] == 20
            assert s.train.shape[0] == 60
            assert np.intersect1d(s.train, s.test).size == 0
            assert np.intersect1d(s.val, s.test).size == 0
            assert np.intersect1d(s.train, s.val).size == 0

    def test_sealed_labels(self):
        labels = np.array([0, 1] * 10)
        s = make_splits(labels, seed=0)[0]
        assert not s.test_labels.revealed
        got = s.test_labels.reveal()
        assert s.test_labels.revealed
        assert np.array_equal(got, labels[s.test])


class TestMetrics:
    def test_accuracy(self):
        assert accuracy([0, 1, 1, 0], [0, 1, 0, 0]) == pytest.approx(0.75)

    def test_accuracy_empty(self):
        with pytest.raises(InputError):
            accuracy([], [])

    def test_auroc_perfect_and_inverted(self):
        y = np.array([0, 0, 1, 1])
        assert auroc([0.1, 0.2, 0.8, 0.9], y) == pytest.approx(1.0)
        assert auroc([0.9, 0.8, 0.2, 0.1], y) == pytest.approx(0.0)

    def test_auroc_chance_with_ties(self):
        y = np.array([0, 1, 0, 1])
        assert auroc([0.5, 0.5, 0.5, 0.5], y) == pytest.approx(0.5)

    def test_auroc_matches_trapezoid_oracle(self, rng):
        scores = rng.normal(size=200)
        y = (rng.random(200) < 0.3).astype(int)
        # oracle: explicit pairwise comparison count
        pos = scores[y == 1]
        neg = scores[y == 0]
        wins = sum((p > m) + 0.5 * (p == m) for p in pos for m in neg)
        want = wins / (len(pos) * len(neg))
        assert auroc(scores, y) == pytest.approx(want)

    def test_auroc_needs_both_classes(self):
        with pytest.raises(InputError):
            auroc([0.1, 0.2], [1, 1])


class TestSignificance:
    def test_identical_folds(self):
        p, flag = significance([0.8] * 5, [0.8] * 5)
        assert p == 1.0 and flag == "none"

    def test_constant_shift(self):
        p, flag = significance([0.5] * 5, [0.6] * 5)
        assert p == 0.0 and flag == "better"
        p, flag = significance([0.6] * 5, [0.5] * 5)
        assert p == 0.0 and flag == "worse"

    def test_matches_scipy_ttest(self, rng):
        b = rng.random(5)
        m = b + rng.normal(0.2, 0.01, size=5)
        p, flag = significance(b, m)
        assert p == pytest.approx(float(scipy.stats.ttest_rel(m, b).pvalue))
        assert flag == "better"

    def test_wilcoxon_variant(self, rng):
        b = rng.random(8)
        m = b + rng.normal(0.3, 0.01, size=8)
        p, flag = significance(b, m, test="wilcoxon")
        assert p == pytest.approx(float(scipy.stats.wilcoxon(m, b).pvalue))

    def test_insignificant_noise(self, rng):
        b = rng.random(5)
        m = b + rng.normal(0.0, 1e-3, size=5)
        _, flag = significance(b, m)
        # tiny symmetric noise should usually not clear alpha; flag is one of
        assert flag in ("none", "better", "worse")

    def test_shape_mismatch(self):
        with pytest.raises(InputError):
            significance([0.5] * 4, [0.5] * 5)


class TestCompatibility:
    @pytest.mark.parametrize("method", ["heat", "pagerank"])
    def test_diffusion_node_only(self, method):
        with pytest.raises(CompatibilityError):
            check_compatibility("graph", "gesn", method)
        check_compatibility("node", "gesn", method)

    def test_sgc_node_only(self):
        with pytest.raises(CompatibilityError):
            check_compatibility("graph", "sgc", "baseline")
        check_compatibility("node", "sgc", "baseline")


class TestModelSelect:
    @pytest.mark.parametrize("model", ["sgc", "gesn"])
    def test_separable_node_task(self, model):
        task = blob_node_task()
        report = model_select(task, model, RewireConfig(method="baseline"),
                              SearchSpace.tiny(), seed=0)
        assert not report.oor
        assert len(report.folds) == 5
        assert report.mean > 0.9
        assert report.std == pytest.approx(
            np.std([f.metric for f in report.folds], ddof=1))

    def test_selected_config_recorded(self):
        task = blob_node_task()
        report = model_select(task, "sgc", RewireConfig(method="baseline"),
                              SearchSpace.tiny(), seed=0)
        for f in report.folds:
            assert {"operator", "hops", "ridge_lambda"} <= set(f.selected)

    def test_deterministic(self):
        task = blob_node_task()
        a = model_select(task, "sgc", RewireConfig(method="baseline"),
                         SearchSpace.tiny(), seed=3)
        b = model_select(task, "sgc", RewireConfig(method="baseline"),
                         SearchSpace.tiny(), seed=3)
        assert [f.metric for f in a.folds] == [f.metric for f in b.folds]
        assert [f.selected for f in a.folds] == [f.selected for f in b.folds]

    def test_rewired_node_task_runs(self):
        task = blob_node_task(n_per_class=15)
        report = model_select(task, "sgc", RewireConfig(method="pagerank"),
                              SearchSpace.tiny(), seed=0)
        assert len(report.folds) == 5
        assert report.mean > 0.8
        for f in report.folds:
            assert f.selected["operator"] == "kernel"

    def test_graph_task_gesn(self):
        task = blob_graph_task()
        report = model_select(task, "gesn", RewireConfig(method="baseline"),
                              SearchSpace.tiny(), seed=0)
        assert len(report.folds) == 5
        assert report.mean > 0.7
        for f in report.folds:
            assert f.selected["pooling"] in ("sum", "mean")

    def test_graph_task_rejects_sgc(self):
        with pytest.raises(CompatibilityError):
            model_select(blob_graph_task(), "sgc",
                         RewireConfig(method="baseline"), SearchSpace.tiny())

    def test_budget_marks_oor(self):
        task = blob_node_task()
        report = model_select(task, "gesn", RewireConfig(method="baseline"),
                              SearchSpace.tiny(), seed=0, budget_seconds=0.0)
        assert report.oor
        assert math.isnan(report.mean)

    def test_test_labels_sealed_until_scored(self):
        task = blob_node_task(n_per_class=15)
        report = model_select(task, "sgc", RewireConfig(method="baseline"),
                              SearchSpace.tiny(), seed=0)
        assert len(report.folds) == 5  # reveal happened exactly at scoring
