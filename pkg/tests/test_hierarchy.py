import numpy as np
import pytest

from gmmsearch import (
    EmSettings,
    InputError,
    SearchConfig,
    SearchFailure,
    SyntheticSpec,
    adjusted_rand_index,
    criterion_value,
    cut_at_depth,
    em_fit,
    fit_dendrogram,
    generate,
    leaf_count,
    tree_depth,
)
from gmmsearch import hierarchy

# a lean but representative method set keeps the recursive searches quick
FAST = SearchConfig(
    kmax=2,
    affinities=("l2", "none"),
    linkages=("ward", "single"),
    seed=0,
)


def walk(node):
    yield node
    for child in node.children:
        yield from walk(child)


class TestFitDendrogram:
    def test_hierarchical_synthetic_depth_one_cut(self):
        x, truth = generate(SyntheticSpec("hierarchy", seed=0))
        root = fit_dendrogram(x, FAST)
        labels = cut_at_depth(root, 1)
        assert len(np.unique(labels)) == 2
        assert adjusted_rand_index(labels, truth[:, 0]) == 1.0

    def test_single_gaussian_root_is_leaf(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(200, 1))
        root = fit_dendrogram(x, FAST)
        assert root.is_leaf
        assert root.leaf_reason == hierarchy.LEAF_SINGLE_COMPONENT
        # independent check: a 2-component fit should not beat 1 component on bic
        one = em_fit(x, 1, "spherical")
        labels = (x[:, 0] > np.median(x)).astype(int)
        from gmmsearch import estimate_gaussian_parameters

        init = estimate_gaussian_parameters(x, labels, "spherical", 0.0).to_model()
        two = em_fit(x, 2, "spherical", EmSettings(), init)
        assert criterion_value(one, 200, "bic") > criterion_value(two, 200, "bic")

    def test_internal_nodes_have_two_to_max_children(self):
        x, _ = generate(SyntheticSpec("hierarchy", seed=2))
        root = fit_dendrogram(x, FAST)
        for node in walk(root):
            if not node.is_leaf:
                assert 2 <= len(node.children) <= FAST.kmax

    def test_children_partition_parent(self):
        x, _ = generate(SyntheticSpec("hierarchy", seed=3))
        root = fit_dendrogram(x, FAST)
        for node in walk(root):
            if node.is_leaf:
                continue
            merged = np.sort(np.concatenate([c.indices for c in node.children]))
            assert np.array_equal(merged, np.sort(node.indices))

    def test_sizes_strictly_decrease_down_any_path(self):
        x, _ = generate(SyntheticSpec("hierarchy", seed=4))
        root = fit_dendrogram(x, FAST)
        for node in walk(root):
            for child in node.children:
                assert child.size < node.size

    def test_min_split_guard(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(10, 1))
        root = fit_dendrogram(x, FAST, min_split=100)
        assert root.is_leaf
        assert root.leaf_reason == hierarchy.LEAF_MIN_SPLIT

    def test_search_failure_becomes_annotated_leaf(self, monkeypatch):
        def boom(*args, **kwargs):
            raise SearchFailure("forced")

        monkeypatch.setattr(hierarchy, "run_search", boom)
        x = np.random.default_rng(6).normal(size=(50, 2))
        root = fit_dendrogram(x, FAST)
        assert root.is_leaf
        assert root.leaf_reason == hierarchy.LEAF_SEARCH_FAILURE

    def test_depth_cap(self):
        x, _ = generate(SyntheticSpec("hierarchy", seed=7))
        root = fit_dendrogram(x, FAST, max_depth=1)
        assert tree_depth(root) <= 1

    def test_kmax_must_allow_split(self):
        with pytest.raises(InputError):
            fit_dendrogram(np.zeros((10, 1)), SearchConfig(kmin=1, kmax=1))

    def test_deterministic(self):
        x, _ = generate(SyntheticSpec("hierarchy", seed=8))
        a = fit_dendrogram(x, FAST)
        b = fit_dendrogram(x, FAST)
        cuts_a = [cut_at_depth(a, d) for d in range(tree_depth(a) + 1)]
        cuts_b = [cut_at_depth(b, d) for d in range(tree_depth(b) + 1)]
        assert len(cuts_a) == len(cuts_b)
        for ca, cb in zip(cuts_a, cuts_b):
            assert np.array_equal(ca, cb)


class TestCutAtDepth:
    @pytest.fixture(scope="class")
    @staticmethod
    def fitted():
        x, truth = generate(SyntheticSpec("hierarchy", seed=9))
        return fit_dendrogram(x, FAST), truth

    def test_depth_zero_is_one_cluster(self, fitted):
        root, _ = fitted
        labels = cut_at_depth(root, 0)
        assert np.all(labels == 0)

    def test_depth_two_matches_mid_truth(self, fitted):
        root, truth = fitted
        labels = cut_at_depth(root, 2)
        assert len(np.unique(labels)) == 4
        assert adjusted_rand_index(labels, truth[:, 1]) == 1.0

    def test_every_cut_is_a_partition(self, fitted):
        root, _ = fitted
        n = root.size
        for d in range(tree_depth(root) + 2):
            labels = cut_at_depth(root, d)
            assert labels.shape == (n,)
            counts = np.bincount(labels)
            assert counts.sum() == n
            assert np.all(counts > 0)

    def test_deeper_cuts_refine_shallower_ones(self, fitted):
        root, _ = fitted
        top = tree_depth(root) + 1
        for d in range(top):
            coarse = cut_at_depth(root, d)
            fine = cut_at_depth(root, d + 1)
            # every fine cluster must live inside one coarse cluster
            for c in np.unique(fine):
                assert len(np.unique(coarse[fine == c])) == 1

    def test_beyond_tree_depth_yields_leaf_clustering(self, fitted):
        root, _ = fitted
        deep = tree_depth(root)
        assert np.array_equal(cut_at_depth(root, deep), cut_at_depth(root, deep + 5))
        assert len(np.unique(cut_at_depth(root, deep))) == leaf_count(root)

    def test_negative_depth_rejected(self, fitted):
        root, _ = fitted
        with pytest.raises(InputError):
            cut_at_depth(root, -1)
