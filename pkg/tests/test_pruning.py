import numpy as np

from conftest import random_two_class_dataset, threshold_pool
from desbench.fixtures import cross_pair_region_points, noisy_border_scene
from desbench.generation import ClassifierPool, Perceptron
from desbench.pruning import dfp_prune, frienemy_pairs
from desbench.region import RegionOfCompetence, knn_region, knne_region


def region_from(features, labels, query=None):
    features = np.asarray(features, float)
    labels = np.asarray(labels, int)
    query = np.zeros(features.shape[1]) if query is None else np.asarray(query, float)
    dists = np.linalg.norm(features - query, axis=1)
    order = np.argsort(dists, kind="stable")
    return RegionOfCompetence(
        indices=order.astype(np.int64),
        labels=labels[order],
        distances=dists[order],
        features=features[order],
        query=query,
        k_requested=len(labels),
    )


class TestFrienemyPairs:
    def test_two_against_three_gives_six(self):
        feats, labels = cross_pair_region_points()
        roc = region_from(feats, labels)
        pairs = frienemy_pairs(roc)
        assert len(pairs) == 6
        for a, b in pairs.pairs:
            assert roc.labels[a] != roc.labels[b]

    def test_single_class_region_empty(self):
        roc = region_from([[0.0], [1.0], [2.0]], [1, 1, 1])
        assert len(frienemy_pairs(roc)) == 0

    def test_two_by_two_gives_four(self):
        roc = region_from([[0.0], [1.0], [2.0], [3.0]], [0, 1, 0, 1])
        assert len(frienemy_pairs(roc)) == 4

    def test_count_is_product_of_class_sizes(self, rng):
        for _ in range(30):
            n = int(rng.integers(2, 10))
            labels = rng.integers(0, 2, n)
            roc = region_from(rng.random((n, 2)), labels)
            n1 = int(labels.sum())
            assert len(frienemy_pairs(roc)) == n1 * (n - n1)


class TestDfpPrune:
    def test_toy_scene_keeps_only_border_classifier(self):
        scene = noisy_border_scene()
        from desbench.filtering import enn_filter

        filtered = enn_filter(scene.validation, k=3)
        roc = knne_region(filtered, scene.query, k=2)
        pruned = dfp_prune(roc, scene.pool)
        assert pruned.selected == (1,)
        assert not pruned.fallback_used

    def test_single_class_region_falls_back(self):
        scene = noisy_border_scene()
        roc = region_from([[0.70, 0.49], [0.71, 0.50]], [0, 0], query=scene.query)
        pruned = dfp_prune(roc, scene.pool)
        assert pruned.selected == (0, 1, 2)
        assert pruned.fallback_used

    def test_constant_classifiers_fall_back(self):
        pool = ClassifierPool(
            members=(
                Perceptron(weights=np.array([0.0]), bias=1.0, index=0),
                Perceptron(weights=np.array([0.0]), bias=2.0, index=1),
            ),
        )
        roc = region_from([[0.0], [1.0]], [0, 1])
        pruned = dfp_prune(roc, pool)
        assert pruned.fallback_used and pruned.selected == (0, 1)

    def test_matches_pair_comprehension_oracle(self, rng):
        for _ in range(60):
            n_members = int(rng.integers(2, 7))
            feats = rng.random((n_members, 1))
            labels = rng.integers(0, 2, n_members)
            roc = region_from(feats, labels)
            pool = threshold_pool(rng.random(int(rng.integers(1, 6))))
            pruned = dfp_prune(roc, pool)
            assert len(pruned.selected) >= 1

            pairs = frienemy_pairs(roc).pairs
            oracle = {
                i
                for i, clf in enumerate(pool)
                if any(
                    clf.predict(roc.features[a]) == roc.labels[a]
                    and clf.predict(roc.features[b]) == roc.labels[b]
                    for a, b in pairs
                )
            }
            if oracle:
                assert set(pruned.selected) == oracle and not pruned.fallback_used
            else:
                assert pruned.fallback_used
                assert pruned.selected == tuple(range(len(pool)))

    def test_monotone_under_pool_growth(self, rng):
        for _ in range(25):
            feats = rng.random((5, 1))
            labels = np.array([0, 1, rng.integers(0, 2), rng.integers(0, 2), 1])
            roc = region_from(feats, labels)
            thresholds = rng.random(4)
            small = threshold_pool(thresholds[:3])
            big = threshold_pool(thresholds)
            sel_small = dfp_prune(roc, small)
            sel_big = dfp_prune(roc, big)
            if not sel_small.fallback_used:
                assert set(sel_small.selected) <= set(sel_big.selected)

    def test_knne_region_always_activates_pruning_gate(self, rng):
        # Class-balanced regions always hold both classes, so the frienemy
        # set is never empty and the gate applies to every query.
        for _ in range(20):
            ds = random_two_class_dataset(rng, 16, 2)
            roc = knne_region(ds, rng.random(2), k=3)
            assert len(frienemy_pairs(roc)) >= 1

    def test_plain_knn_region_can_skip_gate(self, rng):
        ds = random_two_class_dataset(rng, 16, 2)
        # A query right on top of one sample with k=1 gives a single-class
        # region, where pruning must be a no-op via fallback.
        roc = knn_region(ds, ds.features[5], k=1)
        pool = threshold_pool([0.2, 0.8], d=2)
        assert dfp_prune(roc, pool).fallback_used
