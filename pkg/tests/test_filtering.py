import numpy as np
import pytest

from conftest import random_two_class_dataset
from desbench.errors import ContractError
from desbench.filtering import build_proximity_graph, enn_filter, rng_filter
from desbench.fixtures import separated_clusters
from desbench.ingestion import Dataset


def _dataset(xs, ys, minority=None, name="f"):
    X = np.asarray(xs, float).reshape(len(xs), -1)
    return Dataset.from_arrays(name, X, ys, minority_label=minority)


def brute_force_edges(X):
    """Direct re-evaluation of the sphere-intersection criterion."""
    n = len(X)
    d = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            if all(
                d[i, j] <= max(d[i, k], d[j, k])
                for k in range(n)
                if k != i and k != j
            ):
                edges.add((i, j))
    return edges


class TestProximityGraph:
    def test_two_samples_single_edge(self):
        ds = _dataset([0.0, 1.0], [0, 1])
        assert build_proximity_graph(ds).edges == {(0, 1)}

    def test_collinear_middle_blocks_ends(self):
        ds = _dataset([0.0, 1.0, 2.0], [0, 0, 1])
        # (0,2) has distance 2 > max(1,1) for the middle point, so no edge.
        assert build_proximity_graph(ds).edges == {(0, 1), (1, 2)}

    def test_matches_brute_force_on_random_sets(self, rng):
        for _ in range(30):
            n = int(rng.integers(4, 12))
            ds = random_two_class_dataset(rng, n, 2)
            got = build_proximity_graph(ds).edges
            assert got == brute_force_edges(ds.features)

    def test_symmetric_neighbor_lists(self, rng):
        ds = random_two_class_dataset(rng, 10, 2)
        g = build_proximity_graph(ds)
        for i in range(10):
            for j in g.neighbors(i):
                assert i in g.neighbors(j)


# One majority point (0.95) planted inside the minority cluster; on the line
# the relative-neighbor graph is the path through consecutive points, so its
# neighbors are the two minority samples around it.
RNG_POINTS = [0.0, 0.05, 0.1, 0.9, 0.95, 1.0, 1.05]
RNG_LABELS = [0, 0, 0, 1, 0, 1, 1]


class TestRngFilter:
    def test_separated_clusters_unchanged(self):
        ds = separated_clusters()
        out = rng_filter(ds)
        assert np.array_equal(out.features, ds.features)

    def test_majority_point_inside_minority_cluster_removed(self):
        ds = _dataset(RNG_POINTS, RNG_LABELS)
        assert ds.minority_label == 1
        out = rng_filter(ds)
        assert out.n_samples == 6
        assert 0.95 not in out.features[:, 0]

    def test_minority_point_inside_majority_cluster_retained(self):
        labels = [0, 0, 0, 0, 1, 0, 0]  # now the planted point is minority
        ds = _dataset(RNG_POINTS, labels)
        assert ds.minority_label == 1
        out = rng_filter(ds)
        assert 0.95 in out.features[:, 0]


# A point at 0.5 surrounded by four points of the other class, plus a far
# same-class trio so the removal does not empty its class. The surrounded
# point is removable only when its class is not the designated minority.
ENN_POINTS = [0.45, 0.48, 0.5, 0.52, 0.55, 0.91, 0.93, 0.95]
ENN_LABELS = [0, 0, 1, 0, 0, 1, 1, 1]


class TestEnnFilter:
    def test_homogeneous_neighborhoods_unchanged(self):
        ds = separated_clusters()
        out = enn_filter(ds, k=3)
        assert np.array_equal(out.features, ds.features)

    def test_surrounded_majority_point_removed(self):
        ds = _dataset(ENN_POINTS, ENN_LABELS, minority=0)
        out = enn_filter(ds, k=3)
        assert out.n_samples == 7
        assert 0.5 not in out.features[:, 0]

    def test_surrounded_minority_point_retained(self):
        ds = _dataset(ENN_POINTS, ENN_LABELS, minority=1)
        out = enn_filter(ds, k=3)
        assert out.n_samples == 8
        assert 0.5 in out.features[:, 0]

    def test_too_few_samples_rejected(self):
        ds = _dataset([0.0, 1.0, 2.0], [0, 1, 0])
        with pytest.raises(ContractError):
            enn_filter(ds, k=3)

    def test_tie_votes_retain(self):
        # The 0.48 point is non-minority and its 2-NN vote ties (one
        # neighbor per class), so it must survive at k = 2; at k = 3 the
        # vote resolves against it and it goes.
        ds = _dataset([0.0, 0.1, 0.2, 0.48, 0.8, 0.9, 1.0], [0, 0, 0, 1, 1, 1, 1])
        assert ds.minority_label == 0
        assert enn_filter(ds, k=2).n_samples == 7
        out3 = enn_filter(ds, k=3)
        assert out3.n_samples == 6 and 0.48 not in out3.features[:, 0]


class TestFilterInvariants:
    @pytest.mark.parametrize("kind", ["enn", "rng"])
    def test_subset_minority_preserved_both_classes(self, rng, kind):
        for _ in range(60):
            n = int(rng.integers(6, 24))
            ds = random_two_class_dataset(rng, n, int(rng.integers(1, 3)))
            out = enn_filter(ds, k=3) if kind == "enn" else rng_filter(ds)
            rows_in = {tuple(r) for r in ds.features}
            assert all(tuple(r) in rows_in for r in out.features)
            assert out.n_samples <= ds.n_samples
            n_min_in = int((ds.labels == ds.minority_label).sum())
            n_min_out = int((out.labels == out.minority_label).sum())
            assert n_min_out == n_min_in
            assert np.unique(out.labels).size == 2

    @pytest.mark.parametrize("kind", ["enn", "rng"])
    def test_order_independence(self, rng, kind):
        for _ in range(20):
            ds = random_two_class_dataset(rng, 12, 2, duplicates=True)
            perm = rng.permutation(ds.n_samples)
            shuffled = Dataset.from_arrays(
                "p", ds.features[perm], ds.labels[perm],
                minority_label=ds.minority_label,
            )
            out_a = enn_filter(ds, k=3) if kind == "enn" else rng_filter(ds)
            out_b = enn_filter(shuffled, k=3) if kind == "enn" else rng_filter(shuffled)
            kept_a = sorted(map(tuple, np.column_stack([out_a.features, out_a.labels])))
            kept_b = sorted(map(tuple, np.column_stack([out_b.features, out_b.labels])))
            assert kept_a == kept_b

    def test_degenerate_guard_keeps_one_majority_sample(self):
        # Both non-minority samples sit inside the designated-minority
        # cluster: the plain edit rule would remove them all, so the lowest-
        # indexed best-agreeing one must survive to keep both classes alive.
        ds = _dataset(
            [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.15, 0.35],
            [0, 0, 0, 0, 0, 0, 1, 1],
            minority=0,
        )
        out = enn_filter(ds, k=3)
        assert (out.labels == 1).sum() == 1
        assert (out.labels == 0).sum() == 6
        assert 0.15 in out.features[:, 0]  # lowest index on tied agreement
