"""Shared test helpers: synthetic imbalanced datasets and small factories."""

from __future__ import annotations

import numpy as np
import pytest

from desbench.generation import ClassifierPool, Perceptron
from desbench.ingestion import Dataset


def make_imbalanced_blobs(
    name: str,
    n_samples: int,
    n_features: int,
    imbalance_ratio: float,
    noise_rate: float,
    separation: float,
    seed: int,
) -> Dataset:
    """Two Gaussian classes with label noise, KEEL-benchmark flavoured.

    The minority class (label 1) sits ``separation`` standard deviations away
    from the majority along a random direction; ``noise_rate`` of all labels
    are flipped so validation sets contain genuinely mislabelled samples.
    """
    rng = np.random.default_rng(seed)
    n_min = max(int(round(n_samples / (1.0 + imbalance_ratio))), 10)
    n_maj = n_samples - n_min
    direction = rng.normal(size=n_features)
    direction /= np.linalg.norm(direction)
    X = np.vstack(
        [
            rng.normal(0.0, 1.0, size=(n_maj, n_features)),
            rng.normal(0.0, 1.0, size=(n_min, n_features)) + separation * direction,
        ]
    )
    y = np.concatenate([np.zeros(n_maj, dtype=int), np.ones(n_min, dtype=int)])
    n_flip = int(round(noise_rate * n_samples))
    if n_flip:
        flip = rng.choice(n_samples, size=n_flip, replace=False)
        y[flip] = 1 - y[flip]
    order = rng.permutation(n_samples)
    X, y = X[order], y[order]
    counts = np.bincount(y, minlength=2)
    minority = int(np.argmin(counts)) if counts[0] != counts[1] else 0
    return Dataset.from_arrays(name, X, y, minority_label=minority)


def random_two_class_dataset(rng, n, d, *, duplicates=False) -> Dataset:
    """Small random dataset guaranteed to hold both classes."""
    X = rng.random((n, d))
    if duplicates and n >= 4:
        X[1] = X[0]
        X[3] = X[2]
    y = rng.integers(0, 2, size=n)
    y[0], y[1] = 0, 1
    return Dataset.from_arrays("rand", X, y)


def threshold_pool(thresholds, *, axis=0, d=1) -> ClassifierPool:
    """Pool of axis-aligned step classifiers: class 1 iff x[axis] >= t."""
    members = []
    for i, t in enumerate(thresholds):
        w = np.zeros(d)
        w[axis] = 1.0
        members.append(Perceptron(weights=w, bias=-float(t), index=i))
    return ClassifierPool(members=tuple(members), generation_seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
