"""Hand-built toy scenes used as executable examples and CLI smoke data.

The main scene plants a mislabelled sample inside one class's neighborhood
next to a class border, together with three fixed linear classifiers:

* ``c1`` looks locally best only because it fits the planted noise,
* ``c2`` tracks the true border,
* ``c3`` classifies the whole neighborhood as one class.

With plain 4-NN regions on the raw validation set, accuracy-based selection
picks ``c1`` and gets the query wrong. After editing removes the noise and a
2-per-class region is used, frienemy pruning keeps exactly ``c2``, which
classifies the query correctly. All coordinates below were chosen so that
every distance comparison is strict.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .generation import ClassifierPool, Perceptron
from .ingestion import Dataset

# Scene layout (class 0 = "ring", class 1 = "box"; the noise point is row 4).
_SCENE_POINTS = [
    # name   x      y     label
    ("A", 0.74, 0.50, 0),
    ("B", 0.64, 0.50, 0),
    ("C", 0.64, 0.45, 0),
    ("D", 0.76, 0.56, 0),
    ("N", 0.66, 0.57, 1),  # planted noise: a box sample inside the ring cluster
    ("E", 0.82, 0.50, 1),
    ("F", 0.84, 0.50, 1),
    ("G", 0.86, 0.54, 1),
    ("H", 0.87, 0.46, 1),
]
_QUERY = np.array([0.70, 0.50])
_QUERY_LABEL = 1
NOISE_ROW = 4


@dataclass(frozen=True)
class ToyScene:
    validation: Dataset
    pool: ClassifierPool
    query: np.ndarray
    query_label: int
    point_names: tuple[str, ...]

    def rows(self, *names: str) -> list[int]:
        return [self.point_names.index(n) for n in names]


def noisy_border_scene() -> ToyScene:
    """The scene described in the module docstring."""
    feats = np.array([[x, y] for _, x, y, _ in _SCENE_POINTS])
    labels = np.array([lab for _, _, _, lab in _SCENE_POINTS])
    dataset = Dataset.from_arrays(
        "toy_noisy", feats, labels, class_names={0: "ring", 1: "box"}
    )
    pool = ClassifierPool(
        members=(
            # c1: box above y = 0.52 -- fits N (and D) instead of the border
            Perceptron(weights=np.array([0.0, 1.0]), bias=-0.52, index=0),
            # c2: box right of x = 0.67 -- the true border
            Perceptron(weights=np.array([1.0, 0.0]), bias=-0.67, index=1),
            # c3: box only right of x = 0.85 -- whole neighborhood is "ring"
            Perceptron(weights=np.array([1.0, 0.0]), bias=-0.90, index=2),
        ),
        generation_seed=0,
    )
    return ToyScene(
        validation=dataset,
        pool=pool,
        query=_QUERY.copy(),
        query_label=_QUERY_LABEL,
        point_names=tuple(name for name, *_ in _SCENE_POINTS),
    )


def cross_pair_region_points() -> tuple[np.ndarray, np.ndarray]:
    """Five collinear members, two of one class and three of the other.

    Used to exercise cross-class pair enumeration: 2 x 3 = 6 pairs.
    """
    feats = np.array([[0.1], [0.2], [0.7], [0.8], [0.9]])
    labels = np.array([0, 0, 1, 1, 1])
    return feats, labels


def separated_clusters() -> Dataset:
    """Two clean, well-separated clusters; editing filters leave it unchanged."""
    feats = np.array(
        [
            [0.05, 0.10], [0.10, 0.05], [0.08, 0.12], [0.12, 0.08],
            [0.90, 0.95], [0.95, 0.90], [0.88, 0.92], [0.92, 0.88],
        ]
    )
    labels = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    return Dataset.from_arrays(
        "toy_clusters", feats, labels, class_names={0: "left", 1: "right"}
    )


def fixture_text(name: str) -> str:
    """Contents of a bundled .dat fixture (``toy_noisy`` or ``toy_clusters``)."""
    return resources.files("desbench").joinpath("data", f"{name}.dat").read_text()
