"""Region-of-competence definition: plain KNN and class-balanced KNNE.

Neighbor order is total and permutation-invariant: candidates sort by
Euclidean distance, then lexicographically by coordinates, then by sample
index. The coordinate key means reordering the reference set can only swap
exact duplicate points, so the selected member set is stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, InsufficientNeighborsError
from .ingestion import Dataset


def neighbor_order(features: np.ndarray, distances: np.ndarray, labels=None) -> np.ndarray:
    """Indices sorted by (distance, coordinates, label, index).

    Coordinates and label make the order permutation-invariant up to exact
    duplicate rows; the index breaks the remaining (indistinguishable) ties.
    """
    n = distances.shape[0]
    keys = [np.arange(n)]
    if labels is not None:
        keys.append(np.asarray(labels))
    keys.extend(features[:, j] for j in range(features.shape[1] - 1, -1, -1))
    keys.append(distances)
    return np.lexsort(tuple(keys))


def distances_to(features: np.ndarray, query: np.ndarray) -> np.ndarray:
    diff = features - query[None, :]
    return np.sqrt((diff * diff).sum(axis=1))


@dataclass(frozen=True)
class RegionOfCompetence:
    """Ordered neighbor set for one query.

    ``indices`` refer to rows of the reference dataset; members are sorted
    ascending by distance (ties broken as in :func:`neighbor_order`).
    ``class_shortfall`` records, per class, how many requested neighbors were
    unavailable when the reference set ran out of samples of that class.
    """

    indices: np.ndarray
    labels: np.ndarray
    distances: np.ndarray
    features: np.ndarray
    query: np.ndarray
    k_requested: int
    class_shortfall: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("indices", "labels", "distances", "features", "query"):
            arr = np.ascontiguousarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def drop_farthest(self) -> "RegionOfCompetence":
        """Region without its last (farthest) member."""
        if len(self) == 0:
            raise ContractError("cannot shrink an empty region")
        return RegionOfCompetence(
            indices=self.indices[:-1],
            labels=self.labels[:-1],
            distances=self.distances[:-1],
            features=self.features[:-1],
            query=self.query,
            k_requested=self.k_requested,
            class_shortfall=dict(self.class_shortfall),
        )


def _build(dsel: Dataset, query, order, k_requested, shortfall) -> RegionOfCompetence:
    dists = distances_to(dsel.features, np.asarray(query, dtype=np.float64))
    return RegionOfCompetence(
        indices=np.asarray(order, dtype=np.int64),
        labels=dsel.labels[order],
        distances=dists[order],
        features=dsel.features[order],
        query=np.asarray(query, dtype=np.float64),
        k_requested=k_requested,
        class_shortfall=shortfall,
    )


def knn_region(dsel: Dataset, query, k: int) -> RegionOfCompetence:
    """The k globally nearest samples by Euclidean distance."""
    if k < 1:
        raise ContractError("k must be positive")
    if dsel.n_samples < k:
        raise InsufficientNeighborsError(
            f"{dsel.name}: asked for {k} neighbors, only {dsel.n_samples} samples"
        )
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (dsel.n_features,):
        raise ContractError("query dimension does not match dataset")
    dists = distances_to(dsel.features, query)
    order = neighbor_order(dsel.features, dists, dsel.labels)[:k]
    return _build(dsel, query, order, k, {})


def knne_region(dsel: Dataset, query, k: int) -> RegionOfCompetence:
    """The k nearest samples of each class, merged in global distance order.

    A class with fewer than k samples contributes everything it has and the
    deficit is recorded in ``class_shortfall``; the region then holds
    ``k + m`` members instead of ``2k``. Both classes are always represented,
    so every query is treated as sitting between classes downstream.
    """
    if k < 1:
        raise ContractError("k must be positive")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (dsel.n_features,):
        raise ContractError("query dimension does not match dataset")
    classes = np.unique(dsel.labels)
    if classes.size < 2:
        raise ContractError(f"{dsel.name}: class-balanced region needs both classes present")

    dists = distances_to(dsel.features, query)
    picked = []
    shortfall: dict[int, int] = {}
    for cls in classes.tolist():
        cls_idx = np.flatnonzero(dsel.labels == cls)
        order = neighbor_order(dsel.features[cls_idx], dists[cls_idx], dsel.labels[cls_idx])
        take = min(k, cls_idx.size)
        if take < k:
            shortfall[int(cls)] = k - take
        picked.append(cls_idx[order[:take]])
    merged = np.sort(np.concatenate(picked))  # ascending index so ties stay canonical
    order = neighbor_order(dsel.features[merged], dists[merged], dsel.labels[merged])
    return _build(dsel, query, merged[order], k, shortfall)
