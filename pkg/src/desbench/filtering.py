"""Minority-preserving edition filters for the validation set.

Both filters decide every removal against the *original* set in a single
pass (the proximity graph is built once; ENN neighbor queries run over the
full set minus the sample itself), and neither ever removes a sample of the
designated minority class. Neighbor-majority ties count as agreement, so a
sample is only edited out on clear evidence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .ingestion import Dataset
from .region import neighbor_order


@dataclass(frozen=True)
class ProximityGraph:
    """Relative-neighbor graph over sample indices.

    An edge (i, j) is present iff no third point k is simultaneously closer
    to i and to j than they are to each other, i.e. the lens-shaped
    intersection of the two spheres of radius dist(i, j) is empty.
    """

    n_vertices: int
    edges: frozenset[tuple[int, int]]

    def neighbors(self, i: int) -> list[int]:
        out = [b for a, b in self.edges if a == i]
        out.extend(a for a, b in self.edges if b == i)
        return sorted(out)


def build_proximity_graph(dsel: Dataset) -> ProximityGraph:
    """Brute-force relative-neighbor graph (cubic; fine at validation scale)."""
    n = dsel.n_samples
    if n < 2:
        raise ContractError("proximity graph needs at least 2 samples")
    X = dsel.features
    sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2)
    edges = set()
    for i in range(n):
        for j in range(i + 1, n):
            dij = sq[i, j]
            blocker = (sq[i] < dij) & (sq[j] < dij)
            blocker[i] = blocker[j] = False
            if not blocker.any():
                edges.add((i, j))
    return ProximityGraph(n_vertices=n, edges=frozenset(edges))


def _resolve_majority(neigh_labels: np.ndarray) -> int:
    """Most frequent label, or -1 when the vote ties or no neighbors exist."""
    if neigh_labels.size == 0:
        return -1
    classes, counts = np.unique(neigh_labels, return_counts=True)
    top = counts.max()
    winners = classes[counts == top]
    return int(winners[0]) if winners.size == 1 else -1


def _agreement(neigh_labels: np.ndarray, own: int) -> float:
    if neigh_labels.size == 0:
        return 0.0
    return float((neigh_labels == own).mean())


def _apply_edit(dsel: Dataset, neighborhoods: list[np.ndarray]) -> Dataset:
    """Shared removal rule: drop a sample iff its neighborhood majority
    disagrees and the sample is not from the minority class.

    If the rule would wipe out every majority-class sample, the one with the
    highest neighborhood agreement (lowest index on ties) is retained so the
    filtered set always holds both classes.
    """
    labels = dsel.labels
    minority = dsel.minority_label
    keep = np.ones(dsel.n_samples, dtype=bool)
    for i, neigh in enumerate(neighborhoods):
        own = int(labels[i])
        if own == minority:
            continue
        vote = _resolve_majority(labels[neigh])
        if vote != -1 and vote != own:
            keep[i] = False

    majority_mask = labels != minority
    if majority_mask.any() and not (keep & majority_mask).any():
        scores = np.array(
            [
                _agreement(labels[neigh], int(labels[i])) if majority_mask[i] else -1.0
                for i, neigh in enumerate(neighborhoods)
            ]
        )
        keep[int(np.argmax(scores))] = True

    return dsel.subset(np.flatnonzero(keep))


def rng_filter(dsel: Dataset) -> Dataset:
    """Edit by relative-neighbor vote over the proximity graph."""
    if np.unique(dsel.labels).size < 2:
        raise ContractError(f"{dsel.name}: filtering needs both classes present")
    graph = build_proximity_graph(dsel)
    adjacency: list[list[int]] = [[] for _ in range(dsel.n_samples)]
    for a, b in graph.edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    neighborhoods = [np.array(sorted(adj), dtype=np.int64) for adj in adjacency]
    return _apply_edit(dsel, neighborhoods)


def enn_filter(dsel: Dataset, k: int = 3) -> Dataset:
    """Edit by k-nearest-neighbor vote (k = 3 by default, the classical choice)."""
    if np.unique(dsel.labels).size < 2:
        raise ContractError(f"{dsel.name}: filtering needs both classes present")
    if dsel.n_samples < k + 1:
        raise ContractError(
            f"{dsel.name}: ENN with k={k} needs at least {k + 1} samples, "
            f"got {dsel.n_samples}"
        )
    X = dsel.features
    diff = X[:, None, :] - X[None, :, :]
    dists = np.sqrt((diff * diff).sum(axis=2))
    neighborhoods = []
    for i in range(dsel.n_samples):
        order = neighbor_order(X, dists[i], dsel.labels)
        order = order[order != i]
        neighborhoods.append(order[:k])
    return _apply_edit(dsel, neighborhoods)
