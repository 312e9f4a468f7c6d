"""Online frienemy pruning of the classifier pool.

A frienemy pair is two region members from different classes. A classifier
"crosses" the region when it correctly classifies both sides of at least one
such pair; only crossing classifiers survive pruning. When the region is
single-class, or no classifier crosses it, the whole pool is kept, which
makes the single-class case behaviourally identical to skipping the step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .generation import ClassifierPool
from .region import RegionOfCompetence


@dataclass(frozen=True)
class FrienemySet:
    """All unordered cross-class pairs of region member positions."""

    pairs: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class PrunedPool:
    """Surviving pool member indices, in pool order."""

    selected: tuple[int, ...]
    fallback_used: bool

    def __post_init__(self):
        if not self.selected:
            raise ContractError("pruned pool may not be empty")


def frienemy_pairs(roc: RegionOfCompetence) -> FrienemySet:
    """Enumerate cross-class member pairs; empty for a single-class region."""
    labels = roc.labels
    pairs = [
        (i, j)
        for i in range(len(labels))
        for j in range(i + 1, len(labels))
        if labels[i] != labels[j]
    ]
    return FrienemySet(pairs=tuple(pairs))


def dfp_prune(roc: RegionOfCompetence, pool: ClassifierPool) -> PrunedPool:
    """Keep classifiers that correctly classify both members of some pair.

    Covering a cross-class pair is equivalent to being correct on at least
    one member of each class, so the check reduces to two any-reductions per
    classifier. Falls back to the full pool when the frienemy set is empty or
    no classifier qualifies.
    """
    everyone = tuple(range(len(pool)))
    if len(roc) == 0:
        return PrunedPool(selected=everyone, fallback_used=True)

    classes = np.unique(roc.labels)
    if classes.size < 2:
        return PrunedPool(selected=everyone, fallback_used=True)

    correct = pool.predictions(roc.features) == roc.labels[None, :]
    covers = np.ones(len(pool), dtype=bool)
    for cls in classes:
        covers &= correct[:, roc.labels == cls].any(axis=1)
    if not covers.any():
        return PrunedPool(selected=everyone, fallback_used=True)
    return PrunedPool(selected=tuple(np.flatnonzero(covers).tolist()), fallback_used=False)
