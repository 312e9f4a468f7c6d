"""Dynamic selection techniques and their combiners.

Eight techniques are provided. The single-classifier (DCS) family scores
each pool member's local competence and keeps the argmax: OLA (overall local
accuracy), LCA (accuracy on the predicted class), A Priori and A Posteriori
(distance-weighted posteriors), plus MCB (behaviour-filtered OLA with a
dominance margin). The ensemble (DES) family keeps several members and
votes: DSKNN (accuracy then double-fault diversity), KNORA-Union (one vote
per correctly classified neighbor) and KNORA-Eliminate (perfect on the
region, shrinking it until someone is).

Every decision carries a continuous score for the positive class so ranked
metrics can be computed downstream: the selected classifier's posterior for
DCS outputs, the (weighted) vote fraction for ensemble outputs. Vote ties
break toward the designated positive (minority) class; competence ties break
toward the lower pool index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .generation import ClassifierPool
from .region import RegionOfCompetence

TECHNIQUES = ("OLA", "LCA", "APRI", "APOS", "MCB", "DSKNN", "KNU", "KNE")

_DIST_FLOOR = 1e-12
_DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class DesParams:
    """Technique hyperparameters plus the positive-class designation."""

    positive_label: int = 1
    mcb_similarity_threshold: float = 0.7
    mcb_difference_threshold: float = 0.1
    dsknn_accuracy_fraction: float = 0.5
    dsknn_diversity_fraction: float = 0.3


@dataclass(frozen=True)
class Decision:
    label: int
    positive_score: float
    selected_indices: tuple[int, ...]

    def __post_init__(self):
        if not self.selected_indices:
            raise ContractError("a decision must select at least one classifier")
        if not (0.0 <= self.positive_score <= 1.0):
            raise ContractError(f"positive score {self.positive_score} outside [0, 1]")


def _active(pool: ClassifierPool, active) -> np.ndarray:
    if active is None:
        return np.arange(len(pool))
    idx = np.asarray(list(active), dtype=np.int64)
    if idx.size == 0:
        raise ContractError("active classifier set may not be empty")
    return idx


def _correctness(pool: ClassifierPool, roc: RegionOfCompetence) -> np.ndarray:
    return pool.predictions(roc.features) == roc.labels[None, :]


def _positive_posterior(pool, idx: int, query, positive_label: int) -> float:
    p1 = pool.members[idx].proba(query)
    return p1 if positive_label == 1 else 1.0 - p1


def _single_choice(pool, idx: int, query, params: DesParams) -> Decision:
    label = pool.members[idx].predict(query)
    return Decision(
        label=label,
        positive_score=_positive_posterior(pool, idx, query, params.positive_label),
        selected_indices=(idx,),
    )


def _argmax_lowest(scores: np.ndarray, indices: np.ndarray) -> int:
    best = scores.max()
    return int(indices[np.flatnonzero(scores == best)[0]])


def _vote(pool, indices, query, params: DesParams, weights=None) -> Decision:
    """(Weighted) majority vote; ties go to the positive class."""
    indices = np.asarray(indices, dtype=np.int64)
    preds = pool.predictions(np.asarray(query, dtype=np.float64)[None, :])[indices, 0]
    w = np.ones(indices.size) if weights is None else np.asarray(weights, dtype=np.float64)
    pos = float(w[preds == params.positive_label].sum())
    total = float(w.sum())
    if total <= 0:
        raise ContractError("vote weights must not all be zero")
    score = pos / total
    negative = 1 - params.positive_label
    label = params.positive_label if score >= 0.5 else negative
    return Decision(
        label=label,
        positive_score=score,
        selected_indices=tuple(int(i) for i in indices),
    )


def ola(pool: ClassifierPool, roc: RegionOfCompetence, active=None) -> np.ndarray:
    """Fraction of region members each classifier gets right."""
    if len(roc) == 0:
        raise ContractError("region of competence is empty")
    idx = _active(pool, active)
    return _correctness(pool, roc)[idx].mean(axis=1)


def lca(pool: ClassifierPool, roc: RegionOfCompetence, query, active=None) -> np.ndarray:
    """Accuracy restricted to members whose true label matches the
    classifier's prediction for the query; 0 when no such member exists."""
    if len(roc) == 0:
        raise ContractError("region of competence is empty")
    idx = _active(pool, active)
    query = np.asarray(query, dtype=np.float64)
    query_preds = pool.predictions(query[None, :])[idx, 0]
    correct = _correctness(pool, roc)[idx]
    scores = np.zeros(idx.size)
    for row, omega in enumerate(query_preds):
        mask = roc.labels == omega
        if mask.any():
            scores[row] = correct[row, mask].mean()
    return scores


def _member_weights(roc: RegionOfCompetence) -> np.ndarray:
    return 1.0 / np.maximum(roc.distances, _DIST_FLOOR)


def a_priori(pool: ClassifierPool, roc: RegionOfCompetence, query, active=None) -> np.ndarray:
    """Distance-weighted mean posterior assigned to each member's true label."""
    if len(roc) == 0:
        raise ContractError("region of competence is empty")
    idx = _active(pool, active)
    p1 = pool.probabilities(roc.features)[idx]
    p_true = np.where(roc.labels[None, :] == 1, p1, 1.0 - p1)
    w = _member_weights(roc)
    return (p_true * w[None, :]).sum(axis=1) / w.sum()


def a_posteriori(pool: ClassifierPool, roc: RegionOfCompetence, query, active=None) -> np.ndarray:
    """Posterior mass on the predicted class that falls on members actually
    belonging to it, distance-weighted; 0 when the mass vanishes."""
    if len(roc) == 0:
        raise ContractError("region of competence is empty")
    idx = _active(pool, active)
    query = np.asarray(query, dtype=np.float64)
    query_preds = pool.predictions(query[None, :])[idx, 0]
    p1 = pool.probabilities(roc.features)[idx]
    w = _member_weights(roc)
    scores = np.zeros(idx.size)
    for row, omega in enumerate(query_preds):
        p_omega = p1[row] if omega == 1 else 1.0 - p1[row]
        denom = float((p_omega * w).sum())
        if denom < _DENOM_FLOOR:
            continue
        numer = float((p_omega * w)[roc.labels == omega].sum())
        scores[row] = numer / denom
    return scores


def mcb(
    pool: ClassifierPool,
    roc: RegionOfCompetence,
    query,
    similarity_threshold: float,
    difference_threshold: float,
    params: DesParams,
    active=None,
) -> Decision:
    """Multiple-classifier-behavior selection.

    Region members whose pool-wide prediction pattern is insufficiently
    similar to the query's are dropped (all kept if none survive); local
    accuracies are computed on the rest; the best classifier is used alone
    only when it beats every other by more than ``difference_threshold``,
    otherwise the whole pool votes.
    """
    if len(roc) == 0:
        raise ContractError("region of competence is empty")
    idx = _active(pool, active)
    query = np.asarray(query, dtype=np.float64)
    query_preds = pool.predictions(query[None, :])[idx, 0]
    member_preds = pool.predictions(roc.features)[idx]
    similarity = (member_preds == query_preds[:, None]).mean(axis=0)
    keep = similarity >= similarity_threshold
    if not keep.any():
        keep = np.ones(len(roc), dtype=bool)

    correct = (member_preds == roc.labels[None, :])[:, keep]
    scores = correct.mean(axis=1)
    if idx.size == 1:
        return _single_choice(pool, int(idx[0]), query, params)
    order = np.argsort(-scores, kind="stable")
    best, second = scores[order[0]], scores[order[1]]
    if best - second > difference_threshold:
        return _single_choice(pool, _argmax_lowest(scores, idx), query, params)
    return _vote(pool, idx, query, params)


def desknn(
    pool: ClassifierPool,
    roc: RegionOfCompetence,
    query,
    accuracy_fraction: float,
    diversity_fraction: float,
    params: DesParams,
    active=None,
) -> Decision:
    """Accuracy-then-diversity ensemble selection.

    The most accurate ``ceil(accuracy_fraction * pool)`` members are ranked,
    then ``ceil(diversity_fraction * pool)`` of them are greedily kept by
    minimising the summed pairwise double-fault rate (fraction of region
    members two classifiers both miss), seeded with the most accurate one.
    """
    idx = _active(pool, active)
    query = np.asarray(query, dtype=np.float64)
    if idx.size == 1:
        return _vote(pool, idx, query, params)

    correct = _correctness(pool, roc)[idx]
    scores = correct.mean(axis=1)
    n_acc = max(1, math.ceil(accuracy_fraction * idx.size))
    n_div = max(1, math.ceil(diversity_fraction * idx.size))
    n_div = min(n_div, n_acc)

    order = np.lexsort((idx, -scores))[:n_acc]   # accuracy desc, pool index asc
    miss = ~correct[order]
    double_fault = (miss[:, None, :] & miss[None, :, :]).mean(axis=2)

    chosen = [0]
    remaining = list(range(1, len(order)))
    while len(chosen) < n_div and remaining:
        sums = [double_fault[c, chosen].sum() for c in remaining]
        best_pos = int(np.argmin(sums))  # first minimum: best accuracy rank wins ties
        chosen.append(remaining.pop(best_pos))
    selected = idx[order[chosen]]
    return _vote(pool, np.sort(selected), query, params)


def knora_u(
    pool: ClassifierPool,
    roc: RegionOfCompetence,
    query,
    params: DesParams,
    active=None,
) -> Decision:
    """Union rule: one vote per correctly classified region member.

    Classifiers correct on nothing are excluded; if that excludes everyone,
    the whole pool falls back to an unweighted majority vote.
    """
    if len(roc) == 0:
        raise ContractError("region of competence is empty")
    idx = _active(pool, active)
    votes = _correctness(pool, roc)[idx].sum(axis=1).astype(np.float64)
    if votes.sum() == 0:
        return _vote(pool, idx, np.asarray(query, dtype=np.float64), params)
    keep = votes > 0
    return _vote(pool, idx[keep], np.asarray(query, dtype=np.float64), params, weights=votes[keep])


def knora_e(
    pool: ClassifierPool,
    roc: RegionOfCompetence,
    query,
    params: DesParams,
    active=None,
) -> Decision:
    """Eliminate rule: keep classifiers correct on every region member,
    dropping the farthest member until some classifier qualifies.

    An exhausted region falls back to a full vote of the candidate pool.
    """
    if len(roc) == 0:
        raise ContractError("region of competence is empty")
    idx = _active(pool, active)
    query = np.asarray(query, dtype=np.float64)
    correct = _correctness(pool, roc)[idx]
    for size in range(len(roc), 0, -1):
        qualified = correct[:, :size].all(axis=1)
        if qualified.any():
            return _vote(pool, idx[qualified], query, params)
    return _vote(pool, idx, query, params)


def knora_e_selected(pool, roc, active=None) -> tuple[int, ...]:
    """Indices the eliminate rule would keep at the region's current size
    (empty tuple when nothing qualifies); exposed for shrinkage analyses."""
    idx = _active(pool, active)
    if len(roc) == 0:
        return ()
    qualified = _correctness(pool, roc)[idx].all(axis=1)
    return tuple(int(i) for i in idx[qualified])


def decide(
    technique: str,
    pool: ClassifierPool,
    roc: RegionOfCompetence,
    query,
    params: DesParams | None = None,
    active=None,
) -> Decision:
    """Uniform dispatch over the eight techniques.

    ``active`` restricts the candidate pool (e.g. after pruning) while
    keeping original pool indices in the reported selection.
    """
    params = params or DesParams()
    technique = technique.upper()
    query = np.asarray(query, dtype=np.float64)
    idx = _active(pool, active)

    if technique in ("OLA", "LCA", "APRI", "APOS"):
        if technique == "OLA":
            scores = ola(pool, roc, active=idx)
        elif technique == "LCA":
            scores = lca(pool, roc, query, active=idx)
        elif technique == "APRI":
            scores = a_priori(pool, roc, query, active=idx)
        else:
            scores = a_posteriori(pool, roc, query, active=idx)
        return _single_choice(pool, _argmax_lowest(scores, idx), query, params)
    if technique == "MCB":
        return mcb(
            pool, roc, query,
            params.mcb_similarity_threshold, params.mcb_difference_threshold,
            params, active=idx,
        )
    if technique == "DSKNN":
        return desknn(
            pool, roc, query,
            params.dsknn_accuracy_fraction, params.dsknn_diversity_fraction,
            params, active=idx,
        )
    if technique == "KNU":
        return knora_u(pool, roc, query, params, active=idx)
    if technique == "KNE":
        return knora_e(pool, roc, query, params, active=idx)
    raise ContractError(f"unknown technique {technique!r}; expected one of {TECHNIQUES}")
