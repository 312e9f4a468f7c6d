"""Dataset ingestion: KEEL-format parsing, min-max scaling, replication splits.

Datasets are binary-labelled feature matrices. Class labels are mapped to the
integers 0/1 in order of first appearance in the source file, and the minority
class is designated once per source dataset (by count, lower label on a tie)
and inherited by every subset derived from it, so that editing filters and the
AUC positive class stay stable across folds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContractError,
    InsufficientDataError,
    ParseError,
    UnsupportedProblemError,
)

_OUTER_FOLDS = 5
_INNER_FOLDS = 4


@dataclass(frozen=True)
class Dataset:
    """Immutable labelled sample collection.

    Parameters
    ----------
    name : str
        Identifier used in reports and result records.
    features : ndarray of shape (n_samples, n_features)
        Real-valued attributes, one row per sample.
    labels : ndarray of shape (n_samples,)
        Integer class labels; exactly two distinct values may occur in a
        source dataset (subsets keep the parent's label universe).
    minority_label : int
        The designated minority class. Defaults to the less frequent label
        (lower label value on a tie) and is inherited by ``subset``.
    class_names : dict
        Original class strings keyed by integer label, kept for round-trips
        back to the text format.
    """

    name: str
    features: np.ndarray
    labels: np.ndarray
    minority_label: int
    class_names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        labs = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        if feats.ndim != 2:
            raise UnsupportedProblemError(f"{self.name}: features must be 2-D")
        if feats.shape[0] != labs.shape[0]:
            raise UnsupportedProblemError(
                f"{self.name}: {feats.shape[0]} feature rows vs {labs.shape[0]} labels"
            )
        if not np.all(np.isfinite(feats)):
            raise UnsupportedProblemError(f"{self.name}: non-finite feature values")
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        if not self.class_names:
            names = {int(c): str(int(c)) for c in np.unique(labs)}
            object.__setattr__(self, "class_names", names)

    @classmethod
    def from_arrays(cls, name, features, labels, minority_label=None, class_names=None):
        """Build a dataset, validating the two-class requirement.

        ``minority_label`` defaults to the less frequent class; on equal
        counts the lower label is designated minority.
        """
        labels = np.asarray(labels, dtype=np.int64)
        classes, counts = np.unique(labels, return_counts=True)
        if classes.size != 2:
            raise UnsupportedProblemError(
                f"{name}: expected exactly 2 classes, found {classes.size}"
            )
        if minority_label is None:
            order = np.lexsort((classes, counts))  # count asc, label asc on ties
            minority_label = int(classes[order[0]])
        elif minority_label not in classes:
            raise UnsupportedProblemError(
                f"{name}: designated minority label {minority_label} not present"
            )
        return cls(
            name=name,
            features=features,
            labels=labels,
            minority_label=int(minority_label),
            class_names=dict(class_names or {}),
        )

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def class_counts(self) -> dict[int, int]:
        classes, counts = np.unique(self.labels, return_counts=True)
        return {int(c): int(n) for c, n in zip(classes, counts)}

    @property
    def majority_label(self) -> int:
        others = [c for c in sorted(self.class_names) if c != self.minority_label]
        if others:
            return others[0]
        present = [int(c) for c in np.unique(self.labels) if c != self.minority_label]
        return present[0] if present else self.minority_label

    @property
    def imbalance_ratio(self) -> float:
        counts = self.class_counts
        n_min = counts.get(self.minority_label, 0)
        n_maj = self.n_samples - n_min
        return n_maj / n_min if n_min else float("inf")

    def subset(self, indices, name=None) -> "Dataset":
        """Row selection (repeats allowed); inherits the minority designation."""
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            name=name or self.name,
            features=self.features[indices],
            labels=self.labels[indices],
            minority_label=self.minority_label,
            class_names=dict(self.class_names),
        )


@dataclass(frozen=True)
class ReplicationSplit:
    """One train/validation/test partition of a source dataset.

    The three parts are disjoint and cover the source exactly once; index
    arrays refer to rows of the source dataset.
    """

    train: Dataset
    validation: Dataset
    test: Dataset
    replication_id: int
    seed: int
    train_idx: np.ndarray
    validation_idx: np.ndarray
    test_idx: np.ndarray


def parse_keel(text: str, name: str | None = None) -> Dataset:
    """Parse a KEEL ``.dat`` document into a :class:`Dataset`.

    The header must contain ``@relation``, one ``@attribute`` line per column
    and ``@data``; ``@inputs``/``@outputs`` lines are tolerated and ignored,
    as are ``%`` comment lines. Data rows are comma-separated with the class
    string in the last column. Missing values (``?``) are rejected.
    """
    relation = None
    attributes: list[str] = []
    data_rows: list[tuple[int, str]] = []
    in_data = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if in_data:
            data_rows.append((lineno, line))
            continue
        lower = line.lower()
        if lower.startswith("@relation"):
            parts = line.split(None, 1)
            relation = parts[1].strip() if len(parts) > 1 else ""
        elif lower.startswith("@attribute"):
            parts = line.split(None, 2)
            if len(parts) < 2:
                raise ParseError(f"line {lineno}: malformed @attribute")
            attributes.append(parts[1].strip())
        elif lower.startswith("@inputs") or lower.startswith("@outputs"):
            continue
        elif lower.startswith("@data"):
            if relation is None:
                raise ParseError(f"line {lineno}: @data before @relation")
            if len(attributes) < 2:
                raise ParseError(
                    f"line {lineno}: need at least one feature and a class attribute"
                )
            in_data = True
        elif lower.startswith("@"):
            raise ParseError(f"line {lineno}: unknown header directive {line.split()[0]!r}")
        else:
            raise ParseError(f"line {lineno}: unexpected content before @data")

    if not in_data:
        raise ParseError("missing @data section")
    if not data_rows:
        raise ParseError("no data rows after @data")

    n_cols = len(attributes)
    rows = []
    labels = []
    label_map: dict[str, int] = {}
    for lineno, line in data_rows:
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != n_cols:
            raise ParseError(
                f"line {lineno}: expected {n_cols} columns, found {len(cells)}"
            )
        feats = []
        for j, cell in enumerate(cells[:-1]):
            if cell == "?":
                raise ParseError(f"line {lineno}: missing value in column {j + 1}")
            try:
                feats.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"line {lineno}: non-numeric feature value {cell!r} in column {j + 1}"
                ) from None
        cls = cells[-1]
        if cls == "?":
            raise ParseError(f"line {lineno}: missing class value")
        if cls not in label_map:
            label_map[cls] = len(label_map)
        rows.append(feats)
        labels.append(label_map[cls])

    if len(label_map) != 2:
        raise UnsupportedProblemError(
            f"{name or relation}: expected 2 classes, found {len(label_map)} "
            f"({sorted(label_map)})"
        )
    class_names = {v: k for k, v in label_map.items()}
    return Dataset.from_arrays(
        name=name or relation or "dataset",
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        class_names=class_names,
    )


def write_keel(dataset: Dataset) -> str:
    """Serialize a dataset back to KEEL ``.dat`` text (inverse of parse_keel)."""
    lines = [f"@relation {dataset.name}"]
    for j in range(dataset.n_features):
        lines.append(f"@attribute f{j} real")
    names = dataset.class_names
    lines.append(f"@attribute class {{{', '.join(names[c] for c in sorted(names))}}}")
    lines.append(f"@inputs {', '.join(f'f{j}' for j in range(dataset.n_features))}")
    lines.append("@outputs class")
    lines.append("@data")
    for row, lab in zip(dataset.features, dataset.labels):
        cells = [repr(float(v)) for v in row]
        cells.append(names[int(lab)])
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def minmax_fit_apply(train: Dataset, others: list[Dataset]) -> tuple[Dataset, list[Dataset]]:
    """Rescale all sets to [0, 1] using per-feature bounds fitted on ``train``.

    Constant train columns map to 0.0 everywhere; values outside the train
    bounds clamp to the unit interval.
    """
    if train.n_samples == 0:
        raise ContractError("cannot fit scaling on an empty training set")
    lo = train.features.min(axis=0)
    hi = train.features.max(axis=0)
    span = hi - lo
    constant = span <= 0.0
    safe_span = np.where(constant, 1.0, span)

    def apply(ds: Dataset) -> Dataset:
        scaled = (ds.features - lo) / safe_span
        scaled[:, constant] = 0.0
        np.clip(scaled, 0.0, 1.0, out=scaled)
        return Dataset(
            name=ds.name,
            features=scaled,
            labels=ds.labels,
            minority_label=ds.minority_label,
            class_names=dict(ds.class_names),
        )

    return apply(train), [apply(ds) for ds in others]


def _stratified_folds(labels, indices, n_folds, rng) -> list[np.ndarray]:
    """Per-class round-robin assignment after a seeded shuffle.

    Remainder samples land in the lowest-numbered folds, which keeps fold
    sizes within one sample of each other for every class.
    """
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in sorted(np.unique(labels[indices]).tolist()):
        cls_idx = indices[labels[indices] == cls]
        perm = rng.permutation(cls_idx)
        for j, sample in enumerate(perm):
            folds[j % n_folds].append(int(sample))
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def replication_seed(master_seed: int, replication_id: int) -> int:
    """Stable derived seed for one replication's pool generation."""
    return int(np.random.SeedSequence([master_seed, replication_id]).generate_state(1)[0])


def make_replications(data: Dataset, seed: int) -> list[ReplicationSplit]:
    """Produce the 20 train/validation/test replications of a dataset.

    A stratified 5-fold split assigns each fold once as the test part; the
    remaining four folds undergo a stratified 4-fold split whose folds serve
    once each as validation, the rest as training. Test folds therefore hold
    ~20% of samples, validation ~20%, training ~60%, and each sample appears
    in the test part of exactly four replications.
    """
    for cls, count in sorted(data.class_counts.items()):
        if count < _OUTER_FOLDS:
            raise InsufficientDataError(
                f"{data.name}: class {cls} has {count} samples; "
                f"at least {_OUTER_FOLDS} are required for stratified folding"
            )

    all_idx = np.arange(data.n_samples, dtype=np.int64)
    outer_rng = np.random.default_rng([seed, 0])
    outer = _stratified_folds(data.labels, all_idx, _OUTER_FOLDS, outer_rng)

    splits = []
    for t, test_idx in enumerate(outer):
        rest = np.setdiff1d(all_idx, test_idx)
        inner_rng = np.random.default_rng([seed, 1, t])
        inner = _stratified_folds(data.labels, rest, _INNER_FOLDS, inner_rng)
        for v, val_idx in enumerate(inner):
            train_idx = np.setdiff1d(rest, val_idx)
            rid = t * _INNER_FOLDS + v
            splits.append(
                ReplicationSplit(
                    train=data.subset(train_idx),
                    validation=data.subset(val_idx),
                    test=data.subset(test_idx),
                    replication_id=rid,
                    seed=replication_seed(seed, rid),
                    train_idx=train_idx,
                    validation_idx=val_idx,
                    test_idx=test_idx,
                )
            )
    return splits
