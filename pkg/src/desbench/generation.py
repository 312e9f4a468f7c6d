"""Pool generation: bagging plus classic perceptrons.

Each pool member is trained on its own bootstrap of the training set. The
perceptron uses the Rosenblatt update (learning rate 1.0, zero-initialised
weights, per-epoch seeded shuffles, 100-epoch cap with early stop on a clean
epoch); these hyperparameters are fixed here purely for reproducibility.

``generate_pool`` trains all members in lock-step with vectorised updates.
Member ``i`` is defined to be exactly ``train_perceptron(bootstrap(train,
seed ^ i), ...)``; the batched path reproduces that member bit for bit, which
the test suite asserts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DegenerateBootstrapError
from .ingestion import Dataset

_MAX_REDRAWS = 100
_BOOTSTRAP_STREAM = 0
_SHUFFLE_STREAM = 1
_NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class PerceptronConfig:
    learning_rate: float = 1.0
    epochs: int = 100
    seed: int = 0


@dataclass(frozen=True)
class Perceptron:
    """Linear classifier: predicts class 1 when ``w . x + b >= 0``."""

    weights: np.ndarray
    bias: float
    index: int = 0
    converged: bool = False

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if w.ndim != 1 or not np.all(np.isfinite(w)) or not math.isfinite(self.bias):
            raise ContractError("perceptron weights and bias must be finite 1-D")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def margin(self, x) -> float:
        """Signed distance proxy ``w . x + b``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.weights.shape:
            raise ContractError(
                f"feature vector of length {x.shape} does not match "
                f"weights of length {self.weights.shape}"
            )
        return float((self.weights * x).sum() + self.bias)

    def predict(self, x) -> int:
        """Class 1 on a nonnegative margin (ties at exactly 0 go to class 1)."""
        return 1 if self.margin(x) >= 0.0 else 0

    def proba(self, x) -> float:
        """P(class 1 | x): logistic of the norm-normalised margin.

        Dividing by ||w|| makes the posterior invariant to rescaling the
        weight vector, so probability-based selection does not depend on how
        far training happened to push the weights.
        """
        norm = max(float(np.linalg.norm(self.weights)), _NORM_FLOOR)
        z = self.margin(x) / norm
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)


@dataclass(frozen=True)
class ClassifierPool:
    """Ordered, immutable collection of trained perceptrons."""

    members: tuple[Perceptron, ...]
    generation_seed: int = 0
    _weight_matrix: np.ndarray = field(init=False, repr=False, compare=False)
    _biases: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.members:
            raise ContractError("pool must contain at least one classifier")
        for i, m in enumerate(self.members):
            if m.index != i:
                raise ContractError(f"pool member at position {i} carries index {m.index}")
        w = np.array([m.weights for m in self.members], dtype=np.float64)
        b = np.array([m.bias for m in self.members], dtype=np.float64)
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "_weight_matrix", w)
        object.__setattr__(self, "_biases", b)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def margins(self, X) -> np.ndarray:
        """Margins of every member on every row of X, shape (pool, rows)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self._weight_matrix.shape[1]:
            raise ContractError("feature dimension mismatch")
        return self._weight_matrix @ X.T + self._biases[:, None]

    def predictions(self, X) -> np.ndarray:
        """Label matrix (pool, rows) under the nonnegative-margin rule."""
        return (self.margins(X) >= 0.0).astype(np.int64)

    def probabilities(self, X) -> np.ndarray:
        """P(class 1) matrix (pool, rows) via the norm-normalised logistic."""
        norms = np.maximum(np.linalg.norm(self._weight_matrix, axis=1), _NORM_FLOOR)
        z = self.margins(X) / norms[:, None]
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        e = np.exp(z[~pos])
        out[~pos] = e / (1.0 + e)
        return out


def bootstrap(train: Dataset, seed: int) -> Dataset:
    """Uniform with-replacement resample of ``train`` at its own size.

    Single-class draws are retried with an incremented sub-seed; after 100
    failed redraws (possible only on pathologically tiny sets) a
    DegenerateBootstrapError is raised.
    """
    if train.n_samples == 0:
        raise ContractError("cannot bootstrap an empty dataset")
    n = train.n_samples
    for attempt in range(_MAX_REDRAWS):
        rng = np.random.default_rng([seed, _BOOTSTRAP_STREAM, attempt])
        idx = rng.integers(0, n, size=n)
        if np.unique(train.labels[idx]).size == 2:
            return train.subset(idx)
    raise DegenerateBootstrapError(
        f"{train.name}: {_MAX_REDRAWS} bootstrap draws produced a single class"
    )


def train_perceptron(sample: Dataset, config: PerceptronConfig) -> Perceptron:
    """Train one perceptron on ``sample`` (features expected in [0, 1]).

    Misclassification is judged by the predict rule (class 1 at margin >= 0),
    so a zero margin counts as class 1. Stops early after an epoch with no
    updates and records the fact in ``converged``.
    """
    X = sample.features
    y = sample.labels
    y_pm = np.where(y == 1, 1.0, -1.0)
    n, d = X.shape
    w = np.zeros(d, dtype=np.float64)
    b = 0.0
    rng = np.random.default_rng([config.seed, _SHUFFLE_STREAM])
    lr = config.learning_rate
    converged = False
    for _ in range(config.epochs):
        order = rng.permutation(n)
        updates = 0
        for i in order:
            xi = X[i]
            m = (w * xi).sum() + b
            pred = 1 if m >= 0.0 else 0
            if pred != y[i]:
                w += lr * y_pm[i] * xi
                b += lr * y_pm[i]
                updates += 1
        if updates == 0:
            converged = True
            break
    return Perceptron(weights=w, bias=b, converged=converged)


def generate_pool(
    train: Dataset,
    n: int,
    seed: int,
    config: PerceptronConfig | None = None,
) -> ClassifierPool:
    """Train ``n`` perceptrons, member ``i`` on ``bootstrap(train, seed ^ i)``.

    All members advance epoch by epoch together so the per-step work is one
    vectorised update across the pool, but every member consumes its own
    seeded shuffle stream and therefore matches a standalone
    ``train_perceptron`` run exactly.
    """
    if n < 1:
        raise ContractError("pool size must be at least 1")
    base = config or PerceptronConfig()

    samples = [bootstrap(train, seed ^ i) for i in range(n)]
    Xs = np.stack([s.features for s in samples])            # (n, rows, d)
    ys = np.stack([s.labels for s in samples])              # (n, rows)
    ys_pm = np.where(ys == 1, 1.0, -1.0)
    rngs = [np.random.default_rng([seed ^ i, _SHUFFLE_STREAM]) for i in range(n)]

    rows, d = Xs.shape[1], Xs.shape[2]
    W = np.zeros((n, d), dtype=np.float64)
    B = np.zeros(n, dtype=np.float64)
    active = np.arange(n)
    converged = np.zeros(n, dtype=bool)
    lr = base.learning_rate

    for _ in range(base.epochs):
        if active.size == 0:
            break
        orders = np.stack([rngs[i].permutation(rows) for i in active])
        clean = np.ones(active.size, dtype=bool)
        for t in range(rows):
            pick = orders[:, t]
            xt = Xs[active, pick]                           # (a, d)
            margins = (W[active] * xt).sum(axis=1) + B[active]
            preds = margins >= 0.0
            truth = ys[active, pick] == 1
            wrong = preds != truth
            if wrong.any():
                upd = active[wrong]
                step = lr * ys_pm[upd, pick[wrong], None] * xt[wrong]
                W[upd] += step
                B[upd] += lr * ys_pm[upd, pick[wrong]]
                clean[wrong] = False
        converged[active[clean]] = True
        active = active[~clean]

    members = tuple(
        Perceptron(weights=W[i], bias=float(B[i]), index=i, converged=bool(converged[i]))
        for i in range(n)
    )
    return ClassifierPool(members=members, generation_seed=seed)


def pool_to_json(pool: ClassifierPool) -> str:
    """Serialize a pool so scenario runs can share one generation."""
    doc = {
        "schema": 1,
        "generation_seed": pool.generation_seed,
        "members": [
            {
                "index": m.index,
                "bias": m.bias,
                "converged": m.converged,
                "weights": [float(v) for v in m.weights],
            }
            for m in pool.members
        ],
    }
    return json.dumps(doc, sort_keys=True)


def pool_from_json(text: str) -> ClassifierPool:
    doc = json.loads(text)
    if doc.get("schema") != 1:
        raise ContractError(f"unsupported pool schema {doc.get('schema')!r}")
    members = tuple(
        Perceptron(
            weights=np.array(m["weights"], dtype=np.float64),
            bias=float(m["bias"]),
            index=int(m["index"]),
            converged=bool(m.get("converged", False)),
        )
        for m in sorted(doc["members"], key=lambda m: m["index"])
    )
    return ClassifierPool(members=members, generation_seed=int(doc["generation_seed"]))
