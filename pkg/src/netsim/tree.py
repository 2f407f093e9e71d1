"""CART regression tree, deterministic splitting, and the evaluation metrics.

The tree is grown greedily: candidate thresholds are midpoints between
consecutive distinct sorted feature values, the split minimizing total child
SSE wins, ties break toward the lowest feature index then lowest threshold.
No pruning and no depth cap by default, so feature-distinct training data is
memorized exactly.

The train/test split is pinned bit-exactly: a Fisher-Yates shuffle driven by
splitmix64, train = first floor(fraction * n) shuffled rows.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .data import AttackTable, PairScore
from .errors import DataError, ShapeError

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15

DEFAULT_FEATURES = ("similarity", "source_layers", "target_layers")


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] = DEFAULT_FEATURES

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def take(self, indices) -> "Dataset":
        return Dataset(X=self.X[indices], y=self.y[indices],
                       feature_names=self.feature_names)


@dataclass
class TreeNode:
    value: float | None = None
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None


@dataclass
class TreeModel:
    root: TreeNode
    feature_names: tuple[str, ...]

    def dump(self) -> str:
        """Readable description: indented `feature <= threshold` lines."""
        lines: list[str] = []

        def walk(node: TreeNode, depth: int) -> None:
            pad = "  " * depth
            if node.is_leaf:
                lines.append(f"{pad}value {node.value!r}")
            else:
                lines.append(f"{pad}{self.feature_names[node.feature]} "
                             f"<= {node.threshold!r}")
                walk(node.left, depth + 1)
                walk(node.right, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines) + "\n"


@dataclass
class EvalMetrics:
    mse: float
    baseline_mse: float
    improvement_pct: float | None
    threshold_accuracy: float
    threshold: float


class SplitMix64:
    """Tiny deterministic PRNG: splitmix64, 64-bit state."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates permutation of range(n) driven by splitmix64."""
    rng = SplitMix64(seed)
    indices = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next() % (i + 1)
        indices[i], indices[j] = indices[j], indices[i]
    return indices


def train_test_split(dataset: Dataset, train_fraction: float = 0.8,
                     seed: int = 42) -> tuple[Dataset, Dataset]:
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if dataset.n_rows < 2:
        raise ValueError("need at least 2 rows to split")
    order = shuffled_indices(dataset.n_rows, seed)
    cut = int(math.floor(train_fraction * dataset.n_rows))
    return dataset.take(order[:cut]), dataset.take(order[cut:])


def _node_sse(y: np.ndarray) -> float:
    return float(np.sum(np.square(y - y.mean())))


def _best_split(X: np.ndarray, y: np.ndarray):
    """(feature, threshold, left_mask, total_sse) of the best split, or None.

    Candidate SSEs are computed on the row-ordered subsets, so the value is a
    function of the induced partition alone. Two features carving the same
    partition then tie exactly and fall to the lowest-feature rule.
    """
    best = None
    best_sse = math.inf
    for f in range(X.shape[1]):
        column = X[:, f]
        distinct = np.unique(column)
        for a, b in zip(distinct, distinct[1:]):
            threshold = (a + b) / 2.0
            if threshold >= b:
                # adjacent floats: the midpoint rounded up; route on the
                # left value so the realized partition matches the SSE
                threshold = a
            mask = column <= threshold
            total = _node_sse(y[mask]) + _node_sse(y[~mask])
            if total < best_sse:
                best_sse = total
                best = (f, float(threshold), mask)
    if best is None:
        return None
    return best[0], best[1], best[2], best_sse


def _grow(X: np.ndarray, y: np.ndarray, max_depth, depth: int) -> TreeNode:
    if (y.size < 2 or float(y.max()) == float(y.min())
            or (max_depth is not None and depth >= max_depth)):
        return TreeNode(value=_leaf_value(y))
    split = _best_split(X, y)
    if split is None:
        return TreeNode(value=_leaf_value(y))
    feature, threshold, left_mask, split_sse = split
    if split_sse >= _node_sse(y):
        return TreeNode(value=_leaf_value(y))
    return TreeNode(feature=feature, threshold=threshold,
                    left=_grow(X[left_mask], y[left_mask], max_depth, depth + 1),
                    right=_grow(X[~left_mask], y[~left_mask], max_depth, depth + 1))


def _leaf_value(y: np.ndarray) -> float:
    if float(y.max()) == float(y.min()):
        return float(y[0])
    return float(y.mean())


def fit(train: Dataset, max_depth: int | None = None) -> TreeModel:
    """Grow an unpruned CART regression tree (max_depth=0 forces a single leaf)."""
    if train.n_rows < 1:
        raise ValueError("cannot fit on an empty dataset")
    X = np.asarray(train.X, dtype=np.float64)
    y = np.asarray(train.y, dtype=np.float64)
    return TreeModel(root=_grow(X, y, max_depth, 0),
                     feature_names=tuple(train.feature_names))


def predict(model: TreeModel, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.shape[1] != len(model.feature_names):
        raise ShapeError(f"expected {len(model.feature_names)} features, "
                         f"got {rows.shape[1]}")
    out = np.empty(rows.shape[0], dtype=np.float64)
    for i, row in enumerate(rows):
        node = model.root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[i] = node.value
    return out


def evaluate(model: TreeModel, test: Dataset, threshold: float = 0.01,
             baseline_mean: float = 0.0) -> EvalMetrics:
    """MSE, mean-model baseline MSE, improvement %, and threshold accuracy.

    ``baseline_mean`` is the training-target mean; a zero baseline MSE makes
    the improvement undefined (None). Predictions exactly at the threshold
    distance count as within it.
    """
    if test.n_rows < 1:
        raise ValueError("cannot evaluate on an empty dataset")
    predictions = predict(model, test.X)
    errors = predictions - test.y
    mse = float(np.mean(np.square(errors)))
    baseline_mse = float(np.mean(np.square(baseline_mean - test.y)))
    if baseline_mse > 0.0:
        improvement = 100.0 * (baseline_mse - mse) / baseline_mse
    else:
        improvement = None
    accuracy = float(np.mean(np.abs(errors) <= threshold))
    return EvalMetrics(mse=mse, baseline_mse=baseline_mse,
                       improvement_pct=improvement,
                       threshold_accuracy=accuracy, threshold=threshold)


@dataclass(frozen=True)
class SubsetCriteria:
    """Conjunction of attack-table filters; None fields do not constrain."""
    targeted: bool | None = None
    box: str | None = None
    steps: str | None = None
    attacks: tuple[str, ...] | None = None
    layer_class: str | None = None   # "small" (< 200 target layers) | "large"
    low_std: float | None = None

    def label(self) -> str:
        parts = []
        if self.box is not None:
            parts.append(self.box)
        if self.steps is not None:
            parts.append(self.steps)
        if self.attacks is not None:
            parts.append("+".join(self.attacks))
        if self.layer_class is not None:
            parts.append(self.layer_class)
        if self.low_std is not None:
            parts.append(f"low_std<{self.low_std:g}")
        return "_".join(parts) if parts else "all"


LAYER_CLASS_BOUNDARY = 200  # networks with exactly 200 layers count as "large"


def subset_filter(table: AttackTable, criteria: SubsetCriteria,
                  layer_counts: dict[str, int] | None = None) -> AttackTable:
    """Keep the records matching every supplied criterion.

    The low-std criterion keeps attacks (grouped by name, targeted and
    non-targeted pooled) whose population std of transferred success across
    all (source, target) records is strictly below the threshold. The layer
    class applies to the target network and needs ``layer_counts``.
    """
    if criteria.attacks is not None:
        known = {r.attack_name for r in table}
        unknown = set(criteria.attacks) - known
        if unknown:
            raise DataError(f"unknown attack name(s) in criteria: {sorted(unknown)}")
    if criteria.layer_class is not None:
        if criteria.layer_class not in ("small", "large"):
            raise ValueError(f"layer_class must be 'small' or 'large', "
                             f"got {criteria.layer_class!r}")
        if layer_counts is None:
            raise ValueError("layer_class filtering needs a layer_counts mapping")
    low_std_keep: set[str] | None = None
    if criteria.low_std is not None:
        rates: dict[str, list[float]] = {}
        for r in table:
            if r.transferred:
                rates.setdefault(r.attack_name, []).append(r.success_rate)
        low_std_keep = {name for name, values in rates.items()
                        if float(np.std(values)) < criteria.low_std}
    out: AttackTable = []
    for r in table:
        if criteria.targeted is not None and r.targeted != criteria.targeted:
            continue
        if criteria.box is not None and r.box_class != criteria.box:
            continue
        if criteria.steps is not None and r.step_class != criteria.steps:
            continue
        if criteria.attacks is not None and r.attack_name not in criteria.attacks:
            continue
        if low_std_keep is not None and r.attack_name not in low_std_keep:
            continue
        if criteria.layer_class is not None:
            if r.target_network not in layer_counts:
                raise DataError(f"no layer count for network {r.target_network!r}")
            small = layer_counts[r.target_network] < LAYER_CLASS_BOUNDARY
            if (criteria.layer_class == "small") != small:
                continue
        out.append(r)
    return out


def assemble_features(scores: list[PairScore], table: AttackTable,
                      criteria: SubsetCriteria | None = None,
                      score_kind: str = "cka") -> Dataset:
    """One row per transferred record surviving the filter.

    Features, in order: similarity of the (source, target) pair, source layer
    count, target layer count. Targets are the transferred success rates.
    """
    lookup = {}
    for s in scores:
        lookup[(s.net_a, s.net_b)] = s
        lookup[(s.net_b, s.net_a)] = s
    layer_counts: dict[str, int] = {}
    for s in scores:
        layer_counts[s.net_a] = s.n_layers_a
        layer_counts[s.net_b] = s.n_layers_b
    if criteria is not None:
        table = subset_filter(table, criteria, layer_counts)
    rows, targets = [], []
    for r in table:
        if not r.transferred:
            continue
        pair = lookup.get((r.source_network, r.target_network))
        if pair is None:
            raise DataError(f"no pair score for ({r.source_network}, "
                            f"{r.target_network})")
        rows.append([pair.value(score_kind),
                     float(pair.layers_of(r.source_network)),
                     float(pair.layers_of(r.target_network))])
        targets.append(r.success_rate)
    X = np.asarray(rows, dtype=np.float64).reshape(len(rows), 3)
    return Dataset(X=X, y=np.asarray(targets, dtype=np.float64))


def write_metrics_csv(rows, path) -> None:
    """Table-4-shaped CSV: one row per evaluated subset, nan marks errors."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["subset", "targeted", "mse", "baseline_mse",
                         "mse_improvement_pct", "threshold_accuracy"])
        for subset, targeted, metrics in rows:
            flag = "any" if targeted is None else ("true" if targeted else "false")
            if metrics is None:
                writer.writerow([subset, flag, "nan", "nan", "nan", "nan"])
                continue
            improvement = ("nan" if metrics.improvement_pct is None
                           else repr(metrics.improvement_pct))
            writer.writerow([subset, flag, repr(metrics.mse),
                             repr(metrics.baseline_mse), improvement,
                             repr(metrics.threshold_accuracy)])
