"""Tree growth, prediction, partition summaries, and serialization.

Growth is breadth-first and level-synchronous: every node at depth k is
resolved (split, persisted, or retired to a leaf) before any node at depth
k + 1. A node becomes a leaf at the first matching rule, checked in this
order: depth cap, constant targets (exact equality), no non-constant feature,
size <= n_min. Cyclic criteria add a persistence case: when only the
*scheduled* feature is constant on the node, the node stays active and
retries at the next level with the next scheduled feature.

risk_trace[k] is the mean unnormalized risk (per training sample) of the
partition obtained by cutting the tree at depth k; it has max_depth + 1
entries and is exactly non-increasing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .dataset import CLASSIFICATION, Dataset, NodeView, root_node
from .errors import ConfigError, DataError
from .rng import stream
from .splitting import NodeStats, SplitCriterion, best_split

FORMAT_TREE = "tree-v1"


def canonical_json(doc) -> str:
    """Deterministic JSON encoding: sorted keys, no whitespace, no NaN."""
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)


@dataclass(frozen=True)
class GrowConfig:
    """Knobs for a single tree. n_min is a *strict* lower bound: a node is
    split only when it holds more than n_min samples.

    Feature policy: by default every feature is in play at every node;
    fixed_features restricts all nodes to one subset; m_try draws a fresh
    random subset of that size per split attempt (the forest hook). The two
    are mutually exclusive. The seed only matters for m_try and the random
    baseline criteria."""

    criterion: Union[SplitCriterion, str]
    max_depth: int
    n_min: int = 1
    fixed_features: Optional[Tuple[int, ...]] = None
    m_try: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.criterion, str):
            object.__setattr__(self, "criterion", SplitCriterion(self.criterion))
        if not isinstance(self.max_depth, int) or self.max_depth < 0:
            raise ConfigError(f"max_depth must be a nonnegative int, got {self.max_depth!r}")
        if not isinstance(self.n_min, int) or self.n_min < 1:
            raise ConfigError(f"n_min must be a positive int, got {self.n_min!r}")
        if self.fixed_features is not None:
            if self.m_try is not None:
                raise ConfigError("fixed_features and m_try are mutually exclusive")
            feats = tuple(int(j) for j in self.fixed_features)
            if not feats:
                raise ConfigError("fixed_features must be nonempty")
            object.__setattr__(self, "fixed_features", feats)
        if self.m_try is not None and (not isinstance(self.m_try, int) or self.m_try < 1):
            raise ConfigError(f"m_try must be a positive int or None, got {self.m_try!r}")


class _Builder:
    """Accumulates per-node records during growth."""

    def __init__(self, task: str):
        self.task = task
        self.depth: List[int] = []
        self.count: List[int] = []
        self.risk: List[float] = []
        self.value: List[float] = []
        self.log_odds: List[float] = []
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.split_level: List[int] = []
        self.leaf_reason: List[Optional[str]] = []

    def add(self, view: NodeView, risk: float) -> int:
        y = view.targets()
        m = y.size
        if self.task == CLASSIFICATION:
            pos = int(np.sum(y == 1.0))
            value = pos / m
            log_odds = math.log((pos + 0.5) / (m - pos + 0.5))
        else:
            value = float(np.mean(y))
            log_odds = math.nan
        self.depth.append(view.depth)
        self.count.append(m)
        self.risk.append(float(risk))
        self.value.append(value)
        self.log_odds.append(log_odds)
        self.feature.append(-1)
        self.threshold.append(math.nan)
        self.left.append(-1)
        self.right.append(-1)
        self.split_level.append(-1)
        self.leaf_reason.append(None)
        return len(self.count) - 1

    def make_internal(self, node_id: int, feature: int, threshold: float,
                      left_id: int, right_id: int, level: int) -> None:
        self.feature[node_id] = feature
        self.threshold[node_id] = threshold
        self.left[node_id] = left_id
        self.right[node_id] = right_id
        self.split_level[node_id] = level


@dataclass
class TreeModel:
    """Flat-array tree. Leaves have left == -1; their threshold is NaN.

    `value` is the node's fitted prediction (target mean for regression, the
    raw positive-class fraction for classification) and is stored for every
    node so that depth-truncated prediction works. `split_level` records the
    level a node split at, which exceeds its creation depth only for nodes a
    cyclic criterion persisted past a constant scheduled feature.
    """

    task: str
    n_features: int
    criterion: str
    max_depth: int
    n_min: int
    n_train: int
    depth: np.ndarray
    count: np.ndarray
    risk: np.ndarray
    value: np.ndarray
    log_odds: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    split_level: np.ndarray
    leaf_reason: List[Optional[str]]
    risk_trace: List[float] = field(default_factory=list)

    @property
    def n_nodes(self) -> int:
        return int(self.count.size)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.left < 0))

    # -- prediction --------------------------------------------------------

    def _as_matrix(self, X) -> Tuple[np.ndarray, bool]:
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ConfigError(
                f"expected points with {self.n_features} features, got shape {X.shape}")
        return X, single

    def apply(self, X, max_depth: Optional[int] = None) -> np.ndarray:
        """Index of the partition cell each point falls into, where the
        partition is the tree cut at `max_depth` (None = full tree)."""
        X, single = self._as_matrix(X)
        if max_depth is not None and max_depth < 0:
            raise ConfigError("max_depth must be nonnegative")
        idx = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            descend = self.left[idx] >= 0
            if max_depth is not None:
                descend &= self.split_level[idx] < max_depth
            if not descend.any():
                break
            rows = np.nonzero(descend)[0]
            cur = idx[rows]
            go_left = X[rows, self.feature[cur]] < self.threshold[cur]
            idx[rows] = np.where(go_left, self.left[cur], self.right[cur])
        return idx[0] if single else idx

    def predict_value(self, X, max_depth: Optional[int] = None):
        """Fitted node value (mean / positive fraction) at each point."""
        cell = self.apply(X, max_depth)
        out = self.value[cell]
        return float(out) if np.ndim(cell) == 0 else out

    def predict_log_odds(self, X, max_depth: Optional[int] = None):
        if self.task != CLASSIFICATION:
            raise ConfigError("log-odds prediction requires a classification tree")
        cell = self.apply(X, max_depth)
        out = self.log_odds[cell]
        return float(out) if np.ndim(cell) == 0 else out

    def predict(self, X, max_depth: Optional[int] = None):
        """Regression: fitted mean. Classification: label in {-1, +1}, +1 when
        the node's positive fraction is >= 1/2."""
        vals = self.predict_value(X, max_depth)
        if self.task == CLASSIFICATION:
            return np.where(np.asarray(vals) >= 0.5, 1.0, -1.0) if np.ndim(vals) else (
                1.0 if vals >= 0.5 else -1.0)
        return vals

    # -- partitions ---------------------------------------------------------

    def partition_ids(self, max_depth: Optional[int] = None) -> np.ndarray:
        """Node ids forming the partition at the given cut (leaves if None)."""
        leaf = self.left < 0
        if max_depth is None:
            return np.nonzero(leaf)[0]
        if max_depth < 0:
            raise ConfigError("max_depth must be nonnegative")
        member = (self.depth <= max_depth) & (leaf | (self.split_level >= max_depth))
        return np.nonzero(member)[0]

    def cell_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Hyper-rectangle (lows, highs) per node, each (n_nodes, d), with
        +-inf for unbounded sides. Children inherit the parent box shrunk at
        the split threshold."""
        lows = np.full((self.n_nodes, self.n_features), -np.inf)
        highs = np.full((self.n_nodes, self.n_features), np.inf)
        for i in range(self.n_nodes):
            if self.left[i] < 0:
                continue
            j, t = int(self.feature[i]), float(self.threshold[i])
            for child in (int(self.left[i]), int(self.right[i])):
                lows[child] = lows[i]
                highs[child] = highs[i]
            highs[int(self.left[i]), j] = t
            lows[int(self.right[i]), j] = t
        return lows, highs


@dataclass(frozen=True)
class PartitionReport:
    """Per-cell inventory of one partition (a depth cut of a tree) plus the
    leaf-size summary: size_mean = (1/L) sum of cell counts and size_sd its
    population standard deviation (divide by L, not L-1). Bounds are the
    axis-aligned boxes, +-inf on unbounded sides. Risks are unnormalized
    except risk_mean, which divides by the training size."""

    n_cells: int
    cell_depths: Tuple[int, ...]
    cell_counts: Tuple[int, ...]
    cell_values: Tuple[float, ...]
    cell_risks: Tuple[float, ...]
    cell_bounds: Tuple[Tuple[Tuple[float, float], ...], ...]
    size_mean: float
    size_sd: float
    risk_sum: float
    risk_mean: float
    max_risk: float


def partition_report(tree: TreeModel, max_depth: Optional[int] = None) -> PartitionReport:
    ids = tree.partition_ids(max_depth)
    counts = tree.count[ids]
    risks = tree.risk[ids]
    lows, highs = tree.cell_bounds()
    boxes = tuple(
        tuple((float(lows[i, j]), float(highs[i, j])) for j in range(tree.n_features))
        for i in ids)
    return PartitionReport(
        n_cells=int(ids.size),
        cell_depths=tuple(int(k) for k in tree.depth[ids]),
        cell_counts=tuple(int(c) for c in counts),
        cell_values=tuple(float(v) for v in tree.value[ids]),
        cell_risks=tuple(float(r) for r in risks),
        cell_bounds=boxes,
        size_mean=float(np.mean(counts)),
        size_sd=float(np.std(counts)),
        risk_sum=float(np.sum(risks)),
        risk_mean=float(np.sum(risks)) / tree.n_train,
        max_risk=float(np.max(risks)),
    )


def classify(tree: TreeModel, X, max_depth: Optional[int] = None):
    """Plug-in label(s) in {-1, +1} together with the smoothed log-odds.
    The label uses the raw positive fraction (+1 iff >= 1/2); the log-odds
    uses the (pos + 1/2)/(count + 1) smoothing and is always finite."""
    if tree.task != CLASSIFICATION:
        raise ConfigError("classify requires a classification tree")
    return tree.predict(X, max_depth), tree.predict_log_odds(X, max_depth)


def grow(data: Dataset, config: GrowConfig, *,
         features_rng: Optional[np.random.Generator] = None,
         splits_rng: Optional[np.random.Generator] = None) -> TreeModel:
    """Grow one tree, breadth-first. With m_try set, a fresh feature subset
    of that size is drawn for every split attempt, in breadth-first node
    order. The rng keywords let a forest substitute its per-tree streams;
    standalone use derives them from config.seed."""
    crit = config.criterion
    d = data.n_features
    n = data.n_samples
    m_try = config.m_try
    fixed = config.fixed_features
    if crit.task() != data.task:
        raise ConfigError(f"criterion {crit.tag!r} requires a {crit.task()} dataset")
    if fixed is not None and any(not 0 <= j < d for j in fixed):
        raise ConfigError(f"fixed_features outside [0, {d})")
    if m_try is not None:
        if not 1 <= m_try <= d:
            raise ConfigError(f"m_try must be in [1, {d}], got {m_try}")
        if crit.is_cyclic:
            raise ConfigError("cyclic criteria fix the feature per level; "
                              "feature subsampling contradicts that")
        if features_rng is None:
            features_rng = stream(config.seed, "features")
    if splits_rng is None and crit.is_random:
        splits_rng = stream(config.seed, "splits")

    builder = _Builder(data.task)
    view = root_node(data)
    root_risk = NodeStats.from_targets(data.targets, data.task).risk
    root_id = builder.add(view, root_risk)
    total = root_risk
    trace = [total / n]
    frontier: List[Tuple[int, NodeView]] = [(root_id, view)]
    # the unsplittable screen looks at the features a node could ever use:
    # the fixed subset if one is set, otherwise all of them (cyclic rules and
    # per-node draws range over all features)
    screen = fixed if (fixed is not None and not crit.is_cyclic) else tuple(range(d))

    for level in range(config.max_depth):
        nxt: List[Tuple[int, NodeView]] = []
        for node_id, node in frontier:
            y = node.targets()
            if float(y.min()) == float(y.max()):
                builder.leaf_reason[node_id] = "constant_target"
                continue
            if not any(_spread(node, j) for j in screen):
                builder.leaf_reason[node_id] = "constant_features"
                continue
            if node.size <= config.n_min:
                builder.leaf_reason[node_id] = "n_min"
                continue
            allowed: Optional[Sequence[int]] = fixed
            if m_try is not None:
                allowed = np.sort(features_rng.choice(d, size=m_try, replace=False)).tolist()
            decision = best_split(node, crit, allowed, rng=splits_rng)
            if decision is None:
                if crit.is_cyclic:
                    # scheduled feature is constant here but another is not
                    nxt.append((node_id, NodeView(data, node.member_indices, node.depth + 1)))
                else:
                    builder.leaf_reason[node_id] = "no_valid_split"
                continue
            mask = node.feature_values(decision.feature) < decision.threshold
            left_view = NodeView(data, node.member_indices[mask], node.depth + 1)
            right_view = NodeView(data, node.member_indices[~mask], node.depth + 1)
            left_id = builder.add(left_view, decision.left_risk)
            right_id = builder.add(right_view, decision.right_risk)
            builder.make_internal(node_id, decision.feature, decision.threshold,
                                  left_id, right_id, level)
            nxt.append((left_id, left_view))
            nxt.append((right_id, right_view))
            # children risks come from the scan's prefix curves, the parent's
            # from its own creation; clamp so float noise in a zero-reduction
            # split can never tick the trace upward
            total -= max(0.0, builder.risk[node_id]
                         - decision.left_risk - decision.right_risk)
        trace.append(total / n)
        frontier = nxt
        if not frontier:
            break
    for node_id, _ in frontier:
        builder.leaf_reason[node_id] = "depth"
    while len(trace) < config.max_depth + 1:
        trace.append(trace[-1])

    return TreeModel(
        task=data.task,
        n_features=d,
        criterion=crit.tag,
        max_depth=config.max_depth,
        n_min=config.n_min,
        n_train=n,
        depth=np.asarray(builder.depth, dtype=np.int64),
        count=np.asarray(builder.count, dtype=np.int64),
        risk=np.asarray(builder.risk, dtype=np.float64),
        value=np.asarray(builder.value, dtype=np.float64),
        log_odds=np.asarray(builder.log_odds, dtype=np.float64),
        feature=np.asarray(builder.feature, dtype=np.int64),
        threshold=np.asarray(builder.threshold, dtype=np.float64),
        left=np.asarray(builder.left, dtype=np.int64),
        right=np.asarray(builder.right, dtype=np.int64),
        split_level=np.asarray(builder.split_level, dtype=np.int64),
        leaf_reason=builder.leaf_reason,
        risk_trace=trace,
    )


def _spread(node: NodeView, feature: int) -> bool:
    v = node.feature_values(feature)
    return v.size > 1 and float(v.min()) < float(v.max())


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _none_if_nan(x: float) -> Optional[float]:
    return None if math.isnan(x) else float(x)


def tree_to_doc(tree: TreeModel) -> dict:
    nodes = []
    for i in range(tree.n_nodes):
        leaf = tree.left[i] < 0
        nodes.append({
            "depth": int(tree.depth[i]),
            "count": int(tree.count[i]),
            "risk": float(tree.risk[i]),
            "value": float(tree.value[i]),
            "log_odds": _none_if_nan(float(tree.log_odds[i])),
            "feature": None if leaf else int(tree.feature[i]),
            "threshold": None if leaf else float(tree.threshold[i]),
            "left": None if leaf else int(tree.left[i]),
            "right": None if leaf else int(tree.right[i]),
            "split_level": None if leaf else int(tree.split_level[i]),
            "leaf_reason": tree.leaf_reason[i],
        })
    return {
        "format": FORMAT_TREE,
        "task": tree.task,
        "n_features": tree.n_features,
        "criterion": tree.criterion,
        "max_depth": tree.max_depth,
        "n_min": tree.n_min,
        "n_train": tree.n_train,
        "risk_trace": [float(u) for u in tree.risk_trace],
        "nodes": nodes,
    }


def tree_from_doc(doc: dict) -> TreeModel:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TREE:
        raise DataError(f"not a {FORMAT_TREE} document")
    try:
        raw = doc["nodes"]
        nan = math.nan
        return TreeModel(
            task=doc["task"],
            n_features=int(doc["n_features"]),
            criterion=doc["criterion"],
            max_depth=int(doc["max_depth"]),
            n_min=int(doc["n_min"]),
            n_train=int(doc["n_train"]),
            depth=np.asarray([r["depth"] for r in raw], dtype=np.int64),
            count=np.asarray([r["count"] for r in raw], dtype=np.int64),
            risk=np.asarray([r["risk"] for r in raw], dtype=np.float64),
            value=np.asarray([r["value"] for r in raw], dtype=np.float64),
            log_odds=np.asarray(
                [nan if r["log_odds"] is None else r["log_odds"] for r in raw],
                dtype=np.float64),
            feature=np.asarray(
                [-1 if r["feature"] is None else r["feature"] for r in raw], dtype=np.int64),
            threshold=np.asarray(
                [nan if r["threshold"] is None else r["threshold"] for r in raw],
                dtype=np.float64),
            left=np.asarray(
                [-1 if r["left"] is None else r["left"] for r in raw], dtype=np.int64),
            right=np.asarray(
                [-1 if r["right"] is None else r["right"] for r in raw], dtype=np.int64),
            split_level=np.asarray(
                [-1 if r["split_level"] is None else r["split_level"] for r in raw],
                dtype=np.int64),
            leaf_reason=[r["leaf_reason"] for r in raw],
            risk_trace=[float(u) for u in doc["risk_trace"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed {FORMAT_TREE} document: {exc}") from exc


def tree_to_json(tree: TreeModel) -> str:
    """Canonical (byte-stable) JSON for a tree."""
    return canonical_json(tree_to_doc(tree))


def tree_from_json(text: str) -> TreeModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON: {exc}") from exc
    return tree_from_doc(doc)
