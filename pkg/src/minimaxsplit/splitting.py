"""Split criteria and threshold search.

Node risks are kept unnormalized throughout (sum of squared errors for
regression, count * entropy for classification); the global 1/N shows up only
in reported metrics. Argmins are unaffected and it saves a division per
candidate.

The prefix risk curves phi_L / phi_R over candidate thresholds are computed as
cumulative sums of per-sample Welford increments clamped at zero. The true
increments are non-negative (risk can only grow when a sample joins a child),
so the clamp only strips float noise — and a cumulative sum of non-negative
floats is *exactly* non-decreasing. That exactness is what lets the bisection
search (`minimax_search`) agree with the exhaustive scan bit-for-bit instead
of merely within tolerance.

Tie rule everywhere in this module: smallest threshold, then smallest feature
index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .dataset import CLASSIFICATION, REGRESSION, NodeView
from .errors import ConfigError, UnsplittableError

TAGS = (
    "variance",
    "minimax",
    "cyclic_minimax",
    "one_sided_min",
    "one_sided_max",
    "random_uniform",
    "random_observed",
    "entropy_sum",
    "entropy_minimax",
    "entropy_cyclic_minimax",
)

_SCAN_MODE = {
    "variance": "sum",
    "minimax": "max",
    "cyclic_minimax": "max",
    "one_sided_min": "left_only",
    "one_sided_max": "right_only",
    "entropy_sum": "sum",
    "entropy_minimax": "max",
    "entropy_cyclic_minimax": "max",
}


@dataclass(frozen=True)
class SplitCriterion:
    """Tagged choice of splitting rule.

    one_sided_min / one_sided_max are *surrogates* for the one-sided-purity
    criteria from the end-cut-preference literature (exact published formulas
    are not available): they minimize the single indicated child risk, with
    the usual smallest-threshold tie rule and the node-level min-leaf guard
    applied by the grower.
    """

    tag: str

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ConfigError(f"unknown criterion tag {self.tag!r}; valid: {TAGS}")

    @property
    def is_entropy(self) -> bool:
        return self.tag.startswith("entropy")

    @property
    def is_cyclic(self) -> bool:
        return "cyclic" in self.tag

    @property
    def is_random(self) -> bool:
        return self.tag.startswith("random")

    @property
    def scan_mode(self) -> str:
        return _SCAN_MODE[self.tag]

    def task(self) -> str:
        return CLASSIFICATION if self.is_entropy else REGRESSION


@dataclass(frozen=True)
class SplitDecision:
    feature: int
    threshold: float
    left_risk: float
    right_risk: float
    criterion_value: float
    left_count: int
    right_count: int


@dataclass(frozen=True)
class NodeStats:
    """Sufficient statistics of a node's targets plus its unnormalized risk."""

    count: int
    sum_y: float
    sum_y_sq: float
    pos_count: int
    risk: float

    @classmethod
    def from_targets(cls, y: np.ndarray, task: str = REGRESSION) -> "NodeStats":
        y = np.asarray(y, dtype=np.float64)
        m = int(y.size)
        if m == 0:
            return cls(0, 0.0, 0.0, 0, 0.0)
        # exactly-rounded sums: risk comes from a cancellation-prone
        # difference, so cheap insurance here
        s1 = math.fsum(y)
        s2 = math.fsum(y * y)
        if task == CLASSIFICATION:
            pos = int(np.sum(y == 1.0))
            return cls(m, s1, s2, pos, m * entropy(pos / m))
        if m <= 1 or y.min() == y.max():
            risk = 0.0
        else:
            risk = max(0.0, s2 - s1 * s1 / m)
        return cls(m, s1, s2, int(np.sum(y == 1.0)), risk)


class FeatureScan(NamedTuple):
    """Result of a single-feature threshold search."""

    threshold: float
    left_risk: float
    right_risk: float
    criterion_value: float
    left_count: int
    right_count: int


def entropy(p: float) -> float:
    """Natural-log Shannon entropy of a Bernoulli(p), with 0*log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"entropy argument {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log(p) - (1.0 - p) * math.log1p(-p))


def _entropy_arr(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    inner = (p > 0.0) & (p < 1.0)
    q = p[inner]
    out[inner] = -q * np.log(q) - (1.0 - q) * np.log1p(-q)
    return out


def candidate_thresholds(node: NodeView, feature: int) -> np.ndarray:
    """Midpoints between consecutive distinct sorted values of the feature
    within the node. Empty when the feature is constant on the node.

    Convention throughout the package: x_j < t routes left, x_j >= t right.
    """
    v = np.sort(node.feature_values(feature))
    distinct = v[1:] > v[:-1]
    return (0.5 * (v[:-1] + v[1:]))[distinct]


# ---------------------------------------------------------------------------
# Prefix risk curves
# ---------------------------------------------------------------------------


def _prefix_sse(y: np.ndarray) -> np.ndarray:
    """prefix_sse[i] = SSE of y[: i + 1], non-decreasing by construction."""
    m = y.size
    counts = np.arange(1, m + 1, dtype=np.float64)
    means = np.cumsum(y) / counts
    prev = np.empty_like(y)
    prev[0] = y[0]
    prev[1:] = means[:-1]
    inc = (y - prev) * (y - means)
    np.maximum(inc, 0.0, out=inc)
    inc[0] = 0.0
    return np.cumsum(inc)


def _prefix_entropy_risk(y: np.ndarray) -> np.ndarray:
    """prefix[i] = (i+1) * h(pos/(i+1)) for y[: i + 1], non-decreasing."""
    m = y.size
    counts = np.arange(1, m + 1, dtype=np.float64)
    pos = np.cumsum(y == 1.0)
    risk = counts * _entropy_arr(pos / counts)
    inc = np.diff(risk)
    np.maximum(inc, 0.0, out=inc)
    out = np.empty(m)
    out[0] = 0.0  # single sample is pure
    np.cumsum(inc, out=out[1:])
    return out


class _Curves(NamedTuple):
    thresholds: np.ndarray  # ascending candidate thresholds
    phi_left: np.ndarray  # risk of {x_j < t}, exactly non-decreasing
    phi_right: np.ndarray  # risk of {x_j >= t}, exactly non-increasing
    left_counts: np.ndarray
    node_size: int


def _risk_curves(node: NodeView, feature: int) -> _Curves:
    v = node.feature_values(feature)
    order = np.argsort(v, kind="stable")
    v = v[order]
    y = node.targets()[order]
    m = v.size
    prefix_fn = _prefix_entropy_risk if node.dataset.task == CLASSIFICATION else _prefix_sse
    left_all = prefix_fn(y)
    right_all = prefix_fn(y[::-1])[::-1]  # right_all[i] = risk of y[i:]
    valid = v[1:] > v[:-1]  # split index i in 1..m-1 sits between v[i-1], v[i]
    thresholds = (0.5 * (v[:-1] + v[1:]))[valid]
    phi_left = left_all[:-1][valid]
    phi_right = right_all[1:][valid]
    left_counts = np.arange(1, m)[valid]
    return _Curves(thresholds, phi_left, phi_right, left_counts, m)


def _scan_from_curves(curves: _Curves, mode: str, idx: int) -> FeatureScan:
    lc = int(curves.left_counts[idx])
    left = float(curves.phi_left[idx])
    right = float(curves.phi_right[idx])
    if mode == "sum":
        crit = left + right
    elif mode == "max":
        crit = max(left, right)
    elif mode == "left_only":
        crit = left
    elif mode == "right_only":
        crit = right
    else:
        raise ConfigError(f"unknown scan mode {mode!r}")
    return FeatureScan(float(curves.thresholds[idx]), left, right, crit,
                       lc, curves.node_size - lc)


def scan_feature(node: NodeView, feature: int, mode: str = "sum") -> FeatureScan:
    """Exhaustive left-to-right threshold scan for one feature.

    mode 'sum' minimizes left+right risk, 'max' the larger child risk,
    'left_only'/'right_only' the single indicated child risk. Ties go to the
    smallest threshold.
    """
    curves = _risk_curves(node, feature)
    if curves.thresholds.size == 0:
        raise UnsplittableError(f"feature {feature} is constant on the node")
    if mode == "sum":
        crit = curves.phi_left + curves.phi_right
    elif mode == "max":
        crit = np.maximum(curves.phi_left, curves.phi_right)
    elif mode == "left_only":
        crit = curves.phi_left
    elif mode == "right_only":
        crit = curves.phi_right
    else:
        raise ConfigError(f"unknown scan mode {mode!r}")
    return _scan_from_curves(curves, mode, int(np.argmin(crit)))


def minimax_search(node: NodeView, feature: int) -> FeatureScan:
    """Bisection search for the minimax threshold.

    phi_L is non-decreasing and phi_R non-increasing over candidates (exactly,
    see module docstring), so max(phi_L, phi_R) is valley-shaped: locate the
    first crossing index by bisection, compare the two bracketing candidates,
    and when the left bracket wins walk its plateau to the smallest threshold
    by a second bisection. Returns the same decision as
    scan_feature(node, feature, "max"), exactly.
    """
    curves = _risk_curves(node, feature)
    L, R = curves.phi_left, curves.phi_right
    n_cand = L.size
    if n_cand == 0:
        raise UnsplittableError(f"feature {feature} is constant on the node")

    lo, hi = 0, n_cand  # bisect the first index where L >= R
    while lo < hi:
        mid = (lo + hi) // 2
        if L[mid] >= R[mid]:
            hi = mid
        else:
            lo = mid + 1
    cross = lo

    def plateau_left(bound: int, value: float) -> int:
        # smallest q <= bound with R[q] <= value (R is non-increasing)
        a, b = 0, bound
        while a < b:
            mid = (a + b) // 2
            if R[mid] <= value:
                b = mid
            else:
                a = mid + 1
        return a

    if cross == 0:
        pick = 0
    elif cross == n_cand:
        pick = plateau_left(n_cand - 1, float(R[n_cand - 1]))
    else:
        crit_before = max(float(L[cross - 1]), float(R[cross - 1]))
        crit_at = max(float(L[cross]), float(R[cross]))
        if crit_at < crit_before:
            pick = cross
        else:
            pick = plateau_left(cross - 1, crit_before)
    return _scan_from_curves(curves, "max", pick)


# ---------------------------------------------------------------------------
# Node-level best split
# ---------------------------------------------------------------------------


def _nonconstant(node: NodeView, feature: int) -> bool:
    v = node.feature_values(feature)
    return v.size > 1 and float(v.min()) < float(v.max())


def _random_split(node: NodeView, criterion: SplitCriterion,
                  features: Sequence[int], rng: np.random.Generator) -> Optional[SplitDecision]:
    eligible = [j for j in features if _nonconstant(node, j)]
    if not eligible:
        return None
    j = int(eligible[int(rng.integers(len(eligible)))])
    curves = _risk_curves(node, j)
    if criterion.tag == "random_observed":
        idx = int(rng.integers(curves.thresholds.size))
    else:  # random_uniform over the node's value range
        v = node.feature_values(j)
        vmin, vmax = float(v.min()), float(v.max())
        t = vmin
        for _ in range(64):
            t = vmin + float(rng.uniform()) * (vmax - vmin)
            if t > vmin:  # guarantees a nonempty left child; right holds vmax
                break
        else:  # pathological range; take the smallest valid midpoint
            t = float(curves.thresholds[0])
        # t lands in (vmin, vmax); the induced partition has left count #{x < t}
        order_stat = np.sort(v)
        left_count = int(np.searchsorted(order_stat, t, side="left"))
        idx = int(np.searchsorted(curves.left_counts, left_count))
        scan = _scan_from_curves(curves, "sum", idx)
        return SplitDecision(j, float(t), scan.left_risk, scan.right_risk,
                             scan.left_risk + scan.right_risk, left_count,
                             node.size - left_count)
    scan = _scan_from_curves(curves, "sum", idx)
    return SplitDecision(j, scan.threshold, scan.left_risk, scan.right_risk,
                         scan.criterion_value, scan.left_count, scan.right_count)


def best_split(node: NodeView, criterion: SplitCriterion,
               allowed_features: Optional[Sequence[int]] = None,
               rng: Optional[np.random.Generator] = None) -> Optional[SplitDecision]:
    """Best (feature, threshold) for the node under the criterion.

    allowed_features defaults to all; cyclic tags ignore it and use feature
    (depth mod d). Random baselines draw the feature uniformly among allowed
    features that are non-constant on the node (a constant feature offers no
    thresholds), then draw their threshold from `rng`. Returns None when no
    allowed feature is splittable.
    """
    d = node.dataset.n_features
    want = criterion.task()
    if node.dataset.task != want:
        raise ConfigError(f"criterion {criterion.tag!r} requires a {want} dataset")
    if allowed_features is None:
        features = range(d)
    else:
        features = list(allowed_features)
        if not features:
            raise ConfigError("allowed_features must be nonempty")
        if any(not 0 <= j < d for j in features):
            raise ConfigError(f"feature index outside [0, {d})")

    if criterion.is_random:
        if rng is None:
            raise ConfigError(f"{criterion.tag} requires an rng stream")
        return _random_split(node, criterion, features, rng)

    if criterion.is_cyclic:
        features = [node.depth % d]

    mode = criterion.scan_mode
    best: Optional[SplitDecision] = None
    for j in sorted(set(int(j) for j in features)):
        try:
            if mode == "max":
                scan = minimax_search(node, j)
            else:
                scan = scan_feature(node, j, mode)
        except UnsplittableError:
            continue
        if best is None or scan.criterion_value < best.criterion_value:
            best = SplitDecision(j, scan.threshold, scan.left_risk, scan.right_risk,
                                 scan.criterion_value, scan.left_count, scan.right_count)
    return best
