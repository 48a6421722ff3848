"""Shared generators and independent oracles for the test suite.

The oracles here recompute quantities with deliberately different arithmetic
(two-pass sums via math.fsum, explicit window loops) so that agreement with
the library is meaningful rather than tautological.
"""

import math

import numpy as np
import pytest

from minimaxsplit import CLASSIFICATION, REGRESSION, Dataset
from minimaxsplit.dataset import NodeView, root_node


def make_node(rng: np.random.Generator, min_size: int = 2, max_size: int = 512,
              n_features: int = 1, task: str = REGRESSION,
              atom_prob: float = 0.5) -> NodeView:
    """A random node: features are continuous or heavily tied ("atomic") per
    coordinate, targets are scaled normals or +-1 labels."""
    m = int(rng.integers(min_size, max_size + 1))
    cols = []
    for _ in range(n_features):
        if rng.uniform() < atom_prob:
            k = int(rng.integers(1, max(2, m // 2) + 1))
            cols.append(rng.integers(0, k, m).astype(np.float64))
        else:
            cols.append(rng.uniform(-1.0, 1.0, m))
    if task == CLASSIFICATION:
        y = np.where(rng.uniform(size=m) < rng.uniform(0.05, 0.95), 1.0, -1.0)
    else:
        scale = 10.0 ** float(rng.integers(-2, 3))
        y = rng.normal(0.0, scale, m)
        if rng.uniform() < 0.1:  # occasional constant target
            y = np.full(m, float(y[0]))
    data = Dataset(features=np.vstack(cols), targets=y, task=task)
    return root_node(data)


def two_pass_sse(y) -> float:
    y = np.asarray(y, dtype=np.float64)
    if y.size <= 1:
        return 0.0
    mu = math.fsum(y) / y.size
    return math.fsum((v - mu) ** 2 for v in y)


def entropy_risk(y) -> float:
    """count * h(positive fraction), natural log."""
    y = np.asarray(y, dtype=np.float64)
    m = y.size
    pos = int(np.sum(y == 1.0))
    if pos == 0 or pos == m:
        return 0.0
    p = pos / m
    return m * (-p * math.log(p) - (1 - p) * math.log(1 - p))


def brute_scan(x, y, mode: str, task: str = REGRESSION):
    """Exhaustive split search with two-pass child risks. Returns
    (threshold, left_risk, right_risk, criterion, left_count) under the
    smallest-threshold tie rule, or None if the feature is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    risk = two_pass_sse if task == REGRESSION else entropy_risk
    best = None
    for i in range(1, xs.size):
        if xs[i] <= xs[i - 1]:
            continue
        lr, rr = risk(ys[:i]), risk(ys[i:])
        crit = {"sum": lr + rr, "max": max(lr, rr),
                "left_only": lr, "right_only": rr}[mode]
        if best is None or crit < best[3]:
            best = ((xs[i - 1] + xs[i]) / 2.0, lr, rr, crit, i)
    return best


def naive_ssim(a, b, window: int = 11, sigma: float = 1.5,
               k1: float = 0.01, k2: float = 0.03) -> float:
    """Doubly-looped reference SSIM with renormalized Gaussian weights."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ax = np.arange(window) - (window - 1) / 2.0
    g = np.exp(-(ax ** 2) / (2 * sigma ** 2))
    wgt = np.outer(g, g)
    wgt /= wgt.sum()
    c1, c2 = k1 ** 2, k2 ** 2
    vals = []
    for r in range(a.shape[0] - window + 1):
        for c in range(a.shape[1] - window + 1):
            pa = a[r:r + window, c:c + window]
            pb = b[r:r + window, c:c + window]
            mua = float((wgt * pa).sum())
            mub = float((wgt * pb).sum())
            va = float((wgt * pa * pa).sum()) - mua * mua
            vb = float((wgt * pb * pb).sum()) - mub * mub
            cov = float((wgt * pa * pb).sum()) - mua * mub
            vals.append(((2 * mua * mub + c1) * (2 * cov + c2))
                        / ((mua ** 2 + mub ** 2 + c1) * (va + vb + c2)))
    return float(np.mean(vals))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
