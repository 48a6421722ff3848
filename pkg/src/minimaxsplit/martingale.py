"""Recursive partitioning of a discrete law on the line.

A `DiscreteLaw` is a finite probability measure with strictly ascending atoms.
Cells of a partition are contiguous index ranges [lo, hi); splitting at
boundary b sends {U < atoms[b]} left and {U >= atoms[b]} right, and the
reported boundary is atoms[b] — the supremum of the minimizing equivalence
class of cut points. The mse curve of a rule is the partition risk
E[(U - E[U | cell])^2] after k rounds of splitting every multi-atom cell,
which is non-increasing in k by the martingale property of conditional means.

Tie rule for the scanned rules (variance, minimax, median): the *largest*
minimizing boundary. The within-cell prefix risk curves reuse the clamped
weighted-increment construction (West's update), so they are exactly
monotone and the minimax crossing search is exact, mirroring the empirical
splitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import ConfigError, DataError
from .rng import stream

RULES = ("variance", "simons", "minimax", "median")


@dataclass(frozen=True)
class DiscreteLaw:
    """Probability law with strictly ascending float atoms. Weights are
    normalized to sum to one on construction."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.ascontiguousarray(np.asarray(self.atoms, dtype=np.float64))
        weights = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float64))
        if atoms.ndim != 1 or weights.ndim != 1 or atoms.size != weights.size:
            raise ConfigError("atoms and weights must be 1-D arrays of equal length")
        if atoms.size == 0:
            raise ConfigError("law needs at least one atom")
        if not np.all(np.isfinite(atoms)) or not np.all(np.isfinite(weights)):
            raise ConfigError("atoms and weights must be finite")
        if np.any(atoms[1:] <= atoms[:-1]):
            raise ConfigError("atoms must be strictly ascending")
        if np.any(weights <= 0.0):
            raise ConfigError("weights must be positive")
        total = float(np.sum(weights))
        weights = weights / total
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def n_atoms(self) -> int:
        return int(self.atoms.size)

    def cell_mass(self, lo: int, hi: int) -> float:
        return float(np.sum(self.weights[lo:hi]))

    def cell_mean(self, lo: int, hi: int) -> float:
        w = self.weights[lo:hi]
        return float(np.dot(w, self.atoms[lo:hi]) / np.sum(w))

    def cell_risk(self, lo: int, hi: int) -> float:
        """Unconditional contribution sum_i w_i (u_i - cell mean)^2."""
        if hi - lo <= 1:
            return 0.0
        u = self.atoms[lo:hi]
        w = self.weights[lo:hi]
        delta = u - np.dot(w, u) / np.sum(w)
        return max(0.0, float(np.dot(w, delta * delta)))

    def mean(self) -> float:
        return self.cell_mean(0, self.n_atoms)

    def variance(self) -> float:
        return self.cell_risk(0, self.n_atoms)


def _weighted_prefix_sse(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """prefix[i] = sum_{j<=i} w_j (u_j - weighted mean of u[:i+1])^2,
    exactly non-decreasing (cumsum of clamped West increments)."""
    cw = np.cumsum(w)
    means = np.cumsum(w * u) / cw
    prev = np.empty_like(u)
    prev[0] = u[0]
    prev[1:] = means[:-1]
    inc = w * (u - prev) * (u - means)
    np.maximum(inc, 0.0, out=inc)
    inc[0] = 0.0
    return np.cumsum(inc)


def _cell_curves(law: DiscreteLaw, lo: int, hi: int) -> Tuple[np.ndarray, np.ndarray]:
    """(phi_L, phi_R) over boundaries b = lo+1 .. hi-1; phi_L[j] / phi_R[j] is
    the risk contribution of [lo, lo+1+j) / [lo+1+j, hi)."""
    u = law.atoms[lo:hi]
    w = law.weights[lo:hi]
    left = _weighted_prefix_sse(u, w)
    right = _weighted_prefix_sse(u[::-1], w[::-1])[::-1]
    return left[:-1], right[1:]


def split_cell(law: DiscreteLaw, lo: int, hi: int, rule: str) -> int:
    """Boundary index b in (lo, hi) for the rule; [lo, b) goes left.

    variance: minimize left + right risk contribution (largest minimizer).
    simons: cut at the cell's conditional mean; an atom exactly at the mean
      goes right.
    minimax: minimize max(left, right) contribution (largest minimizer),
      found by bisection on the monotone prefix curves.
    median: make the child masses as equal as possible (largest minimizer).
    """
    if rule not in RULES:
        raise ConfigError(f"unknown rule {rule!r}; valid: {RULES}")
    if not 0 <= lo < hi <= law.n_atoms:
        raise ConfigError(f"bad cell [{lo}, {hi})")
    if hi - lo < 2:
        raise ConfigError("cannot split a single-atom cell")

    if rule == "simons":
        mean = law.cell_mean(lo, hi)
        b_rel = int(np.searchsorted(law.atoms[lo:hi], mean, side="left"))
        # the mean is strictly inside (atoms[lo], atoms[hi-1]]; clamp anyway
        # so float dust can never produce an empty child
        return lo + min(max(b_rel, 1), hi - lo - 1)

    if rule == "median":
        w = law.weights[lo:hi]
        total = float(np.sum(w))
        left_mass = np.cumsum(w[:-1])
        gap = np.abs(2.0 * left_mass - total)
        return lo + 1 + (gap.size - 1 - int(np.argmin(gap[::-1])))

    L, R = _cell_curves(law, lo, hi)
    if rule == "variance":
        crit = L + R
        return lo + 1 + (crit.size - 1 - int(np.argmin(crit[::-1])))

    # minimax: first crossing of the monotone curves, then the right edge of
    # the minimizing plateau
    n_cand = L.size
    a, b = 0, n_cand
    while a < b:
        mid = (a + b) // 2
        if L[mid] >= R[mid]:
            b = mid
        else:
            a = mid + 1
    cross = a

    def plateau_right(start: int, value: float) -> int:
        # largest q >= start with L[q] <= value (L is non-decreasing)
        a2, b2 = start, n_cand - 1
        while a2 < b2:
            mid = (a2 + b2 + 1) // 2
            if L[mid] <= value:
                a2 = mid
            else:
                b2 = mid - 1
        return a2

    if cross == n_cand:
        pick = n_cand - 1
    elif cross == 0:
        pick = plateau_right(0, float(L[0]))
    else:
        before = max(float(L[cross - 1]), float(R[cross - 1]))
        at = max(float(L[cross]), float(R[cross]))
        if at <= before:
            pick = plateau_right(cross, at)
        else:
            pick = cross - 1
    return lo + 1 + pick


@dataclass(frozen=True)
class CellTree:
    """Level-by-level record of the recursive partition: levels[k] is the
    list of cells after k rounds, each an index range (lo, hi)."""

    law: DiscreteLaw
    rule: str
    levels: Tuple[Tuple[Tuple[int, int], ...], ...]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def boundaries(self, k: int) -> List[float]:
        """Interior cell boundaries (as atom values) at level k."""
        return [float(self.law.atoms[lo]) for lo, _ in self.levels[k][1:]]

    def masses(self, k: int) -> np.ndarray:
        return np.asarray([self.law.cell_mass(lo, hi) for lo, hi in self.levels[k]])

    def means(self, k: int) -> np.ndarray:
        return np.asarray([self.law.cell_mean(lo, hi) for lo, hi in self.levels[k]])

    def risks(self, k: int) -> np.ndarray:
        return np.asarray([self.law.cell_risk(lo, hi) for lo, hi in self.levels[k]])

    def mse_curve(self) -> np.ndarray:
        return np.asarray(
            [sum(self.law.cell_risk(lo, hi) for lo, hi in cells)
             for cells in self.levels], dtype=np.float64)


def build_cell_tree(law: DiscreteLaw, rule: str, depth: int) -> CellTree:
    """Split every multi-atom cell for `depth` rounds. Single-atom cells
    persist unchanged (their risk is already zero)."""
    if rule not in RULES:
        raise ConfigError(f"unknown rule {rule!r}; valid: {RULES}")
    if not isinstance(depth, int) or depth < 0:
        raise ConfigError(f"depth must be a nonnegative int, got {depth!r}")
    levels = [((0, law.n_atoms),)]
    for _ in range(depth):
        nxt: List[Tuple[int, int]] = []
        for lo, hi in levels[-1]:
            if hi - lo < 2:
                nxt.append((lo, hi))
                continue
            b = split_cell(law, lo, hi, rule)
            nxt.append((lo, b))
            nxt.append((b, hi))
        levels.append(tuple(nxt))
    return CellTree(law=law, rule=rule, levels=tuple(levels))


def mse_curve(law: DiscreteLaw, rule: str, depth: int) -> np.ndarray:
    """Partition risk after 0..depth rounds of splitting."""
    return build_cell_tree(law, rule, depth).mse_curve()


def rate_bound(rule: str, k: int) -> float:
    """Guaranteed risk bound after k rounds for laws supported in [0, 1]:
    c * 2^(-2k/3) with c = 2.71 (variance) / 0.4 (minimax), and 2^(1-k) /
    2^(-k) for simons / median."""
    if k < 0:
        raise ConfigError("k must be nonnegative")
    if rule == "variance":
        return 2.71 * 2.0 ** (-2.0 * k / 3.0)
    if rule == "minimax":
        return 0.4 * 2.0 ** (-2.0 * k / 3.0)
    if rule == "simons":
        return 2.0 ** (1 - k)
    if rule == "median":
        return 2.0 ** (-k)
    raise ConfigError(f"unknown rule {rule!r}; valid: {RULES}")


# ---------------------------------------------------------------------------
# Grids and densities
# ---------------------------------------------------------------------------


def uniform_grid(n: int) -> DiscreteLaw:
    """Equal-weight law at the n cell midpoints (i + 1/2)/n of [0, 1]."""
    if n < 1:
        raise ConfigError("n must be positive")
    atoms = (np.arange(n, dtype=np.float64) + 0.5) / n
    return DiscreteLaw(atoms, np.full(n, 1.0 / n))


def law_from_density(pdf: Callable[[np.ndarray], np.ndarray], n: int,
                     support: Tuple[float, float] = (0.0, 1.0),
                     resolution: Optional[int] = None) -> DiscreteLaw:
    """Equal-weight quantile grid of a (piecewise continuous, positive)
    density: atom i sits at the (i + 1/2)/n quantile, computed by trapezoid
    integration on a fine grid followed by inverse interpolation."""
    lo, hi = float(support[0]), float(support[1])
    if not lo < hi:
        raise ConfigError(f"empty support ({lo}, {hi})")
    if n < 1:
        raise ConfigError("n must be positive")
    res = int(resolution) if resolution is not None else max(4096, 8 * n)
    grid = np.linspace(lo, hi, res + 1)
    f = np.asarray(pdf(grid), dtype=np.float64)
    if f.shape != grid.shape or not np.all(np.isfinite(f)) or np.any(f < 0.0):
        raise DataError("density must return finite nonnegative values on the grid")
    panel = 0.5 * (f[1:] + f[:-1]) * np.diff(grid)
    cdf = np.concatenate(([0.0], np.cumsum(panel)))
    if cdf[-1] <= 0.0:
        raise DataError("density integrates to zero on the support")
    cdf /= cdf[-1]
    atoms = np.interp((np.arange(n) + 0.5) / n, cdf, grid)
    if np.any(np.diff(atoms) <= 0.0):
        raise DataError("quantiles collide; density must be positive on the support")
    return DiscreteLaw(atoms, np.full(n, 1.0 / n))


def random_density(seed: int, knots: int = 8, low: float = 0.2,
                   high: float = 1.8) -> Callable[[np.ndarray], np.ndarray]:
    """Random piecewise-linear density on [0, 1], bounded in [low, high]
    (up to normalization). Deterministic in the seed."""
    if knots < 2:
        raise ConfigError("need at least 2 knots")
    if not 0.0 < low <= high:
        raise ConfigError("need 0 < low <= high")
    gen = stream(seed, "random-density")
    xs = np.linspace(0.0, 1.0, knots)
    ys = gen.uniform(low, high, size=knots)

    def pdf(u: np.ndarray) -> np.ndarray:
        return np.interp(np.asarray(u, dtype=np.float64), xs, ys)

    return pdf


def ramp_density(u: np.ndarray) -> np.ndarray:
    """Flat-plus-spike density on [0, 1]: proportional to 1 on [0, 0.9] and to
    1 + 1e4 (u - 0.9) on (0.9, 1], so virtually all mass hides in the last
    tenth of the interval."""
    u = np.asarray(u, dtype=np.float64)
    return np.where(u <= 0.9, 1.0, 1.0 + 1e4 * (u - 0.9))


def power_density(u: np.ndarray) -> np.ndarray:
    """f(u) proportional to u^10 on [0, 1]: mass piles up at 1."""
    u = np.asarray(u, dtype=np.float64)
    return np.clip(u, 0.0, 1.0) ** 10


# ---------------------------------------------------------------------------
# Slow-rate witness families
# ---------------------------------------------------------------------------

_TAIL_NUDGE = 1e-9


def _simons_witness(s: float, levels: int, guard: int) -> DiscreteLaw:
    """Law on which the mean-split rule peels one atom per round.

    Atoms: -1 with mass 1-s, then A_J = sum_{j=1..J} ((1-s)/s)^j with mass
    s^(J+1) (1-s) for J = 0, 1, ...; the conditional mean of {U >= A_J} is
    exactly A_{J+1}, so every split strips a single atom and the risk decays
    like ((1-s)^2/s)^k instead of geometrically.

    The infinite tail J >= J* (J* = levels + guard) is collapsed to one atom
    at its conditional mean minus a tiny nudge. Collapsing at the mean keeps
    every upstream conditional mean identity intact; the downward nudge makes
    each computed mean land strictly below the next atom, so float rounding
    can never push the cut past it. The nudge is at most 1e-9 (and at most a
    thousandth of the final atom gap), far below the tolerances the family
    is used with.
    """
    r = (1.0 - s) / s
    n_kept = levels + guard
    a = np.empty(n_kept + 2)
    w = np.empty(n_kept + 2)
    a[0], w[0] = -1.0, 1.0 - s
    powers = r ** np.arange(1, n_kept + 2)
    partial = np.concatenate(([0.0], np.cumsum(powers)))  # partial[J] = A_J
    a[1:n_kept + 1] = partial[:n_kept]
    w[1:n_kept + 1] = s ** np.arange(1, n_kept + 1) * (1.0 - s)
    nudge = min(_TAIL_NUDGE, 1e-3 * (partial[n_kept + 1] - partial[n_kept]))
    a[n_kept + 1] = partial[n_kept + 1] - nudge  # tail mean = A_{J*+1}
    w[n_kept + 1] = s ** (n_kept + 1)
    return DiscreteLaw(a, w)


def _median_witness(s: float, levels: int, guard: int) -> DiscreteLaw:
    """Law on which the mass-balancing rule keeps peeling near-degenerate
    halves: atom k (k = 1, 2, ...) sits at sum_{j<k} s^(j-1) - s^(k-1) with
    mass 2^-k, and the tail past J* = levels + guard is collapsed to a single
    atom of mass 2^-J* at the supremum sum_{j<=J*} s^(j-1). Halving the mass
    always cuts off exactly the first atom (the masses are exact dyadics, so
    the comparisons are exact), while the atom spacings shrink like s^k,
    giving risk increments 2^-k s^(2k)."""
    n_kept = levels + guard
    k = np.arange(1, n_kept + 1)
    geo = np.concatenate(([0.0], np.cumsum(s ** (k - 1.0))))  # geo[j] = sum_{i<=j} s^(i-1)
    a = np.empty(n_kept + 1)
    w = np.empty(n_kept + 1)
    a[:n_kept] = geo[:-1] - s ** (k - 1.0)
    w[:n_kept] = 2.0 ** (-k.astype(np.float64))
    a[n_kept] = geo[-1]
    w[n_kept] = 2.0 ** (-float(n_kept))
    return DiscreteLaw(a, w)


def witness_increments(family: str, s: float, levels: int) -> np.ndarray:
    """Closed-form one-step decrements E[(M_{k+1} - M_k)^2], k = 0..levels-1:
    (1-s)^(2k+1) / s^(k+1) for the simons family, 2^-k s^(2k) for median."""
    k = np.arange(levels, dtype=np.float64)
    if family in ("simons_halfrate", "simons"):
        if not 0.5 < s < 1.0:
            raise ConfigError(f"simons witness needs s in (1/2, 1), got {s}")
        return (1.0 - s) ** (2.0 * k + 1.0) / s ** (k + 1.0)
    if family in ("median_halfrate", "median"):
        if not 0.0 < s < 1.0:
            raise ConfigError(f"median witness needs s in (0, 1), got {s}")
        return 2.0 ** (-k) * s ** (2.0 * k)
    raise ConfigError(f"unknown witness family {family!r}")


def rate_witness(family: str, s: float, depth: int,
                 guard: int = 4) -> Tuple[DiscreteLaw, np.ndarray]:
    """Witness law showing the rule's rate bound is tight, plus its predicted
    one-step increments for k = 0..depth-1.

    family 'simons_halfrate' (s in (1/2, 1)): the mean-split rule peels one
    atom per round, with increments approaching a 1/2-rate as s -> 1/2.
    family 'median_halfrate' (s in (0, 1)): the mass-balancing rule halves a
    geometric tail, with increments 2^-k s^(2k) approaching 1/2-rate as
    s -> 1. The infinite laws are truncated past depth + guard levels, which
    leaves the first `depth` increments unchanged (the truncation deficit
    cancels in consecutive differences)."""
    if not isinstance(depth, int) or depth < 1:
        raise ConfigError(f"depth must be a positive int, got {depth!r}")
    if guard < 1:
        raise ConfigError("guard must be positive")
    increments = witness_increments(family, s, depth)
    if family in ("simons_halfrate", "simons"):
        law = _simons_witness(s, depth, guard)
    else:
        law = _median_witness(s, depth, guard)
    return law, increments
