"""Data representation and ingestion.

Owns the immutable `Dataset` (column-major features + targets + per-feature
sort indexes), the `ImageGrid` used by the denoising pipeline, CSV and PGM
loaders, and the synthetic data generators used throughout the experiments.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError
from .rng import stream, student_t

REGRESSION = "regression"
CLASSIFICATION = "classification"
_TASKS = (REGRESSION, CLASSIFICATION)


# ---------------------------------------------------------------------------
# Core types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dataset:
    """Immutable sample matrix.

    features is column-major: ``features[j, i]`` is feature j of sample i.
    sort_index[j] is a permutation of sample indices ordering feature j
    ascending (stable, so duplicate values keep sample order).
    """

    features: np.ndarray  # shape (d, n)
    targets: np.ndarray  # shape (n,)
    task: str
    sort_index: np.ndarray = field(default=None)  # shape (d, n), int64

    def __post_init__(self):
        feats = np.ascontiguousarray(np.atleast_2d(np.asarray(self.features, dtype=np.float64)))
        targ = np.asarray(self.targets, dtype=np.float64).ravel()
        if self.task not in _TASKS:
            raise ConfigError(f"unknown task {self.task!r}")
        if feats.ndim != 2:
            raise DataError("features must be a 2-D (d, n) matrix")
        d, n = feats.shape
        if n < 1:
            raise DataError("dataset needs at least one sample")
        if targ.shape[0] != n:
            raise DataError(f"targets length {targ.shape[0]} != n_samples {n}")
        if not np.all(np.isfinite(feats)) or not np.all(np.isfinite(targ)):
            raise DataError("features and targets must be finite")
        if self.task == CLASSIFICATION and not np.all(np.isin(targ, (-1.0, 1.0))):
            raise DataError("classification targets must be exactly -1 or +1")
        sort_index = np.vstack([np.argsort(feats[j], kind="stable") for j in range(d)]).astype(np.int64)
        feats.setflags(write=False)
        targ.setflags(write=False)
        sort_index.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "targets", targ)
        object.__setattr__(self, "sort_index", sort_index)

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]

    @property
    def n_features(self) -> int:
        return self.features.shape[0]

    @classmethod
    def from_rows(cls, X, y, task: str = REGRESSION) -> "Dataset":
        """Build from a row-major (n, d) matrix, the usual estimator layout."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return cls(features=X.T, targets=y, task=task)

    def subset(self, indices) -> "Dataset":
        """New Dataset from the given sample rows (duplicates allowed)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(features=self.features[:, idx], targets=self.targets[idx], task=self.task)


@dataclass(frozen=True)
class NodeView:
    """A node's-eye view of a dataset: member sample indices at some depth."""

    dataset: Dataset
    member_indices: np.ndarray
    depth: int = 0

    def __post_init__(self):
        idx = np.asarray(self.member_indices, dtype=np.int64)
        object.__setattr__(self, "member_indices", idx)
        if self.depth < 0:
            raise ConfigError("node depth must be >= 0")

    @property
    def size(self) -> int:
        return self.member_indices.shape[0]

    def feature_values(self, j: int) -> np.ndarray:
        if not 0 <= j < self.dataset.n_features:
            raise ConfigError(f"feature index {j} out of range [0, {self.dataset.n_features})")
        return self.dataset.features[j, self.member_indices]

    def targets(self) -> np.ndarray:
        return self.dataset.targets[self.member_indices]


def root_node(data: Dataset) -> NodeView:
    return NodeView(dataset=data, member_indices=np.arange(data.n_samples, dtype=np.int64), depth=0)


@dataclass(frozen=True)
class ImageGrid:
    """H x W grayscale intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.atleast_2d(np.asarray(self.pixels, dtype=np.float64))
        if px.ndim != 2 or px.size < 1:
            raise DataError("image must be a non-empty 2-D grid")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise DataError("pixel intensities must lie in [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def load_csv(path, target_column, task: str = REGRESSION) -> Dataset:
    """Load a headered CSV into a Dataset.

    target_column may be a header name or a 0-based column index. Every other
    column becomes a feature, in file order. Lines starting with '#' are
    skipped. Row order is preserved as sample order.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if isinstance(target_column, int):
        if not 0 <= target_column < len(header):
            raise DataError(f"{path}: target column index {target_column} out of range")
        t_idx = target_column
    else:
        try:
            t_idx = header.index(str(target_column))
        except ValueError:
            raise DataError(f"{path}: no column named {target_column!r} in header {header}") from None
    body = rows[1:]
    if not body:
        raise DataError(f"{path}: no data rows")

    n = len(body)
    d = len(header) - 1
    feats = np.empty((d, n), dtype=np.float64)
    targ = np.empty(n, dtype=np.float64)
    feat_cols = [c for c in range(len(header)) if c != t_idx]
    for i, row in enumerate(body):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        for out_j, c in enumerate(feat_cols):
            try:
                feats[out_j, i] = float(row[c])
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell at row {i + 2}, column {header[c]!r}: {row[c]!r}"
                ) from None
        try:
            targ[i] = float(row[t_idx])
        except ValueError:
            raise DataError(
                f"{path}: non-numeric cell at row {i + 2}, column {header[t_idx]!r}: {row[t_idx]!r}"
            ) from None
    if not np.all(np.isfinite(feats)) or not np.all(np.isfinite(targ)):
        raise DataError(f"{path}: non-finite value encountered")
    if task == CLASSIFICATION and not np.all(np.isin(targ, (-1.0, 1.0))):
        bad = targ[~np.isin(targ, (-1.0, 1.0))][0]
        raise DataError(f"{path}: classification target outside {{-1,+1}}: {bad}")
    return Dataset(features=feats, targets=targ, task=task)


def load_feature_matrix(path) -> np.ndarray:
    """Load a headered CSV where *every* column is a feature; returns the
    row-major (n, d) matrix. Used for prediction inputs that carry no target."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header row and at least one data row")
    header = rows[0]
    out = np.empty((len(rows) - 1, len(header)), dtype=np.float64)
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell at row {i + 2}, column {header[j]!r}: {cell!r}"
                ) from None
    if not np.all(np.isfinite(out)):
        raise DataError(f"{path}: non-finite value encountered")
    return out


# ---------------------------------------------------------------------------
# PGM (portable graymap, P2 ascii / P5 binary)
# ---------------------------------------------------------------------------


def _pgm_tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i : i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            while i < n and data[i : i + 1] not in b"\r\n":
                i += 1
        else:
            j = i
            while j < n and data[j : j + 1] not in b" \t\r\n#":
                j += 1
            yield data[i:j], j
            i = j


def load_pgm(path) -> ImageGrid:
    """Read an ASCII (P2) or binary (P5) portable graymap, maxval <= 65535."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    data = path.read_bytes()
    tokens = _pgm_tokens(data)
    try:
        magic, _ = next(tokens)
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    magic = magic.decode("ascii", "replace")
    if magic not in ("P2", "P5"):
        raise DataError(f"{path}: unsupported magic {magic!r} (want P2 or P5)")
    try:
        width, _ = next(tokens)
        height, _ = next(tokens)
        maxval, header_end = next(tokens)
        width, height, maxval = int(width), int(height), int(maxval)
    except (StopIteration, ValueError):
        raise DataError(f"{path}: malformed header") from None
    if width < 1 or height < 1:
        raise DataError(f"{path}: bad dimensions {width}x{height}")
    if maxval < 1 or maxval > 65535:
        raise DataError(f"{path}: maxval {maxval} outside [1, 65535]")

    count = width * height
    if magic == "P2":
        vals = []
        for tok, _ in tokens:
            try:
                vals.append(int(tok))
            except ValueError:
                raise DataError(f"{path}: non-integer raster token {tok!r}") from None
        if len(vals) < count:
            raise DataError(f"{path}: truncated raster ({len(vals)} of {count} values)")
        raw = np.array(vals[:count], dtype=np.float64)
    else:
        # single whitespace byte separates header from raster
        raster = data[header_end + 1 :]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        if len(raster) < need:
            raise DataError(f"{path}: truncated raster ({len(raster)} of {need} bytes)")
        raw = np.frombuffer(raster[:need], dtype=dtype).astype(np.float64)
    if raw.max() > maxval:
        raise DataError(f"{path}: raster value {int(raw.max())} exceeds maxval {maxval}")
    return ImageGrid(pixels=(raw / maxval).reshape(height, width))


def write_pgm(img: ImageGrid, path, maxval: int = 255, binary: bool = False) -> None:
    """Write an ImageGrid as P2 (default) or P5. Intensities quantize to
    round(p * maxval); values are already guaranteed in [0, 1]."""
    if maxval < 1 or maxval > 65535:
        raise DataError(f"maxval {maxval} outside [1, 65535]")
    quant = np.rint(img.pixels * maxval).astype(np.int64)
    quant = np.clip(quant, 0, maxval)
    path = Path(path)
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n{maxval}\n"
    if binary:
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        path.write_bytes(header.encode("ascii") + quant.astype(dtype).tobytes())
    else:
        lines = [" ".join(str(v) for v in row) for row in quant]
        path.write_text(header + "\n".join(lines) + "\n", encoding="ascii")


# ---------------------------------------------------------------------------
# Image <-> dataset
# ---------------------------------------------------------------------------


def image_to_dataset(img: ImageGrid) -> Dataset:
    """Pixels as samples: features are the pixel-center coordinates
    ((row+0.5)/H, (col+0.5)/W), target is the intensity. Row-major order."""
    h, w = img.height, img.width
    rows, cols = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    x1 = (rows.ravel() + 0.5) / h
    x2 = (cols.ravel() + 0.5) / w
    return Dataset(features=np.vstack([x1, x2]), targets=img.pixels.ravel(), task=REGRESSION)


def dataset_to_image(predictions, height: int, width: int) -> ImageGrid:
    """Inverse of image_to_dataset's ordering; values clamp to [0, 1]."""
    pred = np.asarray(predictions, dtype=np.float64).ravel()
    if pred.shape[0] != height * width:
        raise DataError(f"got {pred.shape[0]} values for a {height}x{width} grid")
    return ImageGrid(pixels=np.clip(pred, 0.0, 1.0).reshape(height, width))


def make_phantom(height: int = 64, width: int = 64) -> ImageGrid:
    """Deterministic photograph-like test image.

    Stands in for a natural grayscale photo in the denoising studies, so it
    avoids axis-aligned constant blocks (which a coordinate-split regressor
    can represent exactly) in favour of the tonal content a camera produces:
    a gentle illumination ramp, two smooth curved structures (a bump and a
    soft-edged disc), and mid-frequency texture everywhere.
    """
    r = (np.arange(height, dtype=np.float64)[:, None] + 0.5) / height
    c = (np.arange(width, dtype=np.float64)[None, :] + 0.5) / width
    px = 0.42 + 0.18 * c + 0.08 * r
    px = px + 0.22 * np.exp(-((r - 0.32) ** 2 + (c - 0.30) ** 2) / (2.0 * 0.16 ** 2))
    dist = np.sqrt((r - 0.68) ** 2 + (c - 0.64) ** 2)
    px = px - 0.24 / (1.0 + np.exp((dist - 0.18) / 0.03))
    px = px + 0.16 * np.sin(2.0 * np.pi * 3.0 * r) * np.cos(2.0 * np.pi * 4.0 * c)
    px = px + 0.10 * np.sin(2.0 * np.pi * 7.0 * (r + c))
    return ImageGrid(pixels=np.clip(px, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Synthetic generators
# ---------------------------------------------------------------------------


def powell(X) -> np.ndarray:
    """Powell's singular function summed over blocks of four coordinates.

    For each block (a, b, c, e): (a+10b)^2 + 5(c-e)^2 + (b-2c)^4 + 10(a-e)^4.
    X is (n, d) with d a multiple of 4; returns shape (n,).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, d = X.shape
    if d % 4 != 0 or d == 0:
        raise ConfigError(f"powell needs d to be a positive multiple of 4, got {d}")
    total = np.zeros(n)
    for b in range(d // 4):
        a, bb, c, e = (X[:, 4 * b + k] for k in range(4))
        total += (a + 10 * bb) ** 2 + 5 * (c - e) ** 2 + (bb - 2 * c) ** 4 + 10 * (a - e) ** 4
    return total


def piecewise_signal(x) -> np.ndarray:
    """The three-piece study signal: sin(x) on [0,1/3), -2x on [1/3,2/3), else 0."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x < 1.0 / 3.0, np.sin(x), np.where(x < 2.0 / 3.0, -2.0 * x, 0.0))


@dataclass(frozen=True)
class SineSpec:
    """Y = sin(2*pi*2^p * X) + N(0, noise_sigma^2), X ~ Unif(0,1)."""

    n: int
    p: int = 2
    noise_sigma: float = 0.0


@dataclass(frozen=True)
class PureNoiseSpec:
    """X ~ Unif(0,1); Y is pure noise: 'normal' or Student 't' with df degrees."""

    n: int
    law: str = "normal"
    df: float = 3.0


@dataclass(frozen=True)
class PiecewiseSpec:
    """X ~ Unif(0,1); Y = piecewise_signal(X) + N(0, sigma^2)."""

    n: int
    noise_sigma: float = 0.1


@dataclass(frozen=True)
class AsbpSpec:
    """X ~ Unif([-1,1]^d); Y = x_1 + ... + x_{d-1} + |x_d|."""

    n: int
    d: int = 2


@dataclass(frozen=True)
class PowellSpec:
    """X ~ Unif([0,1]^d), d a multiple of 4; Y = powell(X) + optional noise."""

    n: int
    d: int = 4
    noise_sigma: float = 0.0


@dataclass(frozen=True)
class AdditiveTVSpec:
    """Additive piecewise-linear target with known exact total variation.

    Per coordinate i, g_i linearly interpolates (knots[i], values[i]) on [0,1];
    Y = sum_i g_i(X_i) + N(0, noise_sigma^2). The total variation of each g_i
    is the sum of absolute value-differences between consecutive knots, so the
    recorded `tv` is exact, not estimated.
    """

    n: int
    knots: tuple  # per-coordinate tuples of knot positions, each starting 0.0 ending 1.0
    values: tuple  # matching tuples of knot values
    noise_sigma: float = 0.1

    @property
    def d(self) -> int:
        return len(self.knots)

    @property
    def tv(self) -> float:
        return float(
            sum(np.abs(np.diff(np.asarray(v, dtype=np.float64))).sum() for v in self.values)
        )

    def truth(self, X: np.ndarray) -> np.ndarray:
        """Noise-free regression function at rows of X (shape (n, d))."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.zeros(X.shape[0])
        for i in range(self.d):
            out += np.interp(X[:, i], self.knots[i], self.values[i])
        return out

    @classmethod
    def random(cls, d: int, seed: int, segments: int = 6, amplitude: float = 1.0,
               noise_sigma: float = 0.1) -> "AdditiveTVSpec":
        """Draw a random spec: `segments` linear pieces per coordinate with
        values in [-amplitude, amplitude]."""
        gen = stream(seed, "additive-tv-spec")
        knots, values = [], []
        for _ in range(d):
            interior = np.sort(gen.uniform(0.05, 0.95, size=segments - 1))
            k = np.concatenate(([0.0], interior, [1.0]))
            v = gen.uniform(-amplitude, amplitude, size=segments + 1)
            knots.append(tuple(float(x) for x in k))
            values.append(tuple(float(x) for x in v))
        return cls(n=0, knots=tuple(knots), values=tuple(values), noise_sigma=noise_sigma)


GeneratorSpec = (SineSpec, PureNoiseSpec, PiecewiseSpec, AsbpSpec, PowellSpec, AdditiveTVSpec)


def gen_synthetic(spec, seed: int) -> Dataset:
    """Draw a Dataset from a generator spec. Pure function of (spec, seed)."""
    if not isinstance(spec, GeneratorSpec):
        raise ConfigError(f"unknown generator spec {type(spec).__name__}")
    if spec.n < 1:
        raise ConfigError("generator needs n >= 1")
    gen = stream(seed, f"gen/{type(spec).__name__}")

    if isinstance(spec, SineSpec):
        x = gen.uniform(0.0, 1.0, spec.n)
        y = np.sin(2.0 * math.pi * (2.0 ** spec.p) * x)
        if spec.noise_sigma > 0:
            y = y + spec.noise_sigma * gen.standard_normal(spec.n)
        return Dataset.from_rows(x[:, None], y)

    if isinstance(spec, PureNoiseSpec):
        x = gen.uniform(0.0, 1.0, spec.n)
        if spec.law == "normal":
            y = gen.standard_normal(spec.n)
        elif spec.law == "t":
            y = student_t(gen, spec.df, spec.n)
        else:
            raise ConfigError(f"unknown noise law {spec.law!r} (want 'normal' or 't')")
        return Dataset.from_rows(x[:, None], y)

    if isinstance(spec, PiecewiseSpec):
        x = gen.uniform(0.0, 1.0, spec.n)
        y = piecewise_signal(x) + spec.noise_sigma * gen.standard_normal(spec.n)
        return Dataset.from_rows(x[:, None], y)

    if isinstance(spec, AsbpSpec):
        if spec.d < 2:
            raise ConfigError("asbp needs d >= 2")
        X = gen.uniform(-1.0, 1.0, (spec.n, spec.d))
        y = X[:, :-1].sum(axis=1) + np.abs(X[:, -1])
        return Dataset.from_rows(X, y)

    if isinstance(spec, PowellSpec):
        if spec.d % 4 != 0 or spec.d == 0:
            raise ConfigError(f"powell needs d to be a positive multiple of 4, got {spec.d}")
        X = gen.uniform(0.0, 1.0, (spec.n, spec.d))
        y = powell(X)
        if spec.noise_sigma > 0:
            y = y + spec.noise_sigma * gen.standard_normal(spec.n)
        return Dataset.from_rows(X, y)

    # AdditiveTVSpec
    if spec.d < 1:
        raise ConfigError("additive-tv needs d >= 1")
    X = gen.uniform(0.0, 1.0, (spec.n, spec.d))
    y = spec.truth(X)
    if spec.noise_sigma > 0:
        y = y + spec.noise_sigma * gen.standard_normal(spec.n)
    return Dataset.from_rows(X, y)
