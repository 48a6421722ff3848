"""Deterministic RNG streams.

Everything random in this package flows through `stream(seed, label)`: a
counter-based Philox generator keyed by the 64-bit seed XOR a stable hash of
the stream label. Streams derived from the same seed but different labels are
independent and can be created in any order, which is what makes per-tree and
per-replicate work reproducible regardless of scheduling.

Python's builtin ``hash`` is process-salted, so labels are hashed with FNV-1a
(64-bit) instead.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(label: str) -> int:
    """64-bit FNV-1a hash of a text label (stable across runs and platforms)."""
    h = _FNV_OFFSET
    for byte in label.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_seed(seed: int, label: str) -> int:
    """Derived 64-bit seed for a named sub-stream: seed XOR fnv1a64(label)."""
    return (int(seed) & _MASK64) ^ fnv1a64(label)


def stream(seed: int, label: str = "") -> np.random.Generator:
    """Counter-based generator for (seed, label).

    Same (seed, label) always gives the same stream; distinct labels give
    independent streams. Creation order is irrelevant.
    """
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, label)))


def student_t(gen: np.random.Generator, df: float, size: int) -> np.ndarray:
    """Student-t(df) draws via the ratio of a normal to a scaled chi-square.

    df=1 (Cauchy) is allowed. Both ingredient draws come from `gen`, so the
    output is a pure function of the stream state.
    """
    if df <= 0:
        raise ValueError(f"student t requires df > 0, got {df}")
    z = gen.standard_normal(size)
    v = gen.chisquare(df, size)
    return z / np.sqrt(v / df)
