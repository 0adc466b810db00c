"""Small numeric helpers: seeding, compensated sums, operator-norm estimation."""

from __future__ import annotations

import zlib

import numpy as np


def stable_rng(seed: int, label: str) -> np.random.Generator:
    """Generator seeded by (seed, label) in a platform-independent way.

    Each distinct label gets an independent stream, so trials can be split
    deterministically without sharing mutable state.
    """
    mix = zlib.crc32(label.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, mix]))


def kahan_mean_vectors(vectors) -> np.ndarray:
    """Compensated elementwise mean of equal-length complex arrays."""
    vectors = list(vectors)
    total = np.zeros_like(vectors[0])
    comp = np.zeros_like(vectors[0])
    for v in vectors:
        y = v - comp
        s = total + y
        comp = (s - total) - y
        total = s
    return total / len(vectors)


def power_norm(matvec, rmatvec, dim: int, *, iters: int = 120, seed: int = 0,
               label: str = "power-norm") -> float:
    """Largest singular value of an implicitly given map, by power iteration.

    Iterates x <- A*Ax with renormalisation each step; the returned value is
    the best Rayleigh estimate seen. Deterministic for fixed (seed, label).
    """
    rng = stable_rng(seed, label)
    x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    nx = np.linalg.norm(x)
    if nx == 0.0:
        return 0.0
    x /= nx
    best = 0.0
    for _ in range(iters):
        y = matvec(x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        best = max(best, float(ny))
        x = rmatvec(y)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return best
        # Rayleigh quotient for A^H A: ||Ax||^2 / ||x||^2 with the pre-step x unit.
        best = max(best, float(np.sqrt(nx)))
        x /= nx
    return best


def dense_spectral_norm(mat: np.ndarray) -> float:
    """Exact largest singular value of a dense matrix."""
    if mat.size == 0:
        return 0.0
    return float(np.linalg.svd(mat, compute_uv=False)[0])


def fit_log_slope(xs, values) -> float:
    """Least-squares slope of log(values) against xs; zero entries are skipped."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if keep.sum() < 2:
        return 0.0
    x = xs[keep]
    y = np.log(values[keep])
    x0 = x - x.mean()
    denom = float(np.dot(x0, x0))
    if denom == 0.0:
        return 0.0
    return float(np.dot(x0, y - y.mean()) / denom)
