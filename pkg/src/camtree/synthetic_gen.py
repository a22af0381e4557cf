"""Synthetic CAM arrays with controlled sparsity.

Two generators: a Gaussian-thresholded one where the control parameter
``lam`` equals the expected don't-care fraction, and an exact-count one
that places a requested number of don't-care cells uniformly at random.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .array_compiler import CamArray, unit_bounds

__all__ = ["SparsitySpec", "generate", "generate_with_empty_fraction"]


@dataclass(frozen=True)
class SparsitySpec:
    lam: float
    mu: float
    seed: int
    n_rows: int
    n_cols: int

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("dimensions must be >= 1")


def _fill_active(rng: np.random.Generator, dontcare: np.ndarray) -> CamArray:
    """Assemble an array from a don't-care mask; active cells get random
    subintervals of [0, 1] so match outcomes stay nondegenerate."""
    rows, cols = dontcare.shape
    u = rng.random((rows, cols, 2))
    lo = np.minimum(u[..., 0], u[..., 1])
    hi = np.maximum(u[..., 0], u[..., 1])
    hi = np.where(hi > lo, hi, np.nextafter(lo, np.inf))
    lo[dontcare] = -np.inf
    hi[dontcare] = np.inf
    labels = np.arange(rows) % 2
    return CamArray(lo, hi, ~dontcare, labels, unit_bounds(cols))


def generate(spec: SparsitySpec) -> CamArray:
    """Gaussian-sampled sparsity: each cell draws z ~ N(mu, 1) and becomes
    don't-care iff |z - mu| falls inside the central band holding ``lam``
    of the probability mass, so E[don't-care fraction] = lam exactly."""
    rng = np.random.default_rng(spec.seed)
    z = rng.normal(spec.mu, 1.0, size=(spec.n_rows, spec.n_cols))
    band = norm.ppf((1.0 + spec.lam) / 2.0)
    dontcare = np.abs(z - spec.mu) <= band
    return _fill_active(rng, dontcare)


def generate_with_empty_fraction(target: float, n_rows: int, n_cols: int, seed: int) -> CamArray:
    """Exact-count generator: round(target * cells) don't-cares, uniformly
    placed. Used where a reported empty-cell percentage must be hit exactly."""
    if not 0.0 <= target <= 1.0:
        raise ValueError("target must be in [0, 1]")
    if n_rows < 1 or n_cols < 1:
        raise ValueError("dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    total = n_rows * n_cols
    k = int(round(target * total))
    flat = np.zeros(total, dtype=bool)
    flat[rng.choice(total, size=k, replace=False)] = True
    return _fill_active(rng, flat.reshape(n_rows, n_cols))
