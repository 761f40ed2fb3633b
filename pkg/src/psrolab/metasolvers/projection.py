"""Euclidean projection onto the gamma-exploratory simplex."""

from __future__ import annotations

import numpy as np


def exploration_floor(gamma: float, num_arms: int) -> float:
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    return gamma / num_arms


def project_simplex(y: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Closest point to ``y`` on {z >= 0, sum z = total} (sort-based)."""
    if total <= 0.0:
        return np.zeros_like(y)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - total
    ind = np.arange(1, len(y) + 1)
    rho = np.flatnonzero(u - css / ind > 0)[-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y - theta, 0.0)


def project_gamma_simplex(x, gamma: float) -> np.ndarray:
    """Project onto {x : x_k >= gamma/len(x), sum x = 1}.

    Points that already satisfy the bound and sum to one come back unchanged.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot project a non-finite vector")
    m = len(x)
    floor = exploration_floor(gamma, m)
    if np.all(x >= floor) and abs(x.sum() - 1.0) <= 1e-12:
        return x.copy()
    # shift so the floor becomes zero, then project onto the shrunken simplex
    return project_simplex(x - floor, 1.0 - floor * m) + floor


def mix_uniform(sigma: np.ndarray, gamma: float) -> np.ndarray:
    return gamma / len(sigma) + (1.0 - gamma) * sigma
