"""Approximate Nash equilibria of two-player zero-sum meta-games."""

from __future__ import annotations

import numpy as np

from psrolab.core.payoff import EmpiricalPayoffTensor, MissingEntries


def matrix_nashconv(A: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    """Exploitability sum for the zero-sum game where the row player gets ``A``."""
    return float((A @ y).max() - (x @ A).min())


def solve_zero_sum_matrix(A: np.ndarray, tolerance: float = 1e-4, max_iterations: int = 200_000):
    """Regret-matching+ self-play with alternating updates and linearly weighted averages.

    Stops once the averaged profile's NashConv is at most ``tolerance``;
    returns (x, y, nashconv).
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    rx, ry = np.zeros(m), np.zeros(n)
    sx, sy = np.zeros(m), np.zeros(n)
    x, y = np.full(m, 1.0 / m), np.full(n, 1.0 / n)
    avg_x, avg_y = x, y
    gap = matrix_nashconv(A, x, y)
    for t in range(1, max_iterations + 1):
        u = A @ y
        rx = np.maximum(rx + u - x @ u, 0.0)
        x = rx / rx.sum() if rx.sum() > 0 else np.full(m, 1.0 / m)
        v = -(x @ A)
        ry = np.maximum(ry + v - v @ y, 0.0)
        y = ry / ry.sum() if ry.sum() > 0 else np.full(n, 1.0 / n)
        sx += t * x
        sy += t * y
        if t % 10 == 0 or t == max_iterations:
            avg_x, avg_y = sx / sx.sum(), sy / sy.sum()
            gap = matrix_nashconv(A, avg_x, avg_y)
            if gap <= tolerance:
                break
    return avg_x, avg_y, gap


def solve_meta_nash(U: EmpiricalPayoffTensor, tolerance: float = 1e-4, max_iterations: int = 200_000) -> list[np.ndarray]:
    if U.num_players != 2:
        raise ValueError("meta-Nash needs a two-player meta-game; use prd for n > 2")
    if not U.filled.all():
        raise MissingEntries(f"missing payoff cells: {U.missing()[:10]}")
    if not U.is_zero_sum():
        raise ValueError("meta-Nash needs a zero-sum meta-game; use prd for general-sum games")
    x, y, _ = solve_zero_sum_matrix(U.values[0], tolerance, max_iterations)
    return [x, y]
