"""Head-to-head evaluation against fixed bots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from psrolab.core.game import Game
from psrolab.core.rng import stream
from psrolab.core.simulate import simulate_episode


@dataclass
class MatchResult:
    mean: float
    stderr: float
    per_seat: list[float]


def evaluate_vs_fixed(game: Game, policy: list, opponents: list, episodes: int, seed: int = 0) -> MatchResult:
    """Average return of ``policy`` over every seat, the others held by ``opponents``.

    Both arguments hold one entry per seat (behavior policies or mixtures;
    mixtures draw a member per episode). Each seat gets ``episodes`` episodes.
    """
    n = game.num_players
    if len(policy) != n or len(opponents) != n:
        raise ValueError(f"need one entry per seat ({n})")
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    samples = []
    per_seat = []
    for seat in range(n):
        joint = [policy[j] if j == seat else opponents[j] for j in range(n)]
        rng = stream(seed, "vs-fixed", seat)
        got = [simulate_episode(game, joint, rng).returns[seat] for _ in range(episodes)]
        per_seat.append(float(np.mean(got)))
        samples.extend(got)
    samples = np.asarray(samples)
    err = float(samples.std(ddof=1) / np.sqrt(len(samples))) if len(samples) > 1 else float("inf")
    return MatchResult(float(samples.mean()), err, per_seat)
