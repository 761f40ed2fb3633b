"""Decoupled (bandit-feedback) meta-solvers.

Each update sees only the arm that was played and the payoff it earned.
Until every arm has been sampled once, all of them keep a uniform strategy.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from psrolab.metasolvers.projection import exploration_floor, mix_uniform, project_gamma_simplex

OVERALL_WINDOW = 50
ARM_WINDOW = 10


class DecoupledSolver:
    kind = "decoupled"

    def __init__(self, num_arms: int, gamma: float):
        if num_arms < 1:
            raise ValueError("need at least one arm")
        exploration_floor(gamma, num_arms)
        self.num_arms = num_arms
        self.gamma = gamma
        self.sigma = np.full(num_arms, 1.0 / num_arms)
        self.pulls = np.zeros(num_arms, dtype=np.int64)

    def _check(self, arm: int, sigma: np.ndarray) -> float:
        if not 0 <= arm < self.num_arms:
            raise IndexError(f"arm {arm} out of range")
        p = float(sigma[arm])
        if p <= 0:
            raise ValueError(f"arm {arm} had probability 0; its importance weight is undefined")
        return p

    def update(self, arm: int, payoff: float, sigma: np.ndarray | None = None) -> np.ndarray:
        """Record one (arm, payoff) sample drawn under ``sigma`` (default: current)."""
        sigma = self.sigma if sigma is None else np.asarray(sigma, dtype=float)
        p = self._check(arm, sigma)
        self.pulls[arm] += 1
        self._observe(arm, float(payoff), p, sigma)
        if self.num_arms > 1 and self.pulls.min() > 0:
            self.sigma = self._strategy()
        return self.sigma.copy()

    def _observe(self, arm, payoff, p, sigma):
        raise NotImplementedError

    def _strategy(self) -> np.ndarray:
        raise NotImplementedError

    def estimates(self, arm: int, payoff: float, p: float) -> np.ndarray:
        """Importance-corrected per-arm payoff estimates from one sample."""
        est = np.zeros(self.num_arms)
        est[arm] = payoff / p
        return est

    def state_dict(self) -> dict:
        return {"kind": self.kind, "sigma": self.sigma.tolist(), "pulls": self.pulls.tolist()}


class DecoupledRegretMatching(DecoupledSolver):
    kind = "drm"

    def __init__(self, num_arms: int, gamma: float):
        super().__init__(num_arms, gamma)
        self.regrets = np.zeros(num_arms)

    def _observe(self, arm, payoff, p, sigma):
        # the observed payoff is itself an unbiased sample of the mixture's value
        self.regrets += self.estimates(arm, payoff, p) - payoff

    def _strategy(self):
        pos = np.maximum(self.regrets, 0.0)
        total = pos.sum()
        base = pos / total if total > 0 else np.full(self.num_arms, 1.0 / self.num_arms)
        return mix_uniform(base, self.gamma)


class Exp3(DecoupledSolver):
    kind = "exp3"

    def __init__(self, num_arms: int, gamma: float):
        super().__init__(num_arms, gamma)
        self.rewards = np.zeros(num_arms)

    def _observe(self, arm, payoff, p, sigma):
        self.rewards += self.estimates(arm, payoff, p)

    def _strategy(self):
        z = self.gamma / self.num_arms * self.rewards
        e = np.exp(z - z.max())
        return mix_uniform(e / e.sum(), self.gamma)


class DecoupledPRD(DecoupledSolver):
    """Replicator steps driven by moving averages of observed payoffs.

    An arm's window holds the raw payoffs of the episodes in which it was
    played; those are unbiased for the arm's value because the co-players'
    draws do not depend on it.
    """

    kind = "dprd"

    def __init__(self, num_arms: int, gamma: float, delta: float = 0.01,
                 overall_window: int = OVERALL_WINDOW, arm_window: int = ARM_WINDOW):
        super().__init__(num_arms, gamma)
        self.delta = delta
        self.overall = deque(maxlen=overall_window)
        self.per_arm = [deque(maxlen=arm_window) for _ in range(num_arms)]

    def _observe(self, arm, payoff, p, sigma):
        self.overall.append(payoff)
        self.per_arm[arm].append(payoff)

    def _strategy(self):
        mean = np.mean(self.overall)
        arm_means = np.array([np.mean(w) for w in self.per_arm])
        x = self.sigma
        return project_gamma_simplex(x + self.delta * x * (arm_means - mean), self.gamma)


DECOUPLED_KINDS = {"drm": DecoupledRegretMatching, "exp3": Exp3, "dprd": DecoupledPRD}


def make_decoupled(kind: str, num_arms: int, gamma: float, delta: float = 0.01) -> DecoupledSolver:
    if kind not in DECOUPLED_KINDS:
        raise ValueError(f"unknown decoupled solver {kind!r}; choose from {sorted(DECOUPLED_KINDS)}")
    if kind == "dprd":
        return DecoupledPRD(num_arms, gamma, delta)
    return DECOUPLED_KINDS[kind](num_arms, gamma)
