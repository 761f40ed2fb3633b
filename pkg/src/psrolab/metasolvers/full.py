"""Full-information meta-solvers: they read the whole empirical payoff tensor."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from psrolab.core.payoff import EmpiricalPayoffTensor, deviation_payoffs, meta_payoff
from psrolab.metasolvers.projection import exploration_floor, mix_uniform, project_gamma_simplex


@dataclass(frozen=True)
class ExplorationParams:
    gamma: float = 0.0
    delta: float = 0.01
    # solver steps run on the meta-game each time it is re-solved
    prd_iterations: int = 1000

    def __post_init__(self):
        exploration_floor(self.gamma, 1)
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.prd_iterations < 0:
            raise ValueError("prd_iterations must be >= 0")


def solve_uniform(k: int) -> np.ndarray:
    """Uniform over the first ``k`` arms, zero on the arm still in training."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return np.append(np.full(k, 1.0 / k), 0.0)


def solve_last(k: int, mode: str = "inrl") -> np.ndarray:
    """One-hot on the in-training arm ("inrl") or on the newest finished one ("ibr")."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = np.zeros(k + 1)
    if mode == "inrl":
        out[k] = 1.0
    elif mode == "ibr":
        out[k - 1] = 1.0
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return out


def _grow(vec: np.ndarray, size: int, fill: float = 0.0) -> np.ndarray:
    if len(vec) >= size:
        return vec[:size]
    return np.concatenate([vec, np.full(size - len(vec), fill)])


def _regret_matching(regrets: np.ndarray) -> np.ndarray:
    pos = np.maximum(regrets, 0.0)
    total = pos.sum()
    if total > 0:
        return pos / total
    return np.full(len(regrets), 1.0 / len(regrets))


def _softmax(x: np.ndarray, temperature: float) -> np.ndarray:
    z = temperature * x
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


@dataclass
class SolverState:
    """Accumulators of the full-information solvers, one entry per player."""

    regrets: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    points: list = field(default_factory=list)

    def resize(self, shape: tuple[int, ...]) -> None:
        n = len(shape)
        for acc in (self.regrets, self.rewards):
            while len(acc) < n:
                acc.append(np.zeros(0))
            for i in range(n):
                acc[i] = _grow(acc[i], shape[i])
        while len(self.points) < n:
            self.points.append(None)


def rm_update_and_solve(state: SolverState, U: EmpiricalPayoffTensor, sigmas, player: int, gamma: float) -> np.ndarray:
    state.resize(U.shape)
    dev = deviation_payoffs(U, sigmas, player)
    state.regrets[player] = state.regrets[player] + dev - meta_payoff(U, sigmas)[player]
    return mix_uniform(_regret_matching(state.regrets[player]), gamma)


def hedge_update_and_solve(state: SolverState, U: EmpiricalPayoffTensor, sigmas, player: int, gamma: float) -> np.ndarray:
    state.resize(U.shape)
    state.rewards[player] = state.rewards[player] + deviation_payoffs(U, sigmas, player)
    m = U.shape[player]
    return mix_uniform(_softmax(state.rewards[player], gamma / m), gamma)


def prd_step(U: EmpiricalPayoffTensor, sigmas, params: ExplorationParams) -> list[np.ndarray]:
    """One projected replicator step for every player from the same snapshot."""
    values = meta_payoff(U, sigmas)
    out = []
    for i, x in enumerate(sigmas):
        growth = x * (deviation_payoffs(U, sigmas, i) - values[i])
        out.append(project_gamma_simplex(x + params.delta * growth, params.gamma))
    return out


def prd_solve(U: EmpiricalPayoffTensor, init_sigmas, params: ExplorationParams, iterations: int | None = None) -> list[np.ndarray]:
    sigmas = [project_gamma_simplex(np.asarray(s, dtype=float), params.gamma) for s in init_sigmas]
    for _ in range(params.prd_iterations if iterations is None else iterations):
        sigmas = prd_step(U, sigmas, params)
    return sigmas


class IteratedSolver:
    """Runs RM, Hedge or PRD for ``params.prd_iterations`` steps per call.

    State persists across calls; arms appended since the last call start
    with zero accumulators. PRD warm-starts from the previous output.
    """

    def __init__(self, kind: str, params: ExplorationParams):
        if kind not in ("rm", "hedge", "prd"):
            raise ValueError(f"not an iterated solver: {kind!r}")
        self.kind = kind
        self.params = params
        self.state = SolverState()
        self.sigmas: list[np.ndarray] | None = None

    def _start(self, shape) -> list[np.ndarray]:
        if self.sigmas is None:
            return [np.full(m, 1.0 / m) for m in shape]
        # new arms enter at the exploration floor
        out = []
        for prev, m in zip(self.sigmas, shape):
            grown = _grow(prev, m, fill=0.0)
            out.append(project_gamma_simplex(grown / grown.sum(), self.params.gamma))
        return out

    def solve(self, U: EmpiricalPayoffTensor) -> list[np.ndarray]:
        sigmas = self._start(U.shape)
        gamma = self.params.gamma
        for _ in range(self.params.prd_iterations):
            if self.kind == "prd":
                sigmas = prd_step(U, sigmas, self.params)
            elif self.kind == "rm":
                sigmas = [rm_update_and_solve(self.state, U, sigmas, i, gamma) for i in range(U.num_players)]
            else:
                sigmas = [hedge_update_and_solve(self.state, U, sigmas, i, gamma) for i in range(U.num_players)]
        self.sigmas = sigmas
        return [s.copy() for s in sigmas]
