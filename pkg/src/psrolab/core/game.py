"""Abstract sequential game interface shared by every environment."""

from __future__ import annotations

import abc
from typing import Sequence

import numpy as np

CHANCE = -1
TERMINAL = -2


class State(abc.ABC):
    """An immutable node of an extensive-form game.

    Simultaneous moves are encoded as consecutive decision nodes whose
    information-state keys do not reveal the pending choices of co-players.
    """

    @abc.abstractmethod
    def current_player(self) -> int:
        """Index of the acting player, or CHANCE / TERMINAL."""

    @abc.abstractmethod
    def legal_actions(self) -> list[int]:
        ...

    def chance_outcomes(self) -> list[tuple[int, float]]:
        raise ValueError("not a chance node")

    @abc.abstractmethod
    def child(self, action: int) -> "State":
        ...

    def is_terminal(self) -> bool:
        return self.current_player() == TERMINAL

    @abc.abstractmethod
    def returns(self) -> np.ndarray:
        """Cumulative per-player reward collected so far."""

    def rewards(self) -> np.ndarray:
        """Per-player reward delivered by the transition into this state.

        Games that only pay at the end inherit this default.
        """
        if self.is_terminal():
            return self.returns()
        return np.zeros(len(self.returns()))

    @abc.abstractmethod
    def information_state_key(self, player: int) -> str:
        ...


class Game(abc.ABC):
    num_players: int
    num_distinct_actions: int
    zero_sum: bool = True
    name: str = "game"

    @abc.abstractmethod
    def new_initial_state(self) -> State:
        ...

    def action_names(self) -> Sequence[str] | None:
        return None


def sample_index(probs, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; cheaper than ``rng.choice`` for short vectors."""
    u = rng.random()
    acc = 0.0
    last = len(probs) - 1
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            return i
    # guard against round-off leaving u >= acc; skip trailing zeros
    while last > 0 and probs[last] <= 0:
        last -= 1
    return last


def sample_chance(state: State, rng: np.random.Generator) -> int:
    outcomes = state.chance_outcomes()
    return outcomes[sample_index([p for _, p in outcomes], rng)][0]
