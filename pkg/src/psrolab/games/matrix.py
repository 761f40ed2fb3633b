"""Normal-form games embedded as one-shot extensive games."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from psrolab.core.game import TERMINAL, Game, State


@dataclass(frozen=True)
class MatrixGameSpec:
    row_payoffs: tuple[tuple[float, ...], ...]
    col_payoffs: tuple[tuple[float, ...], ...]
    name: str = "matrix"
    row_actions: tuple[str, ...] | None = None
    col_actions: tuple[str, ...] | None = None


RPS = MatrixGameSpec(
    ((0, -1, 1), (1, 0, -1), (-1, 1, 0)),
    ((0, 1, -1), (-1, 0, 1), (1, -1, 0)),
    "rps",
    ("rock", "paper", "scissors"),
    ("rock", "paper", "scissors"),
)
# row player is the matcher
MATCHING_PENNIES = MatrixGameSpec(
    ((1, -1), (-1, 1)),
    ((-1, 1), (1, -1)),
    "matching_pennies",
    ("heads", "tails"),
    ("heads", "tails"),
)
# payoff-dominant equilibrium at (0, 0)
COORDINATION = MatrixGameSpec(
    ((2, 0), (0, 1)),
    ((2, 0), (0, 1)),
    "coordination",
    ("a", "b"),
    ("a", "b"),
)
PRESETS = {s.name: s for s in (RPS, MATCHING_PENNIES, COORDINATION)}


class MatrixState(State):
    __slots__ = ("game", "choices")

    def __init__(self, game: "MatrixGame", choices: tuple[int, ...] = ()):
        self.game = game
        self.choices = choices

    def current_player(self) -> int:
        return TERMINAL if len(self.choices) == 2 else len(self.choices)

    def legal_actions(self) -> list[int]:
        return list(range(self.game.payoffs.shape[1 + len(self.choices)]))

    def child(self, action: int) -> "MatrixState":
        return MatrixState(self.game, self.choices + (action,))

    def returns(self) -> np.ndarray:
        if len(self.choices) < 2:
            return np.zeros(2)
        return self.game.payoffs[:, self.choices[0], self.choices[1]].copy()

    def information_state_key(self, player: int) -> str:
        # the column player's key does not reveal the row choice
        return f"{player}"


class MatrixGame(Game):
    num_players = 2

    def __init__(self, spec: MatrixGameSpec):
        rows = [len(r) for r in spec.row_payoffs] + [len(r) for r in spec.col_payoffs]
        if len(set(rows)) != 1 or len(spec.row_payoffs) != len(spec.col_payoffs):
            raise ValueError("ragged payoff matrices")
        self.spec = spec
        self.payoffs = np.array([spec.row_payoffs, spec.col_payoffs], dtype=float)
        self.num_distinct_actions = max(self.payoffs.shape[1:])
        self.zero_sum = bool(np.allclose(self.payoffs.sum(axis=0), 0.0, atol=1e-9))
        self.name = spec.name

    def new_initial_state(self) -> MatrixState:
        return MatrixState(self)


def make_matrix_game(spec: MatrixGameSpec | str) -> MatrixGame:
    if isinstance(spec, str):
        spec = PRESETS[spec]
    return MatrixGame(spec)
