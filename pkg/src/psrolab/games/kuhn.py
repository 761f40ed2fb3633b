"""Two-player Kuhn poker: three cards, one ante each, one betting round."""

from __future__ import annotations

import numpy as np

from psrolab.core.game import CHANCE, TERMINAL, Game, State

PASS, BET = 0, 1
_CARDS = "JQK"


class KuhnState(State):
    __slots__ = ("cards", "history")

    def __init__(self, cards: tuple[int, ...] = (), history: str = ""):
        self.cards = cards
        self.history = history

    def current_player(self) -> int:
        if len(self.cards) < 2:
            return CHANCE
        if self.history in ("pp", "bp", "bb", "pbp", "pbb"):
            return TERMINAL
        return len(self.history) % 2

    def legal_actions(self) -> list[int]:
        return [PASS, BET]

    def chance_outcomes(self) -> list[tuple[int, float]]:
        rest = [c for c in range(3) if c not in self.cards]
        return [(c, 1.0 / len(rest)) for c in rest]

    def child(self, action: int) -> "KuhnState":
        if len(self.cards) < 2:
            return KuhnState(self.cards + (action,), self.history)
        return KuhnState(self.cards, self.history + "pb"[action])

    def returns(self) -> np.ndarray:
        h = self.history
        if self.current_player() != TERMINAL:
            return np.zeros(2)
        if h == "bp":
            return np.array([1.0, -1.0])
        if h == "pbp":
            return np.array([-1.0, 1.0])
        stake = 2.0 if "b" in h else 1.0
        win = 1.0 if self.cards[0] > self.cards[1] else -1.0
        return np.array([win * stake, -win * stake])

    def information_state_key(self, player: int) -> str:
        return f"{player}|{_CARDS[self.cards[player]]}|{self.history}"


class KuhnPoker(Game):
    num_players = 2
    num_distinct_actions = 2
    zero_sum = True
    name = "kuhn"

    def new_initial_state(self) -> KuhnState:
        return KuhnState()

    def action_names(self):
        return ("pass", "bet")


def make_kuhn(num_players: int = 2) -> KuhnPoker:
    if num_players != 2:
        raise ValueError("only two-player Kuhn poker is implemented")
    return KuhnPoker()
