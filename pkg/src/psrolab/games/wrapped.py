"""Illegal-move wrapping: every decision node offers the full action set.

Choosing an illegal action costs the actor a one-time penalty and hands the
move to a chance node that picks a legal substitute uniformly at random. The
penalty makes the wrapped game general-sum; exact solvers and NashConv run on
the original game after :func:`legalize_policy`.
"""

from __future__ import annotations

import numpy as np

from psrolab.core.game import CHANCE, Game, State
from psrolab.core.policy import BehaviorPolicy, DefaultRule

LEDUC_PENALTY = -14.0


class WrappedState(State):
    __slots__ = ("game", "inner", "penalties", "pending_actor", "last_reward")

    def __init__(self, game, inner, penalties, pending_actor=None, last_reward=None):
        self.game = game
        self.inner = inner
        self.penalties = penalties
        self.pending_actor = pending_actor
        self.last_reward = last_reward

    def current_player(self) -> int:
        if self.pending_actor is not None:
            return CHANCE
        return self.inner.current_player()

    def legal_actions(self) -> list[int]:
        if self.pending_actor is not None:
            return self.inner.legal_actions()
        if self.inner.current_player() < 0:
            return self.inner.legal_actions()
        return list(range(self.game.num_distinct_actions))

    def chance_outcomes(self) -> list[tuple[int, float]]:
        if self.pending_actor is not None:
            legal = self.inner.legal_actions()
            return [(a, 1.0 / len(legal)) for a in legal]
        return self.inner.chance_outcomes()

    def child(self, action: int) -> "WrappedState":
        if self.pending_actor is not None:
            return WrappedState(self.game, self.inner.child(action), self.penalties)
        player = self.inner.current_player()
        if player >= 0 and action not in self.inner.legal_actions():
            reward = np.zeros(self.game.num_players)
            reward[player] = self.game.penalty
            return WrappedState(self.game, self.inner, self.penalties + reward, player, reward)
        return WrappedState(self.game, self.inner.child(action), self.penalties)

    def returns(self) -> np.ndarray:
        return self.inner.returns() + self.penalties

    def rewards(self) -> np.ndarray:
        if self.last_reward is not None:
            return self.last_reward
        return self.inner.rewards()

    def information_state_key(self, player: int) -> str:
        return self.inner.information_state_key(player)


class WrappedGame(Game):
    def __init__(self, base: Game, penalty: float = LEDUC_PENALTY):
        self.base = base
        self.penalty = float(penalty)
        self.num_players = base.num_players
        self.num_distinct_actions = base.num_distinct_actions
        self.zero_sum = False
        self.name = f"{base.name}_wrapped"

    def new_initial_state(self) -> WrappedState:
        return WrappedState(self, self.base.new_initial_state(), np.zeros(self.num_players))

    def action_names(self):
        return self.base.action_names()


def wrap_illegal_actions(game: Game, penalty: float = LEDUC_PENALTY) -> WrappedGame:
    return WrappedGame(game, penalty)


def legalize_policy(policy, tree, player: int) -> BehaviorPolicy:
    """Mask illegal actions out of a full-action-set policy and renormalize.

    ``tree`` is the enumerated original game. States where all mass sat on
    illegal actions fall back to uniform over the legal ones.
    """
    table = {}
    width = tree.game.num_distinct_actions
    for idx in np.flatnonzero(tree.infoset_player == player):
        key = tree.infoset_keys[idx][1]
        legal = tree.infoset_actions[idx]
        full = np.asarray(policy.probs(key, width), dtype=float)
        masked = full[legal]
        total = masked.sum()
        table[key] = masked / total if total > 0 else np.full(len(legal), 1.0 / len(legal))
    return BehaviorPolicy(table, DefaultRule.ERROR, getattr(policy, "name", ""))
