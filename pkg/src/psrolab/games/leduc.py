"""Leduc hold'em for two or three players.

Deck of ``num_suits`` x ``num_ranks`` cards, one private card each, one
public card after the first betting round. Antes of 1 chip, raises of 2 then
4 chips, at most two raises per round. Pairing the public card beats any
unpaired hand; otherwise the higher rank wins; ties split the pot.

Chance outcomes are dealt by rank (suits never matter for hand strength), with
probability proportional to the number of cards of that rank left in the deck.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from psrolab.core.game import CHANCE, TERMINAL, Game, State

FOLD, CALL, RAISE = 0, 1, 2
_ACTION_CHARS = "fcr"
_RANK_CHARS = "JQKA"


@dataclass(frozen=True)
class LeducSpec:
    num_players: int = 2
    wrapped: bool = False
    ante: float = 1.0
    raise_sizes: tuple[float, float] = (2.0, 4.0)
    max_raises_per_round: int = 2
    num_suits: int = 2
    num_ranks: int = 3
    # when False, folding is offered even if there is no outstanding bet
    fold_requires_bet: bool = False
    illegal_penalty: float = -14.0


class LeducState(State):
    __slots__ = (
        "game", "private", "public", "round", "history", "contrib", "folded",
        "cur", "raises", "stake", "acted",
    )

    def __init__(self, game, private, public, rnd, history, contrib, folded, cur, raises, stake, acted):
        self.game = game
        self.private = private
        self.public = public
        self.round = rnd
        self.history = history
        self.contrib = contrib
        self.folded = folded
        self.cur = cur
        self.raises = raises
        self.stake = stake
        self.acted = acted

    def _copy(self, **changes) -> "LeducState":
        s = LeducState.__new__(LeducState)
        for name in LeducState.__slots__:
            setattr(s, name, changes.get(name, getattr(self, name)))
        return s

    # -- structure ----------------------------------------------------------------

    def current_player(self) -> int:
        return self.cur

    def _remaining_deck(self) -> list[int]:
        counts = [self.game.spec.num_suits] * self.game.spec.num_ranks
        for r in self.private:
            counts[r] -= 1
        if self.public is not None:
            counts[self.public] -= 1
        return counts

    def chance_outcomes(self) -> list[tuple[int, float]]:
        if self.cur != CHANCE:
            raise ValueError("not a chance node")
        counts = self._remaining_deck()
        total = sum(counts)
        return [(r, c / total) for r, c in enumerate(counts) if c > 0]

    def legal_actions(self) -> list[int]:
        if self.cur < 0:
            return []
        spec = self.game.spec
        actions = []
        if not spec.fold_requires_bet or self.stake > self.contrib[self.cur]:
            actions.append(FOLD)
        actions.append(CALL)
        if self.raises < spec.max_raises_per_round:
            actions.append(RAISE)
        return actions

    def child(self, action: int) -> "LeducState":
        n = self.game.num_players
        if self.cur == CHANCE:
            if len(self.private) < n:
                private = self.private + (action,)
                if len(private) < n:
                    return self._copy(private=private)
                return self._copy(private=private, cur=0)
            return self._copy(public=action, cur=self._first_active())
        if action not in self.legal_actions():
            raise ValueError(f"illegal action {action} at {self.information_state_key(self.cur)!r}")
        history = list(self.history)
        history[self.round] += _ACTION_CHARS[action]
        contrib = list(self.contrib)
        folded = list(self.folded)
        raises, stake, acted = self.raises, self.stake, self.acted
        if action == FOLD:
            folded[self.cur] = True
        elif action == CALL:
            contrib[self.cur] = stake
            acted += 1
        else:
            stake = stake + self.game.spec.raise_sizes[self.round]
            contrib[self.cur] = stake
            raises += 1
            acted = 1
        active = n - sum(folded)
        nxt = self._copy(
            history=tuple(history), contrib=tuple(contrib), folded=tuple(folded),
            raises=raises, stake=stake, acted=acted,
        )
        if active == 1:
            nxt.cur = TERMINAL
        elif acted >= active:
            if self.round == 0:
                nxt.round = 1
                nxt.raises = 0
                nxt.acted = 0
                nxt.cur = CHANCE
            else:
                nxt.cur = TERMINAL
        else:
            nxt.cur = nxt._next_active(self.cur)
        return nxt

    def _first_active(self) -> int:
        return next(p for p in range(self.game.num_players) if not self.folded[p])

    def _next_active(self, player: int) -> int:
        n = self.game.num_players
        for step in range(1, n + 1):
            p = (player + step) % n
            if not self.folded[p]:
                return p
        raise AssertionError("no active player")

    # -- payoffs ------------------------------------------------------------------

    def _strength(self, player: int) -> int:
        rank = self.private[player]
        if rank == self.public:
            return 100 + rank
        return rank

    def returns(self) -> np.ndarray:
        n = self.game.num_players
        contrib = np.asarray(self.contrib, dtype=float)
        if self.cur != TERMINAL:
            return np.zeros(n)
        active = [p for p in range(n) if not self.folded[p]]
        if len(active) > 1:
            best = max(self._strength(p) for p in active)
            winners = [p for p in active if self._strength(p) == best]
        else:
            winners = active
        pot = contrib.sum()
        out = -contrib
        for p in winners:
            out[p] += pot / len(winners)
        return out

    def information_state_key(self, player: int) -> str:
        public = "-" if self.public is None else _RANK_CHARS[self.public]
        return f"{player}|{_RANK_CHARS[self.private[player]]}|{public}|{self.history[0]}|{self.history[1]}"

    def __repr__(self) -> str:
        return f"LeducState(private={self.private}, public={self.public}, history={self.history})"


class LeducPoker(Game):
    def __init__(self, spec: LeducSpec):
        self.spec = spec
        self.num_players = spec.num_players
        self.num_distinct_actions = 3
        self.zero_sum = True
        self.name = f"leduc{spec.num_players}p"

    def new_initial_state(self) -> LeducState:
        n = self.num_players
        return LeducState(
            self, (), None, 0, ("", ""), (self.spec.ante,) * n, (False,) * n,
            CHANCE, 0, self.spec.ante, 0,
        )

    def action_names(self):
        return ("fold", "call", "raise")


def make_leduc(spec: LeducSpec | None = None, **kwargs) -> Game:
    spec = spec or LeducSpec(**kwargs)
    if spec.num_players not in (2, 3):
        raise ValueError("Leduc supports 2 or 3 players")
    if spec.num_suits * spec.num_ranks < spec.num_players + 1:
        raise ValueError("deck too small for the number of players")
    game = LeducPoker(spec)
    if spec.wrapped:
        from psrolab.games.wrapped import wrap_illegal_actions

        return wrap_illegal_actions(game, spec.illegal_penalty)
    return game
