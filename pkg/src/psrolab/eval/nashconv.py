"""NashConv (sum of best-response gains) on enumerated trees."""

from __future__ import annotations

import numpy as np

from psrolab.core.game import Game
from psrolab.core.simulate import game_tree
from psrolab.core.tree import GameTree
from psrolab.eval.mixed import as_behavior


def nashconv_profile(tree: GameTree, profile: np.ndarray) -> tuple[float, np.ndarray]:
    values = tree.expected_returns(profile)
    gains = np.empty(tree.num_players)
    for i in range(tree.num_players):
        _, br_value = tree.best_response(i, profile)
        gains[i] = br_value - values[i]
    return float(gains.sum()), gains


def _legal_behavior(policy, tree: GameTree, player: int):
    from psrolab.core.policy import MixturePolicy
    from psrolab.games.wrapped import legalize_policy

    if isinstance(policy, MixturePolicy):
        members = [_legal_behavior(p, tree, player) for p in policy.policies]
        return as_behavior(MixturePolicy(members, policy.weights), tree, player)
    return legalize_policy(policy, tree, player)


def nashconv(game: Game | GameTree, joint) -> tuple[float, np.ndarray]:
    """NashConv of a joint policy (behavior policies or mixtures).

    Policies for an illegal-move-wrapped game are first made legal (illegal
    mass masked out, the rest renormalized) and then scored on the original
    game.
    """
    from psrolab.games.wrapped import WrappedGame

    if isinstance(game, WrappedGame):
        tree = game_tree(game.base)
        behavior = [_legal_behavior(p, tree, i) for i, p in enumerate(joint)]
    else:
        tree = game_tree(game)
        behavior = [as_behavior(p, tree, i) for i, p in enumerate(joint)]
    return nashconv_profile(tree, tree.profile(behavior, strict=True))
