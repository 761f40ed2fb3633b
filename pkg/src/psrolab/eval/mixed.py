"""Mixed strategies over policies to a single payoff-equivalent behavior policy."""

from __future__ import annotations

import numpy as np

from psrolab.core.game import Game
from psrolab.core.policy import BehaviorPolicy, MixturePolicy, validate_distribution
from psrolab.core.simulate import game_tree
from psrolab.core.tree import GameTree


def mixture_weights(tree: GameTree, policies, sigma, player: int) -> np.ndarray:
    """Slot weights: sum over members of weight x own reach x action probability."""
    sigma = validate_distribution(sigma)
    if len(sigma) != len(policies):
        raise ValueError("sigma and policy set differ in length")
    weights = np.zeros(tree.num_slots)
    mine = tree.slot_player == player
    for w, policy in zip(sigma, policies):
        if w == 0:
            continue
        prof = tree.player_profile(policy, player, strict=True)
        # under perfect recall every node of an information state shares the
        # player's own reach, so the representative node is enough
        own = tree.reach(prof)[tree.infoset_rep, player]
        weights += np.where(mine, w * own[tree.slot_infoset] * prof, 0.0)
    return weights


def mixed_to_behavior(policies, sigma, game: Game | GameTree, player: int, name: str = "") -> BehaviorPolicy:
    tree = game_tree(game)
    behavior = tree.normalize(mixture_weights(tree, policies, sigma, player))
    return tree.to_policy(behavior, player, name)


def as_behavior(policy, game: Game | GameTree, player: int) -> BehaviorPolicy:
    """Collapse mixtures (possibly nested) into behavior form; pass others through."""
    if isinstance(policy, MixturePolicy):
        members = [as_behavior(p, game, player) for p in policy.policies]
        return mixed_to_behavior(members, policy.weights, game, player)
    return policy
