"""Exact best responses by a backward pass over the enumerated tree."""

from __future__ import annotations

from psrolab.core.game import Game
from psrolab.core.policy import BehaviorPolicy
from psrolab.core.simulate import game_tree
from psrolab.core.tree import DEFAULT_NODE_BUDGET, GameTree
from psrolab.eval.mixed import as_behavior


def exact_best_response(
    game: Game | GameTree, player: int, opponents, max_nodes: int = DEFAULT_NODE_BUDGET, name: str = ""
) -> tuple[BehaviorPolicy, float]:
    """Deterministic best response of ``player`` and its expected value.

    ``opponents`` holds one entry per player (the entry at ``player`` is
    ignored); entries may be behavior policies or mixtures over policy sets.
    """
    tree = game_tree(game, max_nodes)
    if len(opponents) != tree.num_players:
        raise ValueError(f"need {tree.num_players} entries, got {len(opponents)}")
    joint = [
        tree.to_policy(tree.uniform_profile(), p) if p == player else as_behavior(opp, tree, p)
        for p, opp in enumerate(opponents)
    ]
    response, value = tree.best_response(player, tree.profile(joint, strict=True))
    return tree.to_policy(response, player, name or f"br_p{player}"), value
