"""Enumerated game trees and exact, vectorized evaluation over them.

A :class:`GameTree` flattens an :class:`~psrolab.core.game.Game` into edge
arrays laid out breadth-first, so every pass over the tree is a handful of
numpy operations per depth level. Decision edges point at "slots": one slot
per (information state, legal action) pair, contiguous per information
state. A *profile* is a float vector over all slots holding every player's
behavior probabilities.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from psrolab.core.game import CHANCE, TERMINAL, Game
from psrolab.core.policy import BehaviorPolicy, DefaultRule

DEFAULT_NODE_BUDGET = 3_000_000

# two actions whose values differ by less than this are treated as tied
TIE_TOLERANCE = 1e-12


class TreeTooLarge(RuntimeError):
    pass


class GameTree:
    def __init__(self, game: Game, max_nodes: int = DEFAULT_NODE_BUDGET):
        self.game = game
        n = self.num_players = game.num_players
        node_player: list[int] = []
        node_depth: list[int] = []
        terminal_nodes: list[int] = []
        terminal_returns: list[np.ndarray] = []
        e_parent: list[int] = []
        e_child: list[int] = []
        e_slot: list[int] = []
        e_actor: list[int] = []
        e_prob: list[float] = []

        self.infoset_index: dict[tuple[int, str], int] = {}
        self.infoset_keys: list[tuple[int, str]] = []
        self.infoset_actions: list[list[int]] = []
        infoset_depth: list[int] = []
        infoset_rep: list[int] = []
        slot_start: list[int] = []
        num_slots = 0

        root = game.new_initial_state()
        queue = deque([(root, 0)])
        node_player.append(root.current_player())
        node_depth.append(0)
        node_id = 0
        while queue:
            state, depth = queue.popleft()
            player = node_player[node_id]
            if player == TERMINAL:
                terminal_nodes.append(node_id)
                terminal_returns.append(np.asarray(state.returns(), dtype=float))
            elif player == CHANCE:
                for action, prob in state.chance_outcomes():
                    if prob <= 0:
                        continue
                    child = state.child(action)
                    e_parent.append(node_id)
                    e_child.append(len(node_player))
                    e_slot.append(-1)
                    e_actor.append(n)
                    e_prob.append(prob)
                    node_player.append(child.current_player())
                    node_depth.append(depth + 1)
                    queue.append((child, depth + 1))
            else:
                key = state.information_state_key(player)
                legal = list(state.legal_actions())
                if not legal:
                    raise ValueError(f"empty legal-action set at {key!r}")
                idx = self.infoset_index.get((player, key))
                if idx is None:
                    idx = len(self.infoset_keys)
                    self.infoset_index[(player, key)] = idx
                    self.infoset_keys.append((player, key))
                    self.infoset_actions.append(legal)
                    infoset_depth.append(depth)
                    infoset_rep.append(node_id)
                    slot_start.append(num_slots)
                    num_slots += len(legal)
                else:
                    if self.infoset_actions[idx] != legal:
                        raise ValueError(f"inconsistent legal actions at {key!r}")
                    if infoset_depth[idx] != depth:
                        raise ValueError(
                            f"information state {key!r} spans several depths; "
                            "exact passes need a timeable game"
                        )
                base = slot_start[idx]
                for j, action in enumerate(legal):
                    child = state.child(action)
                    e_parent.append(node_id)
                    e_child.append(len(node_player))
                    e_slot.append(base + j)
                    e_actor.append(player)
                    e_prob.append(0.0)
                    node_player.append(child.current_player())
                    node_depth.append(depth + 1)
                    queue.append((child, depth + 1))
            if len(node_player) > max_nodes:
                raise TreeTooLarge(
                    f"{game.name}: more than {max_nodes} nodes; use Monte Carlo "
                    "estimation (estimate_payoff_entry) instead of exact enumeration"
                )
            node_id += 1

        self.num_nodes = len(node_player)
        self.node_player = np.asarray(node_player)
        self.node_depth = np.asarray(node_depth)
        self.terminal_nodes = np.asarray(terminal_nodes, dtype=np.int64)
        self.terminal_returns = np.asarray(terminal_returns, dtype=float).reshape(-1, n)
        self.edge_parent = np.asarray(e_parent, dtype=np.int64)
        self.edge_child = np.asarray(e_child, dtype=np.int64)
        self.edge_slot = np.asarray(e_slot, dtype=np.int64)
        self.edge_actor = np.asarray(e_actor, dtype=np.int64)
        self.edge_chance_prob = np.asarray(e_prob, dtype=float)
        self.is_decision_edge = self.edge_slot >= 0
        self.num_slots = num_slots
        self.num_infosets = len(self.infoset_keys)
        self.infoset_player = np.asarray([p for p, _ in self.infoset_keys], dtype=np.int64)
        self.infoset_depth = np.asarray(infoset_depth, dtype=np.int64)
        self.infoset_rep = np.asarray(infoset_rep, dtype=np.int64)
        self.slot_start = np.asarray(slot_start, dtype=np.int64)
        self.infoset_size = np.asarray([len(a) for a in self.infoset_actions], dtype=np.int64)
        self.slot_infoset = np.repeat(np.arange(self.num_infosets), self.infoset_size)
        self.slot_player = self.infoset_player[self.slot_infoset]

        # edges are appended parent-by-parent in BFS order, so each parent
        # depth owns a contiguous edge range, and so does each parent's
        # set of children
        parent_depth = self.node_depth[self.edge_parent]
        max_depth = int(parent_depth.max()) if len(parent_depth) else -1
        bounds = np.searchsorted(parent_depth, np.arange(max_depth + 2))
        self.depth_edges = [(int(bounds[d]), int(bounds[d + 1])) for d in range(max_depth + 1)]

    # -- profiles -----------------------------------------------------------------

    def profile(self, policies, strict: bool = True) -> np.ndarray:
        """Stack one policy per player into a slot vector."""
        if len(policies) != self.num_players:
            raise ValueError(f"need {self.num_players} policies, got {len(policies)}")
        out = np.empty(self.num_slots)
        for idx, (player, key) in enumerate(self.infoset_keys):
            s = self.slot_start[idx]
            out[s : s + self.infoset_size[idx]] = policies[player].probs(
                key, int(self.infoset_size[idx]), strict=strict
            )
        return out

    def uniform_profile(self) -> np.ndarray:
        return 1.0 / self.infoset_size[self.slot_infoset]

    def player_profile(self, policy, player: int, strict: bool = True) -> np.ndarray:
        """Slot vector carrying ``policy`` on ``player``'s slots, uniform elsewhere."""
        out = self.uniform_profile()
        for idx in np.flatnonzero(self.infoset_player == player):
            s = self.slot_start[idx]
            out[s : s + self.infoset_size[idx]] = policy.probs(
                self.infoset_keys[idx][1], int(self.infoset_size[idx]), strict=strict
            )
        return out

    def merge_profiles(self, per_player: list[np.ndarray]) -> np.ndarray:
        """Take player i's slots from ``per_player[i]``."""
        out = np.empty(self.num_slots)
        for player, vec in enumerate(per_player):
            mask = self.slot_player == player
            out[mask] = vec[mask]
        return out

    def to_policy(self, profile: np.ndarray, player: int, name: str = "") -> BehaviorPolicy:
        table = {}
        for idx in np.flatnonzero(self.infoset_player == player):
            s = self.slot_start[idx]
            table[self.infoset_keys[idx][1]] = np.array(profile[s : s + self.infoset_size[idx]])
        return BehaviorPolicy(table, DefaultRule.ERROR, name)

    def normalize(self, weights: np.ndarray) -> np.ndarray:
        """Normalize per information state; all-zero states become uniform."""
        totals = np.add.reduceat(weights, self.slot_start) if self.num_slots else weights
        per_slot = totals[self.slot_infoset]
        uniform = 1.0 / self.infoset_size[self.slot_infoset]
        safe = np.where(per_slot > 0, per_slot, 1.0)
        return np.where(per_slot > 0, weights / safe, uniform)

    # -- passes -------------------------------------------------------------------

    def edge_probs(self, profile: np.ndarray) -> np.ndarray:
        return np.where(
            self.is_decision_edge, profile[np.maximum(self.edge_slot, 0)], self.edge_chance_prob
        )

    def reach(self, profile: np.ndarray, edge_probs: np.ndarray | None = None) -> np.ndarray:
        """Per-node reach contributions; column ``num_players`` is chance."""
        p = self.edge_probs(profile) if edge_probs is None else edge_probs
        reach = np.ones((self.num_nodes, self.num_players + 1))
        for lo, hi in self.depth_edges:
            child = self.edge_child[lo:hi]
            reach[child] = reach[self.edge_parent[lo:hi]]
            reach[child, self.edge_actor[lo:hi]] *= p[lo:hi]
        return reach

    def values(self, profile: np.ndarray, edge_probs: np.ndarray | None = None) -> np.ndarray:
        """Expected per-player value of every node under ``profile``."""
        p = self.edge_probs(profile) if edge_probs is None else edge_probs
        vals = np.zeros((self.num_nodes, self.num_players))
        vals[self.terminal_nodes] = self.terminal_returns
        for lo, hi in reversed(self.depth_edges):
            parent = self.edge_parent[lo:hi]
            first = parent[0]
            width = parent[-1] - first + 1
            weighted = vals[self.edge_child[lo:hi]] * p[lo:hi, None]
            for j in range(self.num_players):
                vals[first : first + width, j] += np.bincount(
                    parent - first, weights=weighted[:, j], minlength=width
                )
        return vals

    def expected_returns(self, profile: np.ndarray) -> np.ndarray:
        reach = self.reach(profile)
        weight = reach[self.terminal_nodes].prod(axis=1)
        return weight @ self.terminal_returns

    def best_response(self, player: int, profile: np.ndarray) -> tuple[np.ndarray, float]:
        """Deterministic best response of ``player`` to the rest of ``profile``.

        Returns the response as a slot vector (other players' slots copied
        from ``profile``) and its expected value. Ties go to the lowest
        legal-action index.
        """
        p = self.edge_probs(profile)
        reach = self.reach(profile, p)
        others = np.delete(np.arange(self.num_players + 1), player)
        opp_reach = reach[:, others].prod(axis=1)
        response = profile.copy()
        vals = np.zeros(self.num_nodes)
        vals[self.terminal_nodes] = self.terminal_returns[:, player]
        mine_edge = self.edge_actor == player
        for lo, hi in reversed(self.depth_edges):
            parent = self.edge_parent[lo:hi]
            child = self.edge_child[lo:hi]
            first = parent[0]
            width = parent[-1] - first + 1
            mine = mine_edge[lo:hi]
            if mine.any():
                slots = self.edge_slot[lo:hi][mine]
                q = np.bincount(
                    slots,
                    weights=opp_reach[parent[mine]] * vals[child[mine]],
                    minlength=self.num_slots,
                )
                for idx in np.unique(self.slot_infoset[slots]):
                    s = self.slot_start[idx]
                    e = s + self.infoset_size[idx]
                    qs = q[s:e]
                    best = int(np.flatnonzero(qs >= qs.max() - TIE_TOLERANCE)[0])
                    response[s:e] = 0.0
                    response[s + best] = 1.0
                edge_p = np.where(mine, response[np.maximum(self.edge_slot[lo:hi], 0)], p[lo:hi])
            else:
                edge_p = p[lo:hi]
            vals[first : first + width] += np.bincount(
                parent - first, weights=vals[child] * edge_p, minlength=width
            )
        return response, float(vals[0])
