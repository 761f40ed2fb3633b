"""Purification: keep only the most likely action at every information state."""

from __future__ import annotations

import numpy as np

from psrolab.core.policy import BehaviorPolicy


def purify(policy: BehaviorPolicy) -> BehaviorPolicy:
    table = {}
    for key, vec in policy.table.items():
        pure = np.zeros(len(vec))
        # np.argmax returns the first maximum, i.e. the lowest action index
        pure[int(np.argmax(vec))] = 1.0
        table[key] = pure
    return BehaviorPolicy(table, policy.default_rule, policy.name)
