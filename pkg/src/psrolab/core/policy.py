"""Behavior policies, meta-strategies and their JSON form."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from psrolab.core.game import sample_index

POLICY_FORMAT_VERSION = 1


class DefaultRule(str, enum.Enum):
    UNIFORM_RANDOM = "uniform_random"
    ERROR = "error"


class UnknownInfoState(KeyError):
    pass


@dataclass
class BehaviorPolicy:
    """Map from information-state key to a distribution over legal actions.

    Vectors are aligned with the legal-action list of the state, not with
    the game's global action ids.
    """

    table: dict[str, np.ndarray] = field(default_factory=dict)
    default_rule: DefaultRule = DefaultRule.ERROR
    name: str = ""

    def probs(self, key: str, num_legal: int, strict: bool = False) -> np.ndarray:
        vec = self.table.get(key)
        if vec is None:
            if strict and self.default_rule is DefaultRule.ERROR:
                raise UnknownInfoState(key)
            return np.full(num_legal, 1.0 / num_legal)
        if len(vec) != num_legal:
            raise ValueError(
                f"policy {self.name!r} has {len(vec)} probabilities at {key!r}, "
                f"state has {num_legal} legal actions"
            )
        return vec

    def sample(self, rng: np.random.Generator) -> "BehaviorPolicy":
        return self

    def is_deterministic(self) -> bool:
        return all(np.count_nonzero(v) == 1 for v in self.table.values())

    def to_json(self) -> dict:
        return {
            "format": "behavior_policy",
            "version": POLICY_FORMAT_VERSION,
            "name": self.name,
            "default_rule": self.default_rule.value,
            "table": {k: [float(p) for p in self.table[k]] for k in sorted(self.table)},
        }

    @classmethod
    def from_json(cls, data: dict) -> "BehaviorPolicy":
        if data.get("format") != "behavior_policy":
            raise ValueError("not a behavior policy document")
        if data.get("version") != POLICY_FORMAT_VERSION:
            raise ValueError(f"unsupported policy version {data.get('version')}")
        table = {k: np.asarray(v, dtype=float) for k, v in data["table"].items()}
        return cls(table, DefaultRule(data["default_rule"]), data.get("name", ""))

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_json(), indent=1, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "BehaviorPolicy":
        return cls.from_json(json.loads(Path(path).read_text()))


def uniform_policy(name: str = "uniform") -> BehaviorPolicy:
    """The level-0 policy: uniform over legal actions everywhere."""
    return BehaviorPolicy({}, DefaultRule.UNIFORM_RANDOM, name)


def validate_distribution(vec, atol: float = 1e-9) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if vec.ndim != 1 or len(vec) == 0:
        raise ValueError("distribution must be a non-empty vector")
    if np.any(vec < -atol) or abs(vec.sum() - 1.0) > atol:
        raise ValueError(f"not a probability vector: {vec}")
    return vec


@dataclass
class MixturePolicy:
    """A policy set paired with a meta-strategy; one member is drawn per episode."""

    policies: list
    weights: np.ndarray

    def __post_init__(self):
        self.weights = validate_distribution(self.weights)
        if len(self.weights) != len(self.policies):
            raise ValueError("weights and policies differ in length")

    def sample(self, rng: np.random.Generator) -> BehaviorPolicy:
        if len(self.policies) == 1:
            return self.policies[0].sample(rng)
        return self.policies[sample_index(self.weights, rng)].sample(rng)
