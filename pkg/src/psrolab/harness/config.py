"""Experiment configs: parsing, validation and canonical hashing.

A config is one JSON object::

    {"schema": "psrolab.experiment/1", "kind": "psro", "seed": 0,
     "game": {"name": "kuhn"}, "params": {...}, "eval": {...}, "out": "runs/x"}

``params`` and ``eval`` depend on the kind; see ``docs/config.md``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_ID = "psrolab.experiment/1"
KINDS = ("psro", "dch", "jpc", "cfr", "tournament")

_TOP_KEYS = {"schema", "kind", "seed", "game", "params", "eval", "out"}

_Q_KEYS = {"step_size", "epsilon_start", "epsilon_end", "discount", "eval_episodes"}
_PSRO_KEYS = {
    "preset", "oracle", "q", "solver", "exploration", "epochs", "episodes_per_cell",
    "episodes_per_oracle", "nash_tolerance", "track_nashconv",
}
_DCH_KEYS = {"levels", "period", "steps", "solver", "gamma", "delta", "q", "meta_eval", "mode"}
_INRL_KEYS = {"episodes", "q"}
_JPC_KEYS = {"instances", "episodes_per_cell", "studies", "policy", "algorithms"}
_CFR_KEYS = {"iterations", "record_every"}
_TOURNAMENT_KEYS = {"policy", "opponents", "episodes"}
_EVAL_KEYS = {
    "psro": set(),
    "dch": {"every", "nashconv"},
    "jpc": set(),
    "cfr": set(),
    "tournament": set(),
}


class ConfigError(ValueError):
    """Invalid config; ``problems`` lists one diagnostic per offending field."""

    def __init__(self, problems: list[str], exit_code: int = 1):
        super().__init__("; ".join(problems))
        self.problems = problems
        self.exit_code = exit_code


@dataclass
class ExperimentConfig:
    kind: str
    game: dict
    params: dict = field(default_factory=dict)
    eval: dict = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    schema: str = SCHEMA_ID

    def to_dict(self) -> dict:
        doc = {
            "schema": self.schema,
            "kind": self.kind,
            "seed": self.seed,
            "game": self.game,
            "params": self.params,
            "eval": self.eval,
        }
        if self.out is not None:
            doc["out"] = self.out
        return doc

    def canonical(self) -> str:
        """Stable text of everything that affects results (``out`` excluded)."""
        doc = self.to_dict()
        doc.pop("out", None)
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    @classmethod
    def from_dict(cls, doc) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError(["<root>: expected a JSON object"])
        kind = doc.get("kind")
        if kind not in KINDS:
            raise ConfigError([f"kind: unknown experiment kind {kind!r}; expected one of {list(KINDS)}"], exit_code=2)
        problems = []
        for key in sorted(set(doc) - _TOP_KEYS):
            problems.append(f"{key}: unknown top-level field")
        schema = doc.get("schema", SCHEMA_ID)
        if schema != SCHEMA_ID:
            problems.append(f"schema: unsupported schema {schema!r}; expected {SCHEMA_ID!r}")
        seed = doc.get("seed", 0)
        if not _is_int(seed) or seed < 0:
            problems.append("seed: expected a non-negative integer")
        game = doc.get("game")
        problems += _check_game(game)
        params = doc.get("params", {})
        ev = doc.get("eval", {})
        out = doc.get("out")
        if not isinstance(params, dict):
            problems.append("params: expected an object")
        else:
            problems += _check_params(kind, params)
        if not isinstance(ev, dict):
            problems.append("eval: expected an object")
        else:
            problems += _unknown("eval", ev, _EVAL_KEYS[kind])
        if out is not None and not isinstance(out, str):
            problems.append("out: expected a string path")
        if problems:
            raise ConfigError(problems)
        return cls(kind, game, params, ev, seed, out, schema)


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from None
    return ExperimentConfig.from_dict(doc)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _unknown(prefix: str, doc: dict, allowed: set) -> list[str]:
    return [f"{prefix}.{k}: unknown field (allowed: {', '.join(sorted(allowed)) or 'none'})"
            for k in sorted(set(doc) - allowed)]


def _positive_ints(prefix: str, doc: dict, keys) -> list[str]:
    return [f"{prefix}.{k}: expected a positive integer"
            for k in keys if k in doc and (not _is_int(doc[k]) or doc[k] < 1)]


def _check_game(game) -> list[str]:
    if not isinstance(game, dict):
        return ["game: expected an object with a 'name'"]
    if game.get("name") not in ("kuhn", "leduc", "matrix", "gridworld"):
        return [f"game.name: unknown game {game.get('name')!r}; expected kuhn, leduc, matrix or gridworld"]
    return []


def _check_q(prefix: str, q) -> list[str]:
    if not isinstance(q, dict):
        return [f"{prefix}: expected an object"]
    problems = _unknown(prefix, q, _Q_KEYS)
    for k in sorted(_Q_KEYS & set(q)):
        if not _is_num(q[k]):
            problems.append(f"{prefix}.{k}: expected a number")
    return problems


def _check_dch(prefix: str, p: dict) -> list[str]:
    problems = _unknown(prefix, p, _DCH_KEYS)
    problems += _positive_ints(prefix, p, ("levels", "steps"))
    if "period" in p and p["period"] is not None and (not _is_int(p["period"]) or p["period"] < 1):
        problems.append(f"{prefix}.period: expected a positive integer or null")
    if p.get("solver", "dprd") not in ("drm", "exp3", "dprd"):
        problems.append(f"{prefix}.solver: expected drm, exp3 or dprd")
    if p.get("meta_eval", "sampled") not in ("sampled", "exact"):
        problems.append(f"{prefix}.meta_eval: expected sampled or exact")
    if p.get("mode", "sim") not in ("sim", "parallel"):
        problems.append(f"{prefix}.mode: expected sim or parallel")
    for k in ("gamma", "delta"):
        if k in p and not _is_num(p[k]):
            problems.append(f"{prefix}.{k}: expected a number")
    if "q" in p:
        problems += _check_q(f"{prefix}.q", p["q"])
    return problems


def _check_policy_ref(prefix: str, ref) -> list[str]:
    if not isinstance(ref, dict):
        return [f"{prefix}: expected an object such as {{\"uniform\": true}}, {{\"file\": ...}} or {{\"cfr\": 500}}"]
    keys = set(ref) & {"uniform", "file", "cfr"}
    if len(keys) != 1:
        return [f"{prefix}: give exactly one of uniform, file, cfr"]
    problems = _unknown(prefix, ref, {"uniform", "file", "cfr", "pure"})
    if "cfr" in ref and (not _is_int(ref["cfr"]) or ref["cfr"] < 1):
        problems.append(f"{prefix}.cfr: expected a positive iteration count")
    return problems


def _check_params(kind: str, p: dict) -> list[str]:
    if kind == "psro":
        problems = _unknown("params", p, _PSRO_KEYS)
        problems += _positive_ints("params", p, ("episodes_per_cell", "episodes_per_oracle"))
        if "epochs" in p and (not _is_int(p["epochs"]) or p["epochs"] < 0):
            problems.append("params.epochs: expected a non-negative integer")
        if "q" in p:
            problems += _check_q("params.q", p["q"])
        if "exploration" in p:
            ex = p["exploration"]
            if not isinstance(ex, dict):
                problems.append("params.exploration: expected an object")
            else:
                problems += _unknown("params.exploration", ex, {"gamma", "delta", "prd_iterations"})
        return problems
    if kind == "dch":
        return _check_dch("params", p)
    if kind == "jpc":
        problems = _unknown("params", p, _JPC_KEYS)
        problems += _positive_ints("params", p, ("episodes_per_cell", "studies"))
        if "instances" in p and (not _is_int(p["instances"]) or p["instances"] < 2):
            problems.append("params.instances: expected an integer >= 2")
        if p.get("policy", "mixture") not in ("mixture", "top"):
            problems.append("params.policy: expected mixture or top")
        algs = p.get("algorithms")
        if not isinstance(algs, dict) or not algs:
            problems.append("params.algorithms: expected a non-empty object of named algorithms")
            return problems
        for name, spec in sorted(algs.items()):
            prefix = f"params.algorithms.{name}"
            if not isinstance(spec, dict) or spec.get("kind") not in ("inrl", "dch"):
                problems.append(f"{prefix}.kind: expected inrl or dch")
                continue
            body = {k: v for k, v in spec.items() if k != "kind"}
            if spec["kind"] == "inrl":
                problems += _unknown(prefix, body, _INRL_KEYS)
                problems += _positive_ints(prefix, body, ("episodes",))
                if "q" in body:
                    problems += _check_q(f"{prefix}.q", body["q"])
            else:
                problems += _check_dch(prefix, body)
        return problems
    if kind == "cfr":
        problems = _unknown("params", p, _CFR_KEYS)
        problems += _positive_ints("params", p, ("iterations",))
        if "record_every" in p and (not _is_int(p["record_every"]) or p["record_every"] < 0):
            problems.append("params.record_every: expected a non-negative integer")
        return problems
    problems = _unknown("params", p, _TOURNAMENT_KEYS)
    problems += _positive_ints("params", p, ("episodes",))
    for key in ("policy", "opponents"):
        refs = p.get(key)
        if not isinstance(refs, list) or not refs:
            problems.append(f"params.{key}: expected a list with one policy reference per seat")
            continue
        for s, ref in enumerate(refs):
            problems += _check_policy_ref(f"params.{key}[{s}]", ref)
    return problems
