"""Policy-space response oracles: grow policy sets, fill the empirical game, re-solve.

Each epoch every player gets one new oracle trained against the others'
start-of-epoch meta-strategies. Training meta-strategies carry one extra
trailing entry for the oracle that is being trained, so the classic special
cases read off directly: fictitious play (1/K, ..., 1/K, 0), iterated best
response (0, ..., 1, 0), independent learning (0, ..., 0, 1) and double oracle
(meta-Nash, 0).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from psrolab.core.game import Game
from psrolab.core.payoff import EmpiricalPayoffTensor, meta_payoff
from psrolab.core.policy import MixturePolicy, uniform_policy
from psrolab.core.rng import child_seed, stream
from psrolab.core.simulate import estimate_payoff_entry, expected_returns_exact
from psrolab.core.tree import TreeTooLarge
from psrolab.eval.curves import format_metrics
from psrolab.games.registry import make_game
from psrolab.metasolvers.full import ExplorationParams, IteratedSolver, solve_last, solve_uniform
from psrolab.metasolvers.nash import solve_meta_nash
from psrolab.oracles.best_response import exact_best_response
from psrolab.oracles.qlearning import QParams, QTable, train_independent_learners, train_q_oracle

PRESETS = {
    "fp": "uniform",
    "ibr": "ibr",
    "inrl": "last",
    "do": "nash",
    "psro": "prd",
}
FULL_INFO_SOLVERS = ("uniform", "last", "ibr", "nash", "rm", "hedge", "prd")


@dataclass(frozen=True)
class PsroConfig:
    game: dict = field(default_factory=lambda: {"name": "kuhn"})
    oracle: str = "exact"
    q: QParams = field(default_factory=QParams)
    solver: str = "nash"
    exploration: ExplorationParams = field(default_factory=ExplorationParams)
    epochs: int = 5
    episodes_per_cell: int = 1000
    episodes_per_oracle: int = 5000
    nash_tolerance: float = 1e-4
    # exact NashConv of the solution every epoch (small games only)
    track_nashconv: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.oracle not in ("exact", "q"):
            raise ValueError(f"unknown oracle kind {self.oracle!r}")
        if self.solver not in FULL_INFO_SOLVERS:
            raise ValueError(
                f"unknown meta-solver {self.solver!r} for PSRO; choose from {FULL_INFO_SOLVERS} "
                "(decoupled solvers run inside DCH)"
            )

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "PsroConfig":
        data = dict(data)
        if "q" in data:
            data["q"] = QParams(**data["q"])
        if "exploration" in data:
            data["exploration"] = ExplorationParams(**data["exploration"])
        return cls(**data)


def make_preset(name: str, num_players: int = 2) -> dict:
    """Config fragment for a named special case."""
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    if name == "do" and num_players != 2:
        raise ValueError("double oracle is defined for two players only")
    return {"solver": PRESETS[name]}


@dataclass
class PsroRun:
    game: Game
    config: PsroConfig
    policies: list[list]
    tensor: EmpiricalPayoffTensor
    # per epoch, per player; length |policies| + 1 (in-training slot last)
    training_sigmas: list[list[np.ndarray]] = field(default_factory=list)
    # index 0 is the initial solution; length |policies| at that epoch
    solution_sigmas: list[list[np.ndarray]] = field(default_factory=list)
    records: list[dict] = field(default_factory=list)
    solver: IteratedSolver | None = None
    q_tables: list[QTable] | None = None

    @property
    def epoch(self) -> int:
        return len(self.training_sigmas)

    @property
    def num_players(self) -> int:
        return self.game.num_players

    def solution(self, player: int) -> MixturePolicy:
        return MixturePolicy(self.policies[player], self.solution_sigmas[-1][player])


def _fill_cells(run: PsroRun, tensor: EmpiricalPayoffTensor, policies) -> None:
    cfg = run.config
    for idx in tensor.missing():
        joint = [policies[p][i] for p, i in enumerate(idx)]
        if cfg.oracle == "exact":
            tensor.set(idx, expected_returns_exact(run.game, joint), 0)
        else:
            est = estimate_payoff_entry(run.game, joint, cfg.episodes_per_cell, child_seed(cfg.seed, "cell", *idx))
            tensor.set(idx, est.mean, est.count)


def psro_init(config: PsroConfig, game: Game | None = None) -> PsroRun:
    game = game or make_game(config.game)
    n = game.num_players
    if config.solver == "nash" and n != 2:
        raise ValueError("meta-Nash needs two players; use prd")
    if config.oracle == "exact" and config.solver == "last":
        raise ValueError("independent learning trains against a learner; use the q oracle")
    run = PsroRun(game, config, [[uniform_policy(f"uniform_p{p}")] for p in range(n)], EmpiricalPayoffTensor((1,) * n))
    if config.solver in ("rm", "hedge", "prd"):
        run.solver = IteratedSolver(config.solver, config.exploration)
    _fill_cells(run, run.tensor, run.policies)
    run.solution_sigmas.append([np.ones(1) for _ in range(n)])
    run.records.append(_record(run, 0))
    return run


def _training_sigma(run: PsroRun, player: int) -> np.ndarray:
    k = len(run.policies[player])
    kind = run.config.solver
    if kind == "uniform":
        return solve_uniform(k)
    if kind == "ibr":
        return solve_last(k, "ibr")
    if kind == "last":
        return solve_last(k, "inrl")
    return np.append(run.solution_sigmas[-1][player], 0.0)


def _solve(run: PsroRun, tensor: EmpiricalPayoffTensor) -> list[np.ndarray]:
    kind = run.config.solver
    shape = tensor.shape
    if kind == "uniform":
        return [np.full(m, 1.0 / m) for m in shape]
    if kind in ("ibr", "last"):
        return [np.eye(m)[-1] for m in shape]
    if kind == "nash":
        return solve_meta_nash(tensor, run.config.nash_tolerance)
    return run.solver.solve(tensor)


def _train_oracles(run: PsroRun, sigmas: list[np.ndarray], epoch: int) -> list:
    cfg = run.config
    n = run.num_players
    if cfg.solver == "last":
        # every seat responds to the others' in-training oracles: all learn together
        tables = run.q_tables or [QTable() for _ in range(n)]
        tables = [_copy_table(t) for t in tables]
        reports = train_independent_learners(
            run.game, cfg.episodes_per_oracle, cfg.q, stream(cfg.seed, "oracle", epoch), tables
        )
        run_tables = [r.qtable for r in reports]
        for p, r in enumerate(reports):
            r.policy.name = f"pi_{p}_{epoch}"
        return [r.policy for r in reports], run_tables
    new = []
    for p in range(n):
        opponents = []
        for j in range(n):
            if j == p:
                opponents.append(None)
                continue
            weights = sigmas[j][:-1]
            if abs(weights.sum() - 1.0) > 1e-9:
                raise ValueError("training meta-strategy puts weight on an unfinished oracle")
            opponents.append(MixturePolicy(run.policies[j], weights))
        name = f"pi_{p}_{epoch}"
        if cfg.oracle == "exact":
            policy, _ = exact_best_response(run.game, p, opponents, name=name)
        else:
            report = train_q_oracle(
                run.game, p, opponents, cfg.episodes_per_oracle, cfg.q, stream(cfg.seed, "oracle", epoch, p), name=name
            )
            policy = report.policy
        new.append(policy)
    return new, None


def _copy_table(table: QTable) -> QTable:
    out = QTable()
    out.values = {k: list(v) for k, v in table.values.items()}
    return out


def psro_epoch(run: PsroRun) -> PsroRun:
    """One epoch; the run is left untouched if any step fails."""
    epoch = run.epoch + 1
    sigmas = [_training_sigma(run, p) for p in range(run.num_players)]
    new, tables = _train_oracles(run, sigmas, epoch)
    policies = [list(ps) + [pi] for ps, pi in zip(run.policies, new)]
    tensor = EmpiricalPayoffTensor.from_json(run.tensor.to_json())
    for p in range(run.num_players):
        tensor.grow(p)
    _fill_cells(run, tensor, policies)
    solution = _solve(run, tensor)
    # commit
    run.policies = policies
    run.tensor = tensor
    run.training_sigmas.append(sigmas)
    run.solution_sigmas.append([np.asarray(s, dtype=float) for s in solution])
    if tables is not None:
        run.q_tables = tables
    run.records.append(_record(run, epoch))
    return run


def _record(run: PsroRun, epoch: int) -> dict:
    sig = run.solution_sigmas[-1]
    rec = {"epoch": epoch, "meta_value": [float(v) for v in meta_payoff(run.tensor, sig)]}
    if run.config.track_nashconv:
        from psrolab.eval.nashconv import nashconv

        try:
            total, gains = nashconv(run.game, [run.solution(p) for p in range(run.num_players)])
        except (TreeTooLarge, ValueError):
            pass
        else:
            rec["nashconv"] = total
            rec["nashconv_player"] = [float(g) for g in gains]
    return rec


def psro_run(config: PsroConfig, game: Game | None = None, out_dir: str | Path | None = None) -> PsroRun:
    run = psro_init(config, game)
    for _ in range(config.epochs):
        psro_epoch(run)
    if out_dir is not None:
        write_run(run, out_dir)
    return run


def metrics_rows(run: PsroRun) -> list[tuple]:
    rows = []
    for rec in run.records:
        e = rec["epoch"]
        for p, v in enumerate(rec["meta_value"]):
            rows.append((e, f"meta_value_p{p}", v, ""))
        if "nashconv" in rec:
            rows.append((e, "nashconv", rec["nashconv"], ""))
            for p, g in enumerate(rec["nashconv_player"]):
                rows.append((e, f"nashconv_p{p}", g, ""))
    return rows


def write_run(run: PsroRun, out_dir: str | Path) -> None:
    out = Path(out_dir)
    (out / "policies").mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(run.config.to_json(), indent=1, sort_keys=True))
    for e, sigmas in enumerate(run.solution_sigmas):
        doc = {"epoch": e, "solution": [s.tolist() for s in sigmas]}
        if e >= 1:
            doc["training"] = [s.tolist() for s in run.training_sigmas[e - 1]]
        (out / f"sigma_{e}.json").write_text(json.dumps(doc, indent=1))
    for p, ps in enumerate(run.policies):
        for e, pol in enumerate(ps):
            pol.save(out / "policies" / f"pi_{p}_{e}.json")
    run.tensor.save(out / "tensor.json")
    (out / "metrics.csv").write_text(format_metrics(metrics_rows(run)))
