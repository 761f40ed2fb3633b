"""Cognitive-hierarchy training with level-structured workers.

Worker (i, k) trains player i's level-k oracle against opponents drawn from
their level-k meta-strategies restricted to levels 0..k-1, and maintains its
own meta-strategy over levels 0..k (own oracle last) with a decoupled
bandit solver. Level 0 is the fixed uniform random policy and is never
stored. Workers exchange snapshots only through a :class:`PolicyStore`,
every ``period`` iterations.

Two execution modes share that contract: a deterministic round-robin
simulation, and true parallelism over processes with an on-disk store.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from psrolab.core.game import Game, sample_index
from psrolab.core.policy import BehaviorPolicy, MixturePolicy, uniform_policy
from psrolab.core.rng import stream
from psrolab.core.simulate import expected_returns_exact, simulate_episode
from psrolab.eval.mixed import as_behavior
from psrolab.metasolvers.decoupled import make_decoupled
from psrolab.oracles.qlearning import GreedyView, QParams, QTable, q_learning_episode


@dataclass(frozen=True)
class DchConfig:
    levels: int = 2
    # checkpoint and meta-update period; None never reloads after the start
    period: int | None = 1000
    steps: int = 10_000
    solver: str = "dprd"
    gamma: float = 0.1
    delta: float = 0.01
    q: QParams = field(default_factory=QParams)
    # "sampled": one episode per meta-update; "exact": exact expected payoff
    meta_eval: str = "sampled"
    seed: int = 0

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be >= 1")
        if self.period is not None and self.period < 1:
            raise ValueError("period must be >= 1 or None")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.meta_eval not in ("sampled", "exact"):
            raise ValueError("meta_eval must be 'sampled' or 'exact'")


class StoreReadError(RuntimeError):
    pass


@dataclass(frozen=True)
class Snapshot:
    policy: BehaviorPolicy
    sigma: np.ndarray
    version: int


class PolicyStore:
    """Versioned (player, level) slots holding a policy and a meta-strategy.

    Levels run 1..K; level 0 is implicit. In memory a slot is replaced by a
    single reference swap. On disk every file carries the slot version and a
    read is accepted only when all of them agree.
    """

    def __init__(self, num_players: int, levels: int, root: str | Path | None = None):
        self.num_players = num_players
        self.levels = levels
        self.root = Path(root) if root is not None else None
        self._slots: dict[tuple[int, int], Snapshot] = {}
        self.access_log: list[tuple[tuple[int, int], tuple[int, int], int]] = []
        self.peak_policies = 0
        self.peak_sigmas = 0
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def _check_slot(self, player: int, level: int) -> None:
        if not (0 <= player < self.num_players and 1 <= level <= self.levels):
            raise KeyError(f"no slot for player {player} level {level}")

    def slot_dir(self, player: int, level: int) -> Path:
        return self.root / f"p{player}_l{level}"

    def save(self, player: int, level: int, policy: BehaviorPolicy, sigma: np.ndarray) -> int:
        self._check_slot(player, level)
        if self.root is None:
            old = self._slots.get((player, level))
            version = 1 if old is None else old.version + 1
            self._slots[(player, level)] = Snapshot(policy, np.array(sigma, dtype=float), version)
        else:
            version = self._disk_version(player, level) + 1
            d = self.slot_dir(player, level)
            d.mkdir(exist_ok=True)
            _atomic_write(d / "policy.json", json.dumps({"version": version, "policy": policy.to_json()}, sort_keys=True))
            _atomic_write(d / "meta.json", json.dumps({"version": version, "sigma": [float(x) for x in sigma]}))
            _atomic_write(d / "version", str(version))
        self._track()
        return version

    def _disk_version(self, player: int, level: int) -> int:
        path = self.slot_dir(player, level) / "version"
        return int(path.read_text()) if path.exists() else 0

    def load(self, player: int, level: int, reader: tuple[int, int] | None = None) -> Snapshot | None:
        self._check_slot(player, level)
        if reader is not None and level > reader[1]:
            raise PermissionError(f"worker {reader} may not read level {level}")
        if self.root is None:
            snap = self._slots.get((player, level))
        else:
            snap = self._load_disk(player, level)
        if snap is not None and reader is not None:
            self.access_log.append((reader, (player, level), snap.version))
        return snap

    def _load_disk(self, player: int, level: int) -> Snapshot | None:
        d = self.slot_dir(player, level)
        if not (d / "version").exists():
            return None
        pol = json.loads((d / "policy.json").read_text())
        meta = json.loads((d / "meta.json").read_text())
        version = int((d / "version").read_text())
        if not (pol["version"] == meta["version"] == version):
            raise StoreReadError(f"torn read on slot p{player}_l{level}")
        return Snapshot(BehaviorPolicy.from_json(pol["policy"]), np.asarray(meta["sigma"]), version)

    def _track(self) -> None:
        if self.root is None:
            count = len(self._slots)
        else:
            count = sum(1 for p in self.root.glob("p*_l*") if (p / "version").exists())
        self.peak_policies = max(self.peak_policies, count)
        self.peak_sigmas = max(self.peak_sigmas, count)

    def slots(self) -> list[tuple[int, int]]:
        if self.root is None:
            return sorted(self._slots)
        out = []
        for p in range(self.num_players):
            for k in range(1, self.levels + 1):
                if (self.slot_dir(p, k) / "version").exists():
                    out.append((p, k))
        return out


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _renormalized_prefix(sigma: np.ndarray, k: int) -> np.ndarray:
    head = np.asarray(sigma[:k], dtype=float)
    total = head.sum()
    return head / total if total > 0 else np.full(k, 1.0 / k)


class DchWorker:
    def __init__(self, game: Game, player: int, level: int, config: DchConfig):
        self.game = game
        self.player = player
        self.level = level
        self.config = config
        self.table = QTable()
        self.solver = make_decoupled(config.solver, level + 1, config.gamma, config.delta)
        self.train_rng = stream(config.seed, "dch-train", player, level)
        self.meta_rng = stream(config.seed, "dch-meta", player, level)
        self.iteration = 0
        n = game.num_players
        self.level0 = uniform_policy("level0")
        # local copies, refreshed from the store
        self.sigmas = {j: np.full(level + 1, 1.0 / (level + 1)) for j in range(n) if j != player}
        self.oracles = {(j, k): self.level0 for j in range(n) for k in range(1, level)}
        self.meta_updates = 0

    @property
    def ident(self) -> tuple[int, int]:
        return (self.player, self.level)

    def current_policy(self) -> GreedyView:
        return GreedyView(self.table, f"dch_p{self.player}_l{self.level}")

    def snapshot_policy(self) -> BehaviorPolicy:
        return self.table.greedy_policy(f"dch_p{self.player}_l{self.level}")

    def _due(self) -> bool:
        period = self.config.period
        if period is None:
            return self.iteration == 0
        return self.iteration % period == 0

    def check_load(self, store: PolicyStore) -> None:
        for j in range(self.game.num_players):
            if j != self.player:
                snap = store.load(j, self.level, reader=self.ident)
                if snap is not None:
                    self.sigmas[j] = snap.sigma
            for k in range(1, self.level):
                snap = store.load(j, k, reader=self.ident)
                if snap is not None:
                    self.oracles[(j, k)] = snap.policy

    def check_save(self, store: PolicyStore) -> None:
        store.save(self.player, self.level, self.snapshot_policy(), self.solver.sigma)

    def arm_policy(self, player: int, arm: int):
        if arm == 0:
            return self.level0
        if player == self.player and arm == self.level:
            return self.current_policy()
        return self.oracles[(player, arm)]

    def opponent_mixture(self, j: int) -> MixturePolicy:
        """Opponent j's level-k meta-strategy over its levels below k."""
        weights = _renormalized_prefix(self.sigmas[j], self.level)
        return MixturePolicy([self.arm_policy(j, a) for a in range(self.level)], weights)

    def opponents(self) -> list:
        return [None if j == self.player else self.opponent_mixture(j) for j in range(self.game.num_players)]

    def train_episode(self, opponents) -> None:
        rng = self.train_rng
        sampled = [None if opp is None else opp.sample(rng) for opp in opponents]
        eps = self.config.q.epsilon(self.iteration, self.config.steps)
        q_learning_episode(self.game, {self.player: self.table}, sampled, rng, eps, self.config.q)

    def meta_update(self, opponents) -> None:
        sigma = self.solver.sigma.copy()
        arm = sample_index(sigma, self.meta_rng)
        mine = self.arm_policy(self.player, arm)
        if self.config.meta_eval == "exact":
            joint = [as_behavior(opp, self.game, j) if j != self.player else self._exact_view(mine)
                     for j, opp in enumerate(opponents)]
            payoff = float(expected_returns_exact(self.game, joint)[self.player])
        else:
            joint = [mine if j == self.player else opp for j, opp in enumerate(opponents)]
            payoff = float(simulate_episode(self.game, joint, self.meta_rng).returns[self.player])
        self.solver.update(arm, payoff, sigma)
        self.meta_updates += 1

    def _exact_view(self, policy) -> BehaviorPolicy:
        if isinstance(policy, GreedyView):
            return self.snapshot_policy()
        return policy

    def step(self, store: PolicyStore) -> None:
        if self._due():
            self.check_load(store)
            self.check_save(store)
        opponents = self.opponents()
        self.train_episode(opponents)
        self.iteration += 1
        period = self.config.period
        if period is not None and self.iteration % period == 0:
            self.meta_update(opponents)


@dataclass
class DchResult:
    config: DchConfig
    num_players: int
    policies: dict  # (player, level) -> BehaviorPolicy
    sigmas: dict  # (player, level) -> np.ndarray over levels 0..level
    tables: dict  # (player, level) -> QTable
    store: PolicyStore | None = None


def _final(workers, config, n, store) -> DchResult:
    return DchResult(
        config,
        n,
        {w.ident: w.snapshot_policy() for w in workers},
        {w.ident: w.solver.sigma.copy() for w in workers},
        {w.ident: w.table for w in workers},
        store,
    )


def dch_run(game: Game, config: DchConfig, mode: str = "sim", store_dir: str | Path | None = None,
            jobs: int = 1, on_tick=None) -> DchResult:
    """Run all workers for ``config.steps`` iterations each.

    ``mode="sim"`` interleaves workers round-robin (level by level, player by
    player) in one thread and is fully deterministic. ``mode="parallel"``
    runs one process per worker against an on-disk store.
    """
    n = game.num_players
    if mode == "sim":
        store = PolicyStore(n, config.levels, store_dir)
        workers = [DchWorker(game, i, k, config) for k in range(1, config.levels + 1) for i in range(n)]
        # every slot exists before anyone reads
        for w in workers:
            w.check_save(store)
        for t in range(config.steps):
            for w in workers:
                w.step(store)
            if on_tick is not None:
                on_tick(t, store, workers)
        return _final(workers, config, n, store)
    if mode == "parallel":
        return _run_parallel(game, config, store_dir, jobs)
    raise ValueError(f"unknown mode {mode!r}")


def _worker_main(args):
    game, config, player, level, root = args
    store = PolicyStore(game.num_players, config.levels, root)
    worker = DchWorker(game, player, level, config)
    for _ in range(config.steps):
        for attempt in range(10):
            try:
                worker.step(store)
                break
            except (StoreReadError, FileNotFoundError, json.JSONDecodeError):
                time.sleep(0.01 * 2**attempt)
        else:
            raise StoreReadError(f"worker {worker.ident} could not read the store")
    return worker.ident, worker.snapshot_policy(), worker.solver.sigma.copy(), worker.table


def _run_parallel(game, config, store_dir, jobs) -> DchResult:
    from concurrent.futures import ProcessPoolExecutor

    n = game.num_players
    root = Path(store_dir) if store_dir is not None else Path(tempfile.mkdtemp(prefix="dch_store_"))
    store = PolicyStore(n, config.levels, root)
    uniform = uniform_policy()
    for k in range(1, config.levels + 1):
        for i in range(n):
            store.save(i, k, uniform, np.full(k + 1, 1.0 / (k + 1)))
    tasks = [(game, config, i, k, str(root)) for k in range(1, config.levels + 1) for i in range(n)]
    with ProcessPoolExecutor(max_workers=max(1, jobs)) as pool:
        outputs = list(pool.map(_worker_main, tasks))
    return DchResult(
        config,
        n,
        {ident: pol for ident, pol, _, _ in outputs},
        {ident: sig for ident, _, sig, _ in outputs},
        {ident: tab for ident, _, _, tab in outputs},
        store,
    )


def dch_final_policy(result: DchResult, player: int, level: int, mode: str = "mixture"):
    """The level-k policy object: ``mixture`` over levels 0..k or ``top`` only."""
    if not 0 <= level <= result.config.levels:
        raise IndexError(f"level {level} outside 0..{result.config.levels}")
    if level == 0:
        return uniform_policy("level0")
    members = [uniform_policy("level0")] + [result.policies[(player, k)] for k in range(1, level + 1)]
    if mode == "top":
        return members[-1]
    if mode != "mixture":
        raise ValueError(f"unknown mode {mode!r}")
    return MixturePolicy(members, result.sigmas[(player, level)])
