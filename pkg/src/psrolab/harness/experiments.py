"""Experiment runners: one function per config kind.

Each runner takes a validated :class:`ExperimentConfig` and an output
directory, writes its artifacts, and returns the metrics rows
``(step, metric, value, stderr)`` that become ``metrics.csv``.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from psrolab.cfr import average_profile, cfr_average_strategy, cfr_iterate, new_cfr_state
from psrolab.core.policy import BehaviorPolicy, uniform_policy
from psrolab.core.rng import child_seed
from psrolab.core.tree import TreeTooLarge
from psrolab.dch import DchConfig, dch_final_policy, dch_run
from psrolab.eval.jpc import jpc_matrix, jpc_stats
from psrolab.eval.nashconv import nashconv, nashconv_profile
from psrolab.eval.tournament import evaluate_vs_fixed
from psrolab.games.registry import make_game
from psrolab.harness.config import ExperimentConfig
from psrolab.metasolvers.full import ExplorationParams
from psrolab.oracles.purify import purify
from psrolab.oracles.qlearning import QParams, train_independent_learners
from psrolab.psro import PsroConfig, make_preset, metrics_rows, psro_run, write_run


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def dch_config(params: dict, seed: int) -> DchConfig:
    fields = {k: v for k, v in params.items() if k != "mode"}
    if "q" in fields:
        fields["q"] = QParams(**fields["q"])
    return DchConfig(seed=seed, **fields)


# -- psro ---------------------------------------------------------------------


def run_psro(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> list[tuple]:
    params = dict(cfg.params)
    game = make_game(cfg.game)
    if "preset" in params:
        params.update(make_preset(params.pop("preset"), game.num_players))
    if "q" in params:
        params["q"] = QParams(**params["q"])
    if "exploration" in params:
        params["exploration"] = ExplorationParams(**params["exploration"])
    run = psro_run(PsroConfig(game=cfg.game, seed=cfg.seed, **params), game)
    write_run(run, out)
    return metrics_rows(run)


# -- dch ----------------------------------------------------------------------


def run_dch(cfg: ExperimentConfig, out: Path, jobs: int = 1, mode: str | None = None) -> list[tuple]:
    game = make_game(cfg.game)
    config = dch_config(cfg.params, cfg.seed)
    mode = mode or cfg.params.get("mode", "sim")
    every = cfg.eval.get("every", 0)
    want_nashconv = cfg.eval.get("nashconv", False)
    rows = []

    def tick(t, store, workers):
        step = t + 1
        if not every or step % every:
            return
        for w in workers:
            for a, s in enumerate(w.solver.sigma):
                rows.append((step, f"sigma_p{w.player}_l{w.level}_a{a}", float(s), ""))

    if mode == "parallel" and every:
        raise ValueError("eval.every needs the sim mode; parallel workers report only final results")
    result = dch_run(game, config, mode=mode, store_dir=out / "store", jobs=jobs, on_tick=tick)
    n = game.num_players
    for (p, k), pol in sorted(result.policies.items()):
        pol.save(out / "policies" / f"dch_p{p}_l{k}.json")
        _write_json(out / "sigmas" / f"sigma_p{p}_l{k}.json", {"player": p, "level": k, "sigma": result.sigmas[(p, k)].tolist()})
    if want_nashconv:
        for k in range(1, config.levels + 1):
            joint = [dch_final_policy(result, p, k) for p in range(n)]
            try:
                total, _ = nashconv(game, joint)
            except TreeTooLarge:
                continue
            rows.append((config.steps, f"nashconv_l{k}", total, ""))
    return rows


# -- jpc ----------------------------------------------------------------------


def _train_instance(args):
    game, spec, seed, policy_mode = args
    if spec["kind"] == "inrl":
        q = QParams(**spec.get("q", {}))
        reports = train_independent_learners(game, spec.get("episodes", 5000), q, np.random.default_rng(seed))
        return [r.policy for r in reports]
    body = {k: v for k, v in spec.items() if k != "kind"}
    config = dch_config(body, seed)
    result = dch_run(game, config)
    return [dch_final_policy(result, p, config.levels, policy_mode) for p in range(game.num_players)]


def train_instances(game, spec: dict, instances: int, seed: int, policy_mode: str = "mixture", jobs: int = 1) -> list:
    """Independently seeded training runs of one algorithm; one policy per seat each."""
    tasks = [(game, spec, child_seed(seed, "instance", d), policy_mode) for d in range(instances)]
    if jobs <= 1:
        return [_train_instance(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_train_instance, tasks))


def jpc_study(game, algorithms: dict, instances: int = 5, episodes_per_cell: int = 100, seed: int = 0,
              policy_mode: str = "mixture", jobs: int = 1) -> dict:
    """Train ``instances`` runs per algorithm and measure cross-play; name -> (matrix, stats)."""
    out = {}
    for name in sorted(algorithms):
        alg_seed = child_seed(seed, "algorithm", name)
        pols = train_instances(game, algorithms[name], instances, alg_seed, policy_mode, jobs)
        matrix = jpc_matrix(game, pols, episodes_per_cell, child_seed(alg_seed, "jpc"))
        out[name] = (matrix, jpc_stats(matrix))
    return out


def run_jpc(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> list[tuple]:
    game = make_game(cfg.game)
    p = cfg.params
    studies = p.get("studies", 1)
    rows = []
    summary = {"studies": []}
    for s in range(studies):
        results = jpc_study(
            game, p["algorithms"], p.get("instances", 5), p.get("episodes_per_cell", 100),
            child_seed(cfg.seed, "study", s), p.get("policy", "mixture"), jobs,
        )
        entry = {}
        for name, (matrix, stats) in results.items():
            (out / f"jpc_{name}_study{s}.csv").write_text(matrix.to_csv())
            entry[name] = stats.to_json()
            for metric, value in stats.to_json().items():
                if isinstance(value, list):
                    for i, v in enumerate(value):
                        rows.append((s, f"{name}_{metric}_p{i}", v, ""))
                else:
                    rows.append((s, f"{name}_{metric}", value, ""))
        summary["studies"].append(entry)
    _write_json(out / "jpc_summary.json", summary)
    return rows


# -- cfr ----------------------------------------------------------------------


def run_cfr(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> list[tuple]:
    game = make_game(cfg.game)
    iterations = cfg.params.get("iterations", 500)
    every = cfg.params.get("record_every", 0)
    state = new_cfr_state(game)
    rows = []
    for _ in range(iterations):
        cfr_iterate(state)
        if every and (state.iteration % every == 0 or state.iteration == iterations):
            total, _ = nashconv_profile(state.tree, average_profile(state))
            rows.append((state.iteration, "nashconv", total, ""))
    if not every:
        total, _ = nashconv_profile(state.tree, average_profile(state))
        rows.append((state.iteration, "nashconv", total, ""))
    bots = cfr_average_strategy(state)
    save_bots(bots, out / "policies", iterations)
    return rows


def save_bots(bots: list[BehaviorPolicy], directory: Path, iterations: int) -> list[Path]:
    """Write cfrN and its purified cfrNpure, one file per seat."""
    paths = []
    for p, bot in enumerate(bots):
        pure = purify(bot)
        pure.name = f"cfr{iterations}pure_p{p}"
        for pol, tag in ((bot, f"cfr{iterations}"), (pure, f"cfr{iterations}pure")):
            path = directory / f"{tag}_p{p}.json"
            pol.save(path)
            paths.append(path)
    return paths


# -- tournament ---------------------------------------------------------------


def resolve_policy(ref: dict, game, seat: int, base_dir: Path | None = None, cache: dict | None = None):
    """Turn a config policy reference into a policy object for ``seat``."""
    if "uniform" in ref:
        pol = uniform_policy()
    elif "file" in ref:
        path = Path(ref["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        pol = BehaviorPolicy.load(path)
    else:
        iterations = ref["cfr"]
        cache = cache if cache is not None else {}
        if iterations not in cache:
            state = new_cfr_state(game)
            for _ in range(iterations):
                cfr_iterate(state)
            cache[iterations] = cfr_average_strategy(state)
        pol = cache[iterations][seat]
    return purify(pol) if ref.get("pure") else pol


def run_tournament(cfg: ExperimentConfig, out: Path, jobs: int = 1, base_dir: Path | None = None) -> list[tuple]:
    game = make_game(cfg.game)
    n = game.num_players
    p = cfg.params
    if len(p["policy"]) != n or len(p["opponents"]) != n:
        raise ValueError(f"policy and opponents need {n} entries, one per seat")
    cache = {}
    mine = [resolve_policy(r, game, s, base_dir, cache) for s, r in enumerate(p["policy"])]
    theirs = [resolve_policy(r, game, s, base_dir, cache) for s, r in enumerate(p["opponents"])]
    res = evaluate_vs_fixed(game, mine, theirs, p.get("episodes", 1000), cfg.seed)
    rows = [(0, "mean_return", res.mean, res.stderr)]
    rows += [(0, f"return_seat{s}", v, "") for s, v in enumerate(res.per_seat)]
    return rows


RUNNERS = {
    "psro": run_psro,
    "dch": run_dch,
    "jpc": run_jpc,
    "cfr": run_cfr,
    "tournament": run_tournament,
}
