"""Command line: ``psrolab run|compare|eval|cfr-bots``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from psrolab.core.policy import BehaviorPolicy
from psrolab.core.tree import TreeTooLarge
from psrolab.harness.config import ConfigError


def _game_spec(text: str) -> dict:
    text = text.strip()
    if text.startswith("{"):
        return json.loads(text)
    return {"name": text}


def _cmd_run(args) -> int:
    from psrolab.harness.runs import run_experiment

    try:
        run_dir = run_experiment(args.config, args.out, args.seed, args.jobs, args.dch_mode)
    except ConfigError as exc:
        print(f"invalid config {args.config}:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  {problem}", file=sys.stderr)
        return exc.exit_code
    print(run_dir)
    return 0


def _cmd_compare(args) -> int:
    from psrolab.harness.runs import compare_runs, render_table

    try:
        header, rows = compare_runs(args.runs, args.window, args.metric, args.stat)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(render_table(header, rows, args.format))
    return 0


def _cmd_eval(args) -> int:
    from psrolab.core.simulate import expected_returns_exact
    from psrolab.eval.nashconv import nashconv
    from psrolab.eval.tournament import evaluate_vs_fixed
    from psrolab.games.registry import make_game

    game = make_game(_game_spec(args.game))
    policies = [BehaviorPolicy.load(p) for p in args.policies]
    if len(policies) != game.num_players:
        print(f"error: need {game.num_players} policy files, one per seat", file=sys.stderr)
        return 1
    report = {}
    try:
        report["expected_returns"] = [float(v) for v in expected_returns_exact(game, policies)]
        total, gains = nashconv(game, policies)
        report["nashconv"] = total
        report["nashconv_per_player"] = [float(g) for g in gains]
    except TreeTooLarge:
        report["note"] = "game too large to enumerate; exact metrics skipped"
    if args.opponents:
        opponents = [BehaviorPolicy.load(p) for p in args.opponents]
        res = evaluate_vs_fixed(game, policies, opponents, args.episodes, args.seed)
        report["vs_opponents"] = {"mean": res.mean, "stderr": res.stderr, "per_seat": res.per_seat}
    print(json.dumps(report, indent=1, sort_keys=True))
    return 0


def _cmd_cfr_bots(args) -> int:
    from psrolab.cfr import cfr_average_strategy, cfr_iterate, new_cfr_state
    from psrolab.games.registry import make_game
    from psrolab.harness.experiments import save_bots

    if args.iterations < 1:
        print("error: --iterations must be >= 1", file=sys.stderr)
        return 1
    state = new_cfr_state(make_game(_game_spec(args.game)))
    for _ in range(args.iterations):
        cfr_iterate(state)
    for path in save_bots(cfr_average_strategy(state), Path(args.out), args.iterations):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psrolab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("--config", required=True, help="experiment config (JSON)")
    run.add_argument("--seed", type=int, default=None, help="override the config's root seed")
    run.add_argument("--jobs", type=int, default=1, help="worker processes for independent sub-runs")
    run.add_argument("--out", default=None, help="output directory (overrides $PSROLAB_OUT and the config)")
    run.add_argument("--dch-mode", choices=("sim", "parallel"), default=None, help="DCH execution mode")
    run.set_defaults(func=_cmd_run)

    cmp_ = sub.add_parser("compare", help="tabulate shared metrics across run directories")
    cmp_.add_argument("runs", nargs="+")
    cmp_.add_argument("--metric", action="append", default=None, help="restrict to this metric (repeatable)")
    cmp_.add_argument("--window", type=int, default=32, help="MAUC window (last W values)")
    cmp_.add_argument("--stat", choices=("mauc", "last"), default="mauc")
    cmp_.add_argument("--format", choices=("csv", "markdown"), default="csv")
    cmp_.set_defaults(func=_cmd_compare)

    ev = sub.add_parser("eval", help="exact values and NashConv of saved policies")
    ev.add_argument("--game", required=True, help="game name or JSON spec")
    ev.add_argument("--policies", nargs="+", required=True, help="one policy JSON per seat")
    ev.add_argument("--opponents", nargs="+", default=None, help="fixed opponents, one per seat")
    ev.add_argument("--episodes", type=int, default=1000)
    ev.add_argument("--seed", type=int, default=0)
    ev.set_defaults(func=_cmd_eval)

    bots = sub.add_parser("cfr-bots", help="CFR average strategies and their purified versions")
    bots.add_argument("--game", default="leduc", help="game name or JSON spec")
    bots.add_argument("--iterations", type=int, default=500)
    bots.add_argument("--out", default="bots")
    bots.set_defaults(func=_cmd_cfr_bots)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
