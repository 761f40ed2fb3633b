"""Running configured experiments and comparing finished runs."""

from __future__ import annotations

import datetime as _dt
import json
import os
import platform
from pathlib import Path

import numpy as np

import psrolab
from psrolab.eval.curves import DEFAULT_WINDOW, format_metrics, mauc, read_metrics
from psrolab.harness.config import ExperimentConfig, load_config
from psrolab.harness.experiments import RUNNERS

OUT_ENV = "PSROLAB_OUT"


def resolve_out(cfg: ExperimentConfig, out: str | Path | None = None) -> Path:
    """--out beats the environment variable, which beats the config's ``out``."""
    if out is not None:
        return Path(out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    if cfg.out:
        return Path(cfg.out)
    return Path("runs") / f"{cfg.kind}-{cfg.digest()[:10]}"


def manifest(cfg: ExperimentConfig, files: list[str]) -> dict:
    return {
        "schema": cfg.schema,
        "kind": cfg.kind,
        "seed": cfg.seed,
        "config_sha256": cfg.digest(),
        "versions": {
            "psrolab": psrolab.__version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "artifacts": sorted(files),
    }


def run_experiment(
    config: str | Path | ExperimentConfig,
    out: str | Path | None = None,
    seed: int | None = None,
    jobs: int = 1,
    dch_mode: str | None = None,
) -> Path:
    """Execute one experiment and write its artifacts; returns the run directory.

    Everything but ``manifest.json`` (which carries the timestamp) is a pure
    function of the config and seed.
    """
    cfg = config if isinstance(config, ExperimentConfig) else load_config(config)
    base_dir = None if isinstance(config, ExperimentConfig) else Path(config).resolve().parent
    if seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "seed": seed})
    run_dir = resolve_out(cfg, out)
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(json.dumps(cfg.to_dict(), indent=1, sort_keys=True) + "\n")
    runner = RUNNERS[cfg.kind]
    if cfg.kind == "dch":
        rows = runner(cfg, run_dir, jobs, dch_mode)
    elif cfg.kind == "tournament":
        rows = runner(cfg, run_dir, jobs, base_dir)
    else:
        rows = runner(cfg, run_dir, jobs)
    (run_dir / "metrics.csv").write_text(format_metrics(rows))
    files = [str(p.relative_to(run_dir)) for p in run_dir.rglob("*") if p.is_file() and p.name != "manifest.json"]
    (run_dir / "manifest.json").write_text(json.dumps(manifest(cfg, files), indent=1, sort_keys=True) + "\n")
    return run_dir


def compare_runs(run_dirs, window: int = DEFAULT_WINDOW, metrics=None, stat: str = "mauc") -> tuple[list[str], list[list]]:
    """Align runs on their shared metrics; one row per run.

    ``stat`` is ``mauc`` (mean area under the last ``window`` values) or
    ``last``. Raises if the runs share no metric.
    """
    if stat not in ("mauc", "last"):
        raise ValueError(f"unknown statistic {stat!r}")
    series = [read_metrics(Path(d) / "metrics.csv") for d in run_dirs]
    shared = set.intersection(*(set(s) for s in series)) if series else set()
    if metrics:
        missing = [m for m in metrics if m not in shared]
        if missing:
            raise ValueError(f"metrics not present in every run: {missing}")
        names = list(metrics)
    else:
        names = sorted(shared)
    if not names:
        raise ValueError("the runs share no metrics")
    header = ["run"] + names
    rows = []
    for d, s in zip(run_dirs, series):
        row = [str(d)]
        for m in names:
            values = [v for _, v in s[m]]
            row.append(mauc(values, window) if stat == "mauc" else values[-1])
        rows.append(row)
    return header, rows


def render_table(header, rows, fmt: str = "csv") -> str:
    cells = [[c if isinstance(c, str) else f"{c:.6g}" for c in row] for row in rows]
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(r) + " |" for r in cells]
        return "\n".join(lines) + "\n"
    return "\n".join(",".join(r) for r in [header] + cells) + "\n"
