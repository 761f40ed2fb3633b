"""Joint policy correlation: how much independently trained policies lose
when paired with partners from other training runs."""

from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass

import numpy as np

from psrolab.core.game import Game
from psrolab.core.rng import stream
from psrolab.core.simulate import simulate_episode


@dataclass
class JpcMatrix:
    """Cross-play returns over ``d`` instances.

    ``form == "sum"``: a d x d matrix of summed two-player returns, row
    instance in seat 0 and column instance in seat 1. ``form == "general"``:
    an (n, d, ..., d) array, entry ``[i][idx]`` being player i's mean return
    when seat j plays instance ``idx[j]``. ``computed`` marks evaluated cells
    (off-diagonal cells may be sampled rather than enumerated).
    """

    values: np.ndarray
    computed: np.ndarray
    episodes: int
    form: str = "sum"

    @property
    def num_instances(self) -> int:
        return self.computed.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n_axes = self.computed.ndim
        header = [f"instance_p{j}" for j in range(n_axes)]
        if self.form == "sum":
            w.writerow(header + ["return_sum"])
        else:
            w.writerow(header + [f"return_p{i}" for i in range(self.values.shape[0])])
        for idx in itertools.product(range(self.num_instances), repeat=n_axes):
            if not self.computed[idx]:
                continue
            if self.form == "sum":
                w.writerow(list(idx) + [repr(float(self.values[idx]))])
            else:
                w.writerow(list(idx) + [repr(float(self.values[(i,) + idx])) for i in range(self.values.shape[0])])
        return buf.getvalue()


@dataclass
class JpcStats:
    diag_mean: float | np.ndarray
    offdiag_mean: float | np.ndarray
    r_minus: float | np.ndarray

    def to_json(self) -> dict:
        conv = lambda v: v.tolist() if isinstance(v, np.ndarray) else float(v)
        return {"diag_mean": conv(self.diag_mean), "offdiag_mean": conv(self.offdiag_mean), "r_minus": conv(self.r_minus)}


def cell_policies(instances, index) -> list:
    """Seat j takes player j's policy from instance ``index[j]``."""
    if len(index) != len(instances[0]):
        raise ValueError("index needs one instance id per player")
    return [instances[d][j] for j, d in enumerate(index)]


def _is_diagonal(idx) -> bool:
    return len(set(idx)) == 1


def jpc_matrix(
    game: Game,
    instances: list[list],
    episodes: int = 100,
    seed: int = 0,
    form: str | None = None,
    offdiag_samples: int | None = None,
) -> JpcMatrix:
    """Evaluate cross-play over ``instances`` (one policy per player each).

    ``form`` defaults to "sum" for two players and "general" otherwise.
    With ``offdiag_samples`` only that many off-diagonal cells (drawn
    without replacement) are evaluated, plus every diagonal cell.
    """
    d = len(instances)
    n = game.num_players
    if d < 2:
        raise ValueError("need at least two instances")
    if any(len(inst) != n for inst in instances):
        raise ValueError(f"every instance must supply {n} policies")
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    form = form or ("sum" if n == 2 else "general")
    if form == "sum" and n != 2:
        raise ValueError("the summed form is for two players")
    cells = list(itertools.product(range(d), repeat=n))
    if offdiag_samples is not None:
        off = [c for c in cells if not _is_diagonal(c)]
        pick = stream(seed, "jpc-sample").choice(len(off), size=min(offdiag_samples, len(off)), replace=False)
        cells = [c for c in cells if _is_diagonal(c)] + [off[i] for i in sorted(pick)]
    computed = np.zeros((d,) * n, dtype=bool)
    per_player = np.zeros((n,) + (d,) * n)
    for idx in cells:
        rng = stream(seed, "jpc", *idx)
        joint = cell_policies(instances, idx)
        total = np.zeros(n)
        for _ in range(episodes):
            total += simulate_episode(game, joint, rng).returns
        per_player[(slice(None),) + idx] = total / episodes
        computed[idx] = True
    values = per_player.sum(axis=0) if form == "sum" else per_player
    return JpcMatrix(values, computed, episodes, form)


def _stats(diag: np.ndarray, off: np.ndarray):
    dbar = float(np.mean(diag))
    obar = float(np.mean(off))
    if dbar <= 0:
        raise ValueError(f"mean diagonal return {dbar} is not positive; proportional loss is undefined")
    return dbar, obar, (dbar - obar) / dbar


def jpc_stats(matrix: JpcMatrix) -> JpcStats:
    diag_mask = np.zeros_like(matrix.computed)
    for k in range(matrix.num_instances):
        diag_mask[(k,) * matrix.computed.ndim] = True
    if not matrix.computed[diag_mask].all():
        raise ValueError("every diagonal cell must be evaluated")
    off_mask = matrix.computed & ~diag_mask
    if not off_mask.any():
        raise ValueError("no off-diagonal cells evaluated")
    if matrix.form == "sum":
        return JpcStats(*_stats(matrix.values[diag_mask], matrix.values[off_mask]))
    parts = [_stats(v[diag_mask], v[off_mask]) for v in matrix.values]
    return JpcStats(*(np.array(col) for col in zip(*parts)))


def proportional_loss(diag_mean: float, offdiag_mean: float) -> float:
    return _stats(np.array([diag_mean]), np.array([offdiag_mean]))[2]


def jpc_summary_json(stats: JpcStats, **extra) -> str:
    return json.dumps({**stats.to_json(), **extra}, indent=1, sort_keys=True)
