"""Empirical payoff tensors over joint policy choices."""

from __future__ import annotations

import itertools
import json
from pathlib import Path

import numpy as np

TENSOR_FORMAT_VERSION = 1


class MissingEntries(LookupError):
    pass


class EmpiricalPayoffTensor:
    """Per-player payoff tensors with explicit missing cells.

    ``values[i][idx]`` is player i's payoff for joint index ``idx``; a cell is
    meaningful only where ``filled[idx]`` is set. Unsimulated cells are never
    encoded as NaN or zero.
    """

    def __init__(self, shape: tuple[int, ...]):
        self.num_players = len(shape)
        self.values = np.zeros((self.num_players, *shape))
        self.counts = np.zeros(shape, dtype=np.int64)
        self.filled = np.zeros(shape, dtype=bool)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.filled.shape

    def grow(self, player: int, extra: int = 1) -> None:
        """Append ``extra`` empty slices along ``player``'s axis."""
        pad = [(0, 0)] * self.num_players
        pad[player] = (0, extra)
        self.values = np.pad(self.values, [(0, 0)] + pad)
        self.counts = np.pad(self.counts, pad)
        self.filled = np.pad(self.filled, pad)

    def set(self, index: tuple[int, ...], payoffs, count: int = 1) -> None:
        self.values[(slice(None),) + tuple(index)] = payoffs
        self.counts[tuple(index)] = count
        self.filled[tuple(index)] = True

    def get(self, index: tuple[int, ...]) -> np.ndarray | None:
        if not self.filled[tuple(index)]:
            return None
        return self.values[(slice(None),) + tuple(index)].copy()

    def missing(self) -> list[tuple[int, ...]]:
        return [tuple(int(i) for i in idx) for idx in np.argwhere(~self.filled)]

    def is_zero_sum(self, atol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.values.sum(axis=0))[self.filled] <= atol))

    # -- serialization --------------------------------------------------------------

    def to_json(self) -> dict:
        flat_filled = self.filled.ravel()
        return {
            "format": "payoff_tensor",
            "version": TENSOR_FORMAT_VERSION,
            "shape": list(self.shape),
            "values": [
                [float(v) if f else None for v, f in zip(self.values[i].ravel(), flat_filled)]
                for i in range(self.num_players)
            ],
            "counts": [int(c) for c in self.counts.ravel()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "EmpiricalPayoffTensor":
        if data.get("format") != "payoff_tensor" or data.get("version") != TENSOR_FORMAT_VERSION:
            raise ValueError("not a supported payoff tensor document")
        shape = tuple(data["shape"])
        out = cls(shape)
        rows = data["values"]
        present = np.array([v is not None for v in rows[0]], dtype=bool)
        for i, row in enumerate(rows):
            if any((v is not None) != p for v, p in zip(row, present)):
                raise ValueError("cell present for some players but not others")
            out.values[i] = np.array([0.0 if v is None else v for v in row]).reshape(shape)
        out.filled = present.reshape(shape)
        out.counts = np.asarray(data["counts"], dtype=np.int64).reshape(shape)
        return out

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path: str | Path) -> "EmpiricalPayoffTensor":
        return cls.from_json(json.loads(Path(path).read_text()))


def _check_support(U: EmpiricalPayoffTensor, sigmas) -> None:
    if len(sigmas) != U.num_players:
        raise ValueError("one meta-strategy per player required")
    for i, s in enumerate(sigmas):
        if len(s) != U.shape[i]:
            raise ValueError(f"player {i}: meta-strategy length {len(s)} != {U.shape[i]} policies")
    if U.filled.all():
        return
    support = [np.flatnonzero(np.asarray(s) > 0) for s in sigmas]
    holes = [idx for idx in itertools.product(*support) if not U.filled[idx]]
    if holes:
        raise MissingEntries(f"missing payoff cells with positive probability: {holes[:10]}")


def _contract(tensor: np.ndarray, sigmas, skip: int | None = None) -> np.ndarray:
    # contract from the last axis down so earlier axis numbers stay valid
    out = tensor
    for j in reversed(range(len(sigmas))):
        if j == skip:
            continue
        out = np.tensordot(out, np.asarray(sigmas[j], dtype=float), axes=([j], [0]))
    return out


def meta_payoff(U: EmpiricalPayoffTensor, sigmas) -> np.ndarray:
    """Expected payoff of every player when each samples from its meta-strategy."""
    _check_support(U, sigmas)
    vals = np.where(U.filled, U.values, 0.0)
    return np.array([float(_contract(vals[i], sigmas)) for i in range(U.num_players)])


def deviation_payoffs(U: EmpiricalPayoffTensor, sigmas, player: int) -> np.ndarray:
    """``player``'s payoff for each of its policies against the others' mixtures."""
    probe = list(sigmas)
    probe[player] = np.ones(U.shape[player])
    _check_support(U, probe)
    vals = np.where(U.filled, U.values[player], 0.0)
    reduced = _contract(vals, sigmas, skip=player)
    return np.asarray(reduced, dtype=float)


def deviation_payoff(U: EmpiricalPayoffTensor, sigmas, player: int, arm: int) -> float:
    one_hot = np.zeros(U.shape[player])
    one_hot[arm] = 1.0
    probe = list(sigmas)
    probe[player] = one_hot
    return float(meta_payoff(U, probe)[player])
