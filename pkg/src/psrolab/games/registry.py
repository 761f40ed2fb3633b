"""Build games from plain config dictionaries."""

from __future__ import annotations

from pathlib import Path

from psrolab.core.game import Game
from psrolab.games import gridworld
from psrolab.games.kuhn import make_kuhn
from psrolab.games.leduc import LeducSpec, make_leduc
from psrolab.games.matrix import PRESETS, MatrixGameSpec, make_matrix_game

MAP_DIR = Path(__file__).parent / "maps"
BUILTIN_MAPS = {
    "tiny_laser_tag": gridworld.SMALL_LASER_TAG,
    "tiny_pathfind": gridworld.SMALL_PATHFIND,
    "tiny_gathering": gridworld.SMALL_GATHERING,
}


def resolve_map(spec: dict) -> tuple[str, ...]:
    if "ascii" in spec:
        return gridworld.parse_map("\n".join(spec["ascii"]) if isinstance(spec["ascii"], list) else spec["ascii"])
    if "map_file" in spec:
        return gridworld.load_map(spec["map_file"])
    name = spec.get("map", "small2")
    if name in BUILTIN_MAPS:
        return BUILTIN_MAPS[name]
    path = MAP_DIR / f"{name}.txt"
    if not path.exists():
        raise ValueError(f"unknown map {name!r}")
    return gridworld.load_map(path)


def make_game(spec: dict) -> Game:
    """``spec["name"]`` picks the family; remaining keys are its parameters."""
    spec = dict(spec)
    name = spec.pop("name", None)
    if name == "kuhn":
        return make_kuhn(spec.get("num_players", 2))
    if name == "leduc":
        fields = {k: tuple(v) if isinstance(v, list) else v for k, v in spec.items()}
        return make_leduc(LeducSpec(**fields))
    if name == "matrix":
        if "preset" in spec:
            if spec["preset"] not in PRESETS:
                raise ValueError(f"unknown matrix preset {spec['preset']!r}")
            return make_matrix_game(PRESETS[spec["preset"]])
        return make_matrix_game(MatrixGameSpec(
            tuple(map(tuple, spec["row_payoffs"])), tuple(map(tuple, spec["col_payoffs"])), spec.get("label", "matrix")
        ))
    if name == "gridworld":
        ascii_map = resolve_map(spec)
        return gridworld.make_gridworld(gridworld.GridworldSpec(
            ascii_map,
            spec.get("variant", "laser_tag"),
            spec.get("horizon", 50),
            tuple(spec.get("view", (5, 2, 1))),
            spec.get("refresh_steps", 20),
            spec.get("start_orientation"),
            spec.get("map", "gridworld"),
        ))
    raise ValueError(f"unknown game {name!r}")
