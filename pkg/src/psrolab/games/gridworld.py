"""First-person gridworld games: laser tag, gathering and pathfind.

Maps use the symbols ``P`` (spawn for anyone), ``0``/``1`` (player-specific
spawns), ``*`` (wall), ``F`` (apple), ``@``/``#`` (goals of players 0 and 1).
Anything off the map counts as wall.

Each step both players pick an action without seeing the other's pick; a
chance node then draws the order in which the actions resolve. Agents observe
a symbolic egocentric window (``front`` cells ahead, ``side`` cells to each
side, ``behind`` cells back), not pixels.

Laser tag: a beam runs from the shooter in its facing direction and stops at
the first wall or agent. A second hit sends the target back to a spawn point
(drawn by a chance node at the end of the step) and pays the shooter 1. An
agent that gets sent back does not resolve its own action that step.
Gathering: stepping onto an apple pays 1; the apple regrows after
``refresh_steps`` steps. Pathfind: both players receive 1 and the episode
ends once both stand on their own goals.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from psrolab.core.game import CHANCE, TERMINAL, Game, State

FORWARD, BACK, STEP_LEFT, STEP_RIGHT, TURN_LEFT, TURN_RIGHT, FIRE, NOOP = range(8)
ACTION_NAMES = ("forward", "back", "step_left", "step_right", "turn_left", "turn_right", "fire", "noop")
# north, east, south, west
_DIRS = ((-1, 0), (0, 1), (1, 0), (0, -1))
_MAP_SYMBOLS = set(" P01*F@#")


class Variant(str, enum.Enum):
    LASER_TAG = "laser_tag"
    GATHERING = "gathering"
    PATHFIND = "pathfind"


@dataclass(frozen=True)
class GridworldSpec:
    ascii_map: tuple[str, ...]
    variant: Variant = Variant.LASER_TAG
    horizon: int = 50
    view: tuple[int, int, int] = (5, 2, 1)
    refresh_steps: int = 20
    # None draws the starting orientation at random with the spawn points
    start_orientation: int | None = None
    name: str = "gridworld"

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "ascii_map", tuple(self.ascii_map))
        object.__setattr__(self, "view", tuple(self.view))


def load_map(path: str | Path) -> tuple[str, ...]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return parse_map("\n".join(lines))


def parse_map(text: str) -> tuple[str, ...]:
    """Accept a bare map or one drawn inside a ``+---+`` / ``|...|`` frame."""
    rows = [line for line in text.splitlines() if line.strip("\n") != ""]
    if rows and set(rows[0].strip()) <= set("+-"):
        rows = [r.strip()[1:-1] for r in rows[1:-1]]
    return tuple(rows)


@dataclass
class _Layout:
    rows: int
    cols: int
    walls: frozenset
    spawns: list  # per player, list of cells
    apples: tuple
    goals: list  # per player, frozenset of cells


class GridState(State):
    __slots__ = (
        "game", "phase", "t", "pos", "ori", "hits", "apples", "pending",
        "ret", "last", "respawn", "done",
    )

    # phases
    SPAWN, DECIDE, ORDER, RESPAWN, END = range(5)

    def _copy(self) -> "GridState":
        s = GridState.__new__(GridState)
        s.game = self.game
        s.phase = self.phase
        s.t = self.t
        s.pos = self.pos
        s.ori = self.ori
        s.hits = self.hits
        s.apples = self.apples
        s.pending = self.pending
        s.ret = self.ret
        s.last = None
        s.respawn = self.respawn
        s.done = self.done
        return s

    def current_player(self) -> int:
        if self.phase == GridState.DECIDE:
            return len(self.pending)
        if self.phase == GridState.END:
            return TERMINAL
        return CHANCE

    def legal_actions(self) -> list[int]:
        if self.phase == GridState.DECIDE:
            return list(range(8))
        if self.phase == GridState.END:
            return []
        return [a for a, _ in self.chance_outcomes()]

    def chance_outcomes(self) -> list[tuple[int, float]]:
        g = self.game
        if self.phase == GridState.SPAWN:
            k = len(g.start_options)
            return [(i, 1.0 / k) for i in range(k)]
        if self.phase == GridState.ORDER:
            k = len(g.orders)
            return [(i, 1.0 / k) for i in range(k)]
        if self.phase == GridState.RESPAWN:
            free = self._free_spawns(self.respawn[0])
            return [(i, 1.0 / len(free)) for i in range(len(free))]
        raise ValueError("not a chance node")

    def _free_spawns(self, player: int) -> list:
        occupied = set(p for j, p in enumerate(self.pos) if j != player and p is not None)
        free = [c for c in self.game.layout.spawns[player] if c not in occupied]
        return free or list(self.game.layout.spawns[player])

    def child(self, action: int) -> "GridState":
        g = self.game
        s = self._copy()
        if self.phase == GridState.SPAWN:
            s.pos, s.ori = g.start_options[action]
            s.phase = GridState.DECIDE
            s.pending = ()
        elif self.phase == GridState.DECIDE:
            s.pending = self.pending + (action,)
            if len(s.pending) == g.num_players:
                s.phase = GridState.ORDER
        elif self.phase == GridState.ORDER:
            g._resolve(s, g.orders[action])
        elif self.phase == GridState.RESPAWN:
            player = self.respawn[0]
            cell = self._free_spawns(player)[action]
            pos = list(s.pos)
            pos[player] = cell
            s.pos = tuple(pos)
            s.respawn = self.respawn[1:]
            g._finish_step(s)
        else:
            raise ValueError("terminal state has no children")
        return s

    def returns(self) -> np.ndarray:
        return np.array(self.ret, dtype=float)

    def rewards(self) -> np.ndarray:
        if self.last is None:
            return np.zeros(self.game.num_players)
        return np.array(self.last, dtype=float)

    def information_state_key(self, player: int) -> str:
        return self.game.observe(self, player)


class Gridworld(Game):
    num_players = 2
    num_distinct_actions = 8

    def __init__(self, spec: GridworldSpec):
        self.spec = spec
        self.variant = spec.variant
        self.name = spec.name
        self.zero_sum = False
        self.layout = self._parse(spec)
        self.orders = list(itertools.permutations(range(self.num_players)))
        oris = range(4) if spec.start_orientation is None else [spec.start_orientation]
        starts = []
        for cells in itertools.product(*self.layout.spawns):
            if len(set(cells)) < len(cells):
                continue
            for o in itertools.product(oris, repeat=self.num_players):
                starts.append((tuple(cells), tuple(o)))
        self.start_options = starts
        self._view_cache: dict = {}

    @staticmethod
    def _parse(spec: GridworldSpec) -> _Layout:
        rows = spec.ascii_map
        if not rows or len(set(len(r) for r in rows)) != 1:
            raise ValueError("map must be a non-empty rectangle")
        bad = set("".join(rows)) - _MAP_SYMBOLS
        if bad:
            raise ValueError(f"unknown map symbols: {sorted(bad)}")
        if spec.horizon < 1:
            raise ValueError("horizon must be >= 1")
        walls, shared, own, apples, goals = set(), [], [[], []], [], [set(), set()]
        for r, line in enumerate(rows):
            for c, ch in enumerate(line):
                cell = (r, c)
                if ch == "*":
                    walls.add(cell)
                elif ch == "P":
                    shared.append(cell)
                elif ch in "01":
                    own[int(ch)].append(cell)
                elif ch == "F":
                    apples.append(cell)
                elif ch == "@":
                    goals[0].add(cell)
                elif ch == "#":
                    goals[1].add(cell)
        spawns = [own[i] + shared for i in range(2)]
        if any(not s for s in spawns) or len(set(spawns[0]) | set(spawns[1])) < 2:
            raise ValueError("map needs spawn points for both players")
        if spec.variant is Variant.PATHFIND and (not goals[0] or not goals[1]):
            raise ValueError("pathfind maps need '@' and '#' goals")
        if spec.variant is Variant.GATHERING and not apples:
            raise ValueError("gathering maps need apples ('F')")
        return _Layout(len(rows), len(rows[0]), frozenset(walls), spawns, tuple(apples), [frozenset(g) for g in goals])

    def new_initial_state(self) -> GridState:
        s = GridState.__new__(GridState)
        s.game = self
        s.phase = GridState.SPAWN
        s.t = 0
        s.pos = (None,) * self.num_players
        s.ori = (0,) * self.num_players
        s.hits = (0,) * self.num_players
        s.apples = (0,) * len(self.layout.apples)
        s.pending = ()
        s.ret = (0.0,) * self.num_players
        s.last = None
        s.respawn = ()
        s.done = False
        return s

    def action_names(self):
        return ACTION_NAMES

    # -- dynamics -----------------------------------------------------------------

    def _blocked(self, cell) -> bool:
        r, c = cell
        lay = self.layout
        return r < 0 or c < 0 or r >= lay.rows or c >= lay.cols or cell in lay.walls

    def _resolve(self, s: GridState, order) -> None:
        n = self.num_players
        pos = list(s.pos)
        ori = list(s.ori)
        hits = list(s.hits)
        apples = [max(0, a - 1) for a in s.apples]
        reward = [0.0] * n
        removed: list[int] = []
        for p in order:
            if p in removed:
                continue
            a = s.pending[p]
            if a <= STEP_RIGHT:
                d = ori[p] if a == FORWARD else (ori[p] + (2, 2, 3, 1)[a]) % 4
                dr, dc = _DIRS[d]
                target = (pos[p][0] + dr, pos[p][1] + dc)
                if not self._blocked(target) and target not in pos:
                    pos[p] = target
                    if self.variant is Variant.GATHERING:
                        for k, cell in enumerate(self.layout.apples):
                            if cell == target and apples[k] == 0:
                                apples[k] = self.spec.refresh_steps
                                reward[p] += 1.0
            elif a == TURN_LEFT:
                ori[p] = (ori[p] - 1) % 4
            elif a == TURN_RIGHT:
                ori[p] = (ori[p] + 1) % 4
            elif a == FIRE and self.variant is Variant.LASER_TAG:
                dr, dc = _DIRS[ori[p]]
                cell = (pos[p][0] + dr, pos[p][1] + dc)
                while not self._blocked(cell):
                    if cell in pos:
                        q = pos.index(cell)
                        hits[q] += 1
                        if hits[q] >= 2:
                            hits[q] = 0
                            reward[p] += 1.0
                            pos[q] = None
                            removed.append(q)
                        break
                    cell = (cell[0] + dr, cell[1] + dc)
        s.pos = tuple(pos)
        s.ori = tuple(ori)
        s.hits = tuple(hits)
        s.apples = tuple(apples)
        s.pending = ()
        s.last = tuple(reward)
        s.ret = tuple(a + b for a, b in zip(s.ret, reward))
        s.respawn = tuple(removed)
        if removed:
            s.phase = GridState.RESPAWN
        else:
            self._finish_step(s)

    def _finish_step(self, s: GridState) -> None:
        if s.respawn:
            s.phase = GridState.RESPAWN
            return
        s.t += 1
        if self.variant is Variant.PATHFIND and all(
            s.pos[p] in self.layout.goals[p] for p in range(self.num_players)
        ):
            bonus = tuple(1.0 for _ in range(self.num_players))
            s.last = tuple(a + b for a, b in zip(s.last or (0.0,) * self.num_players, bonus))
            s.ret = tuple(a + b for a, b in zip(s.ret, bonus))
            s.phase = GridState.END
        elif s.t >= self.spec.horizon:
            s.phase = GridState.END
        else:
            s.phase = GridState.DECIDE

    # -- observations -------------------------------------------------------------

    def _static_view(self, cell, ori, player):
        key = (cell, ori, player)
        hit = self._view_cache.get(key)
        if hit is not None:
            return hit
        front, side, behind = self.spec.view
        fr, fc = _DIRS[ori]
        rr, rc = _DIRS[(ori + 1) % 4]
        cells, chars = [], []
        for ahead in range(front, -behind - 1, -1):
            for lateral in range(-side, side + 1):
                c = (cell[0] + fr * ahead + rr * lateral, cell[1] + fc * ahead + rc * lateral)
                cells.append(c)
                if ahead == 0 and lateral == 0:
                    ch = "o"
                    if c in self.layout.goals[player]:
                        ch = "G"
                elif self._blocked(c):
                    ch = "*"
                elif c in self.layout.goals[player]:
                    ch = "G"
                elif c in self.layout.goals[1 - player]:
                    ch = "g"
                else:
                    ch = "."
                chars.append(ch)
        hit = (cells, chars)
        self._view_cache[key] = hit
        return hit

    def observe(self, s: GridState, player: int) -> str:
        if s.pos[player] is None:
            return f"{player}|out"
        cells, chars = self._static_view(s.pos[player], s.ori[player], player)
        chars = list(chars)
        index = {c: i for i, c in enumerate(cells)}
        for q, cell in enumerate(s.pos):
            if q != player and cell is not None and cell in index:
                chars[index[cell]] = "A"
        if self.variant is Variant.GATHERING:
            for k, cell in enumerate(self.layout.apples):
                if s.apples[k] == 0 and cell in index:
                    chars[index[cell]] = "F"
        return f"{player}|{''.join(chars)}"


def make_gridworld(spec: GridworldSpec) -> Gridworld:
    return Gridworld(spec)


# Reduced maps in the same symbol alphabet.
SMALL2 = (
    "P     P",
    "       ",
    "  * *  ",
    " ** ** ",
    "  * *  ",
    "       ",
    "P     P",
)
SMALL_LASER_TAG = (
    "P   P",
    " * * ",
    "     ",
    " * * ",
    "P   P",
)
# corridors sit farther apart than the view reaches
SMALL_PATHFIND = (
    "0 @@",
    "****",
    "****",
    "****",
    "****",
    "****",
    "1 ##",
)
SMALL_GATHERING = (
    "F   F",
    " P P ",
    "F   F",
)
