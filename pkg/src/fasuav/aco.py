"""
Grid trajectory search with a two-stage ant colony.

Cells are addressed by 0-based ``(i, j)`` tuples; cell ``(i, j)`` has its
centre at ``origin + ((i + 0.5) d, (j + 0.5) d)`` where ``d`` is the cell
size (the per-slot flight distance). A trajectory is a tuple of ``C`` cells
that starts and ends at the start cell; consecutive cells are identical or
4-adjacent.

Ants explore freely while they can still afford any step (stage 1) and
head home through strictly closer cells once they cannot (stage 2).
Distances to the start are Manhattan distances in cells, which is the
number of moves actually needed to get back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InfeasibleReturnError
from .geometry import UserSite

Cell = tuple[int, int]
Trajectory = tuple[Cell, ...]

#: Fixed neighbour order; index 4 is "stay".
MOVES: tuple[Cell, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1), (0, 0))
TAU_FLOOR = 1e-12


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    cell_size: float
    origin: tuple[float, float] = (0.0, 0.0)
    start_cell: Cell = (0, 0)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs at least one cell per axis")
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")
        object.__setattr__(self, "start_cell", tuple(int(v) for v in self.start_cell))
        if not self.contains(self.start_cell):
            raise ValueError(f"start cell {self.start_cell} outside the grid")

    def contains(self, cell: Cell) -> bool:
        return 0 <= cell[0] < self.nx and 0 <= cell[1] < self.ny

    def position(self, cell: Cell) -> tuple[float, float]:
        return (self.origin[0] + (cell[0] + 0.5) * self.cell_size,
                self.origin[1] + (cell[1] + 0.5) * self.cell_size)

    def cell_of(self, xy) -> Cell:
        i = int(math.floor((xy[0] - self.origin[0]) / self.cell_size))
        j = int(math.floor((xy[1] - self.origin[1]) / self.cell_size))
        return (min(max(i, 0), self.nx - 1), min(max(j, 0), self.ny - 1))

    def neighbours(self, cell: Cell) -> list[Cell]:
        out = []
        for dx, dy in MOVES[:4]:
            nb = (cell[0] + dx, cell[1] + dy)
            if self.contains(nb):
                out.append(nb)
        return out


@dataclass(frozen=True)
class AcoParams:
    n_ants: int = 50
    n_rounds: int = 100
    alpha: float = 1.0
    beta: float = 2.0
    evaporation: float = 0.1
    tau0: float = 1.0

    def __post_init__(self):
        if self.n_ants < 1 or self.n_rounds < 1:
            raise ValueError("n_ants and n_rounds must be >= 1")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if not 0 <= self.evaporation < 1:
            raise ValueError("evaporation must lie in [0, 1)")
        if not self.tau0 > 0:
            raise ValueError("tau0 must be positive")


def manhattan(a: Cell, b: Cell) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def is_valid_trajectory(traj: Sequence[Cell], grid: Grid, length: int | None = None) -> bool:
    if length is not None and len(traj) != length:
        return False
    if len(traj) < 1 or traj[0] != grid.start_cell or traj[-1] != grid.start_cell:
        return False
    if not all(grid.contains(c) for c in traj):
        return False
    return all(manhattan(a, b) <= 1 for a, b in zip(traj, traj[1:]))


# ---------------------------------------------------------------------------
# heuristic and pheromone

def heuristic(cell: Cell, users: Iterable[UserSite], grid: Grid) -> float:
    """Sum of inverse distances from the cell centre to every user.

    Terms closer than ``cell_size / 100`` are clamped to ``100 / cell_size``.
    """
    px, py = grid.position(cell)
    eps = grid.cell_size / 100.0
    total = 0.0
    for u in users:
        d = math.hypot(px - u.position[0], py - u.position[1])
        total += 1.0 / eps if d < eps else 1.0 / d
    return total


def heuristic_grid(users: Sequence[UserSite], grid: Grid) -> np.ndarray:
    out = np.empty((grid.nx, grid.ny))
    for i in range(grid.nx):
        for j in range(grid.ny):
            out[i, j] = heuristic((i, j), users, grid)
    return out


class CellPheromone:
    """Pheromone attached to cells; the weight of a step is that of its target."""

    def __init__(self, grid: Grid, tau0: float):
        self.grid = grid
        self.tau = np.full((grid.nx, grid.ny), float(tau0))

    def level(self, current: Cell, target: Cell) -> float:
        return self.tau[target]

    def copy(self):
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.tau = self.tau.copy()
        return new

    def update(self, best: Trajectory, reward: float, evaporation: float):
        self.tau *= (1.0 - evaporation)
        for cell in best:
            self.tau[cell] += reward
        np.maximum(self.tau, TAU_FLOOR, out=self.tau)


class EdgePheromone(CellPheromone):
    """Pheromone on moves between cells (including the stay move).

    ``directed=False`` deposits on both directions of every traversed edge,
    so the two directions always carry the same level.
    """

    def __init__(self, grid: Grid, tau0: float, directed: bool = True):
        self.grid = grid
        self.directed = directed
        self.tau = np.full((grid.nx, grid.ny, len(MOVES)), float(tau0))

    @staticmethod
    def _move(current: Cell, target: Cell) -> int:
        return MOVES.index((target[0] - current[0], target[1] - current[1]))

    def level(self, current: Cell, target: Cell) -> float:
        return self.tau[current + (self._move(current, target),)]

    def update(self, best: Trajectory, reward: float, evaporation: float):
        self.tau *= (1.0 - evaporation)
        for a, b in zip(best, best[1:]):
            self.tau[a + (self._move(a, b),)] += reward
            if not self.directed and a != b:
                self.tau[b + (self._move(b, a),)] += reward
        np.maximum(self.tau, TAU_FLOOR, out=self.tau)


def update_pheromone(pher: CellPheromone, best: tuple[Trajectory, float],
                     params: AcoParams) -> CellPheromone:
    """Evaporate everywhere, then deposit the best reward along ``best``.

    A cell (or edge) visited several times gets one deposit per visit.
    Returns a new pheromone object; ``pher`` is left untouched.
    """
    traj, reward = best
    if reward < 0:
        raise ValueError("reward must be >= 0")
    out = pher.copy()
    out.update(traj, reward, params.evaporation)
    return out


# ---------------------------------------------------------------------------
# step rules

def _distribution(current, cands, pher, params, heur) -> dict[Cell, float]:
    w = [(pher.level(current, c) ** params.alpha) * (heur[c] ** params.beta) for c in cands]
    total = sum(w)
    if not total > 0 or not math.isfinite(total):
        return {c: 1.0 / len(cands) for c in cands}
    return {c: x / total for c, x in zip(cands, w)}


def stage1_step(current: Cell, visited, pher, params: AcoParams, heur, grid: Grid) -> dict[Cell, float]:
    """Next-cell probabilities while exploring.

    Unvisited 4-neighbours are weighted by ``tau^alpha * h^beta``; visited
    ones are only allowed when every neighbour has been visited.
    """
    nbs = grid.neighbours(current)
    if not nbs:  # single-cell grid
        return {current: 1.0}
    fresh = [c for c in nbs if c not in visited]
    return _distribution(current, fresh or nbs, pher, params, heur)


def stage2_step(current: Cell, start: Cell, visited, pher, params: AcoParams, heur,
                grid: Grid, remaining: int) -> dict[Cell, float]:
    """Next-cell probabilities on the way home.

    Only neighbours strictly closer to ``start`` are admissible (unvisited
    ones preferred). At the start cell with fewer than two slots left the
    ant stays.
    """
    if current == start:
        if remaining < 2:
            return {start: 1.0}
        raise InfeasibleReturnError("return stage entered at the start cell with slots to spare")
    d = manhattan(current, start)
    closer = [c for c in grid.neighbours(current) if manhattan(c, start) < d]
    if not closer:
        raise InfeasibleReturnError(f"no neighbour of {current} is closer to {start}")
    fresh = [c for c in closer if c not in visited]
    return _distribution(current, fresh or closer, pher, params, heur)


def in_return_stage(current: Cell, start: Cell, remaining: int) -> bool:
    """True once an outward step could leave too few moves to get back.

    ``remaining`` counts the moves still to be made (``C - c`` at slot ``c``).
    """
    return remaining - 1 <= manhattan(current, start)


def _sample(dist: dict[Cell, float], rng: np.random.Generator) -> Cell:
    cells = list(dist)
    if len(cells) == 1:
        return cells[0]
    u = rng.random()
    acc = 0.0
    for c in cells:
        acc += dist[c]
        if u < acc:
            return c
    return cells[-1]


def explore(grid: Grid, pher, params: AcoParams, heur, C: int,
            rng: np.random.Generator) -> Trajectory:
    """Sample one closed trajectory of ``C`` cells."""
    if C < 2:
        raise ValueError("a trajectory needs at least two slots")
    start = grid.start_cell
    path = [start]
    visited = {start}
    for c in range(1, C):
        current = path[-1]
        remaining = C - c
        if in_return_stage(current, start, remaining):
            dist = stage2_step(current, start, visited, pher, params, heur, grid, remaining)
        else:
            dist = stage1_step(current, visited, pher, params, heur, grid)
        nxt = _sample(dist, rng)
        path.append(nxt)
        visited.add(nxt)
    return tuple(path)


def ant_rng(seed: int, rnd: int, ant: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(rnd), int(ant)])


# ---------------------------------------------------------------------------
# rewards and the colony loop

def trajectory_reward(traj: Trajectory, scenario) -> float:
    """Max-min equivalent rate achievable along ``traj``.

    ``scenario`` must provide ``evaluate(traj)`` returning an object with a
    ``gamma`` attribute (see :class:`fasuav.scenario.Scenario`).
    """
    return scenario.evaluate(traj).gamma


@dataclass(frozen=True)
class RoundRecord:
    round: int
    best_reward: float
    best_so_far: float
    best_trajectory: Trajectory


def _colony(scenario, params: AcoParams, seed: int, pher) -> tuple[Trajectory, float, list]:
    grid = scenario.grid
    heur = scenario.heuristic
    C = scenario.slots
    best_traj, best_gamma = None, -math.inf
    history = []
    for rnd in range(params.n_rounds):
        snapshot = pher
        ants = [explore(grid, snapshot, params, heur, C, ant_rng(seed, rnd, a))
                for a in range(params.n_ants)]
        rewards = [trajectory_reward(t, scenario) for t in ants]
        k = int(np.argmax(rewards))
        if rewards[k] > best_gamma:
            best_traj, best_gamma = ants[k], rewards[k]
        pher = update_pheromone(pher, (ants[k], rewards[k]), params)
        history.append(RoundRecord(rnd, rewards[k], best_gamma, ants[k]))
    return best_traj, best_gamma, history


def run_aco(scenario, params: AcoParams, seed: int):
    """Cell-pheromone colony. Returns ``(trajectory, gamma, history)``."""
    return _colony(scenario, params, seed, CellPheromone(scenario.grid, params.tau0))


def normal_ac_baseline(scenario, params: AcoParams, seed: int, directed: bool = True):
    """Same colony with pheromone on moves between cells."""
    return _colony(scenario, params, seed,
                   EdgePheromone(scenario.grid, params.tau0, directed=directed))


# ---------------------------------------------------------------------------
# rectangle baseline

def _ring(x0: int, y0: int, w: int, h: int, entry: Cell) -> list[Cell]:
    """Counter-clockwise walk around the rectangle ``[x0, x0+w] x [y0, y0+h]``
    starting and ending at ``entry`` (which must lie on the bottom edge)."""
    corners = [(x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h), (x0, y0), entry]
    path = [entry]
    for cx, cy in corners:
        x, y = path[-1]
        while (x, y) != (cx, cy):
            x += (cx > x) - (cx < x)
            y += (cy > y) - (cy < y)
            path.append((x, y))
    return path


def rectangle_path(grid: Grid, C: int) -> Trajectory:
    """Rectangular loop around the start cell, padded with stays to ``C`` cells.

    The rectangle is centred on the start cell: the UAV flies straight down
    to the middle of the bottom edge, goes once around, and climbs back. The
    half-widths are chosen to maximise the enclosed area within the ``C - 1``
    available moves and the grid (ties towards the squarer shape). If no
    centred rectangle fits, the largest rectangle whose bottom edge passes
    through the start cell is flown instead.
    """
    if C < 2:
        raise ValueError("need at least two slots")
    sx, sy = grid.start_cell
    moves = C - 1
    best = None
    for ax in range(1, grid.nx):
        for ay in range(1, grid.ny):
            cost = 4 * ax + 4 * ay + 2 * ay
            if cost > moves:
                break
            if sx - ax < 0 or sx + ax >= grid.nx or sy - ay < 0 or sy + ay >= grid.ny:
                continue
            key = (ax * ay, -abs(ax - ay))
            if best is None or key > best[0]:
                best = (key, ax, ay)
    if best is not None:
        _, ax, ay = best
        entry = (sx, sy - ay)
        stem = [(sx, sy - k) for k in range(ay + 1)]
        ring = _ring(sx - ax, sy - ay, 2 * ax, 2 * ay, entry)
        path = stem + ring[1:] + stem[::-1][1:]
    else:
        path = _through_start_rectangle(grid, moves)
    path = path + [grid.start_cell] * (C - len(path))
    return tuple(path)


def _through_start_rectangle(grid: Grid, moves: int) -> list[Cell]:
    sx, sy = grid.start_cell
    best = None
    for w in range(0, grid.nx):
        for h in range(0, grid.ny):
            if 2 * (w + h) > moves or (w == 0 and h == 0):
                continue
            x0 = min(max(sx - w // 2, 0), grid.nx - 1 - w)
            if x0 < 0 or x0 > sx or x0 + w < sx:
                continue
            y0 = sy if sy + h < grid.ny else sy - h
            if y0 < 0:
                continue
            key = (w * h, w + h, -abs(w - h))
            if best is None or key > best[0]:
                best = (key, x0, y0, w, h)
    if best is None:
        return [grid.start_cell]
    _, x0, y0, w, h = best
    if y0 == sy:
        return _ring(x0, y0, w, h, (sx, sy))
    # start on the top edge: walk the mirrored ring
    ring = _ring(x0, 0, w, h, (sx, 0))
    return [(x, y0 + h - y) for x, y in ring]


def rectangle_baseline(scenario):
    traj = rectangle_path(scenario.grid, scenario.slots)
    return traj, trajectory_reward(traj, scenario)
