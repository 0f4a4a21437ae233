"""
End-to-end joint optimization: per-(cell, user) rates, association along a
trajectory, and the three trajectory schemes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import aco
from .association import min_equivalent_rate, solve_association
from .config import ScenarioConfig
from .rate import RateSolution, optimize_user_rate

SCHEMES = ("proposed", "rectangle", "normal_ac")


@dataclass(frozen=True, eq=False)
class TrajectoryEvaluation:
    trajectory: aco.Trajectory
    #: K x C equivalent rates R'_k[c], bits per channel use
    rate_table: np.ndarray
    #: K x C 0/1 association
    association: np.ndarray
    gamma: float
    gamma_relaxed: float

    @property
    def served(self) -> list[int]:
        """User served in each slot (-1 when idle)."""
        out = []
        for col in self.association.T:
            nz = np.flatnonzero(col > 0.5)
            out.append(int(nz[0]) if len(nz) else -1)
        return out


class Scenario:
    """Rates and rewards for one config, memoised.

    Rates depend only on ``(cell, user)``, so they are cached and shared by
    every trajectory the ants propose. Rewards are cached per trajectory.
    """

    def __init__(self, cfg: ScenarioConfig):
        self.config = cfg
        self.grid = cfg.grid
        self.slots = cfg.slots
        self.users = cfg.users
        self.heuristic = aco.heuristic_grid(cfg.users, self.grid)
        self._rates: dict[tuple[aco.Cell, int], RateSolution] = {}
        self._evals: dict[aco.Trajectory, TrajectoryEvaluation] = {}

    def compute_rate(self, cell: aco.Cell, k: int) -> RateSolution:
        """Fresh, uncached optimization for user ``k`` with the UAV over ``cell``."""
        cfg = self.config
        return optimize_user_rate(
            cfg.geometry, cfg.ports, cfg.load_model, cfg.users[k], self.grid.position(cell),
            cfg.noise_power, cfg.p_max, eps1=cfg.eps1, eps2=cfg.eps2,
            max_outer=cfg.max_outer, h0=cfg.h0, robust=cfg.robust_mode)

    def user_rate(self, cell: aco.Cell, k: int) -> RateSolution:
        key = (tuple(cell), k)
        sol = self._rates.get(key)
        if sol is None:
            sol = self._rates.setdefault(key, self.compute_rate(key[0], k))
        return sol

    @property
    def cached_rates(self) -> dict:
        return dict(self._rates)

    def rate_table(self, traj) -> np.ndarray:
        K = len(self.users)
        return np.array([[self.user_rate(cell, k).rate for cell in traj] for k in range(K)])

    def evaluate(self, traj) -> TrajectoryEvaluation:
        traj = tuple(tuple(int(v) for v in c) for c in traj)
        ev = self._evals.get(traj)
        if ev is None:
            R = self.rate_table(traj)
            assign, gamma, _, gamma_rel = solve_association(R)
            ev = TrajectoryEvaluation(traj, R, assign, gamma, gamma_rel)
            self._evals[traj] = ev
        return ev


@dataclass(eq=False)
class SchemeResult:
    name: str
    evaluation: TrajectoryEvaluation
    history: list = field(default_factory=list)

    @property
    def trajectory(self) -> aco.Trajectory:
        return self.evaluation.trajectory

    @property
    def gamma(self) -> float:
        return self.evaluation.gamma


@dataclass(eq=False)
class RunResult:
    config: ScenarioConfig
    schemes: dict[str, SchemeResult]

    @property
    def main(self) -> SchemeResult:
        return self.schemes.get("proposed") or next(iter(self.schemes.values()))

    @property
    def trajectory(self):
        return self.main.trajectory

    @property
    def association(self) -> np.ndarray:
        return self.main.evaluation.association

    @property
    def gamma(self) -> float:
        return self.main.gamma

    @property
    def gammas(self) -> dict[str, float]:
        return {name: s.gamma for name, s in self.schemes.items()}

    @property
    def history(self):
        return self.main.history

    def slot_solutions(self, scenario: Scenario, scheme: str | None = None):
        """``(user, RateSolution)`` per slot for the served user (``None`` when idle)."""
        res = self.schemes[scheme] if scheme else self.main
        out = []
        for cell, k in zip(res.trajectory, res.evaluation.served):
            out.append((k, scenario.user_rate(cell, k) if k >= 0 else None))
        return out

    def check_consistency(self, tol: float = 1e-9) -> bool:
        for s in self.schemes.values():
            ev = s.evaluation
            if abs(min_equivalent_rate(ev.rate_table, ev.association) - ev.gamma) > tol * max(1.0, ev.gamma):
                return False
        return True


def run_joint_optimization(cfg: ScenarioConfig, schemes=SCHEMES, scenario: Scenario | None = None) -> RunResult:
    """Run the requested schemes on one scenario (sharing its rate cache)."""
    unknown = set(schemes) - set(SCHEMES)
    if unknown:
        raise ValueError(f"unknown schemes: {sorted(unknown)}")
    sc = scenario or Scenario(cfg)
    out: dict[str, SchemeResult] = {}
    for name in SCHEMES:
        if name not in schemes:
            continue
        if name == "proposed":
            traj, _, hist = aco.run_aco(sc, cfg.aco, cfg.seed)
        elif name == "normal_ac":
            traj, _, hist = aco.normal_ac_baseline(sc, cfg.aco, cfg.seed, cfg.normal_ac_directed)
        else:
            traj, _ = aco.rectangle_baseline(sc)
            hist = []
        out[name] = SchemeResult(name, sc.evaluate(traj), hist)
    return RunResult(cfg, out)
