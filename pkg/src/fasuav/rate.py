"""
Per-user rate maximization at a fixed UAV position.

The semantic-equivalent rate is ``log2 det(I + G Q G^H / sigma^2) / rho``.
Covariance ``Q`` and compression ratio ``rho`` are coupled through the
shared power budget ``tr(Q) + p0 c(rho) <= P_max``; for a fixed load segment
this is a concave-over-affine fractional program in the trace ``t = tr(Q)``,
solved with Dinkelbach's method. Port selection is then improved by
coordinate ascent, and the two steps alternate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (InvalidBudgetError, InvalidCovarianceError,
                     NoFeasibleSolutionError, SegmentInfeasibleError)
from .geometry import (REFERENCE_GAIN, ArrayGeometry, PortLayout, UserSite,
                       check_selection, port_rows)
from .semantic import PiecewiseLoadModel, ratio_from_power, trace_budget_bounds

_LN2 = math.log(2.0)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

EPS1 = 1e-6
EPS2 = 1e-4
MAX_OUTER = 20
DINKELBACH_MAX_ITERS = 50
TRACE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class RateSolution:
    covariance: np.ndarray
    ratio: float
    rate: float
    segment: int
    ports: tuple[int, ...] | None = None
    #: Dinkelbach ratio parameter after each update (nondecreasing).
    deltas: tuple[float, ...] = ()
    #: Last transformed objective value ``p - delta q``.
    gap: float = 0.0
    #: Rate after each outer iteration of the alternating loop.
    outer_rates: tuple[float, ...] = field(default=())

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.covariance)))


def _check_covariance(Q: np.ndarray) -> np.ndarray:
    Q = np.asarray(Q, dtype=complex)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise InvalidCovarianceError(f"covariance must be square, got {Q.shape}")
    scale = max(float(np.max(np.abs(Q))) if Q.size else 0.0, 1e-300)
    if np.max(np.abs(Q - Q.conj().T)) > 1e-9 * scale:
        raise InvalidCovarianceError("covariance is not Hermitian")
    tr = float(np.real(np.trace(Q)))
    if Q.size and np.linalg.eigvalsh(Q)[0] < -1e-9 * max(tr, 1e-300):
        raise InvalidCovarianceError("covariance is not positive semidefinite")
    return Q


def achievable_rate(G, Q, noise_power: float, ratio: float) -> float:
    """Equivalent rate in bits per channel use, already divided by ``ratio``."""
    G = np.asarray(G, dtype=complex)
    Q = _check_covariance(Q)
    m = G.shape[0]
    mat = np.eye(m) + (G @ Q @ G.conj().T) / noise_power
    _, logdet = np.linalg.slogdet(mat)
    return max(float(logdet) / _LN2, 0.0) / ratio


def _modes(G, noise_power):
    """Eigenmode power gains (descending) and right singular vectors."""
    G = np.asarray(G, dtype=complex)
    _, s, vh = np.linalg.svd(G, full_matrices=False)
    return (s ** 2) / noise_power, vh.conj().T


def _waterfill_powers(gains, t: float) -> list[float]:
    r = len(gains)
    p = [0.0] * r
    if t <= 0:
        return p
    active = [g for g in gains if g > 0]
    inv = [1.0 / g for g in active]
    csum = 0.0
    sums = []
    for x in inv:
        csum += x
        sums.append(csum)
    for k in range(len(active), 0, -1):
        level = (t + sums[k - 1]) / k
        if level > inv[k - 1]:
            for i in range(k):
                p[i] = level - inv[i]
            break
    return p


def _capacity(gains, t: float) -> float:
    return sum(math.log2(1.0 + g * p) for g, p in zip(gains, _waterfill_powers(gains, t)) if p > 0)


def _covariance(vecs, powers) -> np.ndarray:
    p = np.asarray(powers, dtype=float)
    return (vecs * p) @ vecs.conj().T


def waterfill(G, t: float, noise_power: float):
    """Capacity-achieving covariance for trace budget ``t``.

    Returns ``(Q, capacity)`` with capacity in bits per channel use.
    """
    if t < 0:
        raise InvalidBudgetError(f"trace budget must be >= 0, got {t}")
    gains, vecs = _modes(G, noise_power)
    gains = [float(g) for g in gains]
    powers = _waterfill_powers(gains, t)
    cap = sum(math.log2(1.0 + g * p) for g, p in zip(gains, powers) if p > 0)
    return _covariance(vecs, powers), cap


def golden_section_max(f, a: float, b: float, tol: float = TRACE_TOL) -> float:
    """Maximizer of a unimodal ``f`` on ``[a, b]``; endpoints are also checked."""
    lo, hi = a, b
    if hi - lo > tol:
        c = hi - _INVPHI * (hi - lo)
        d = lo + _INVPHI * (hi - lo)
        fc, fd = f(c), f(d)
        while hi - lo > tol:
            if fc >= fd:
                hi, d, fd = d, c, fc
                c = hi - _INVPHI * (hi - lo)
                fc = f(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + _INVPHI * (hi - lo)
                fd = f(d)
    best_x, best_f = a, f(a)
    for x in (0.5 * (lo + hi), b):
        fx = f(x)
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x


def _dinkelbach(gains, vecs, G, noise_power, model: PiecewiseLoadModel, s: int,
                p_max: float, eps1: float, max_iters: int) -> RateSolution:
    bounds = trace_budget_bounds(model, s, p_max)
    if bounds is None:
        raise SegmentInfeasibleError(f"segment {s} is infeasible at P_max={p_max}")
    lo, hi = bounds
    seg = model.segments[s - 1]
    p0 = model.p0

    def p(t):
        return _capacity(gains, t)

    def q(t):
        return ((p_max - t) / p0 - seg.intercept) / seg.slope

    t = 0.5 * (lo + hi)
    delta = p(t) / q(t)
    deltas = [delta]
    gap = math.inf
    for _ in range(max_iters):
        t_new = golden_section_max(lambda x: p(x) - delta * q(x), lo, hi)
        gap = p(t_new) - delta * q(t_new)
        new_delta = p(t_new) / q(t_new)
        if new_delta > delta:
            t, delta = t_new, new_delta
            deltas.append(delta)
        if gap < eps1:
            break

    powers = _waterfill_powers(gains, t)
    Q = _covariance(vecs, powers)
    rho = ratio_from_power(model, p_max - t, s)
    rate = achievable_rate(G, Q, noise_power, rho)
    return RateSolution(covariance=Q, ratio=rho, rate=rate, segment=s,
                        deltas=tuple(deltas), gap=gap)


def dinkelbach_segment(G, noise_power: float, model: PiecewiseLoadModel, s: int,
                       p_max: float, eps1: float = EPS1,
                       max_iters: int = DINKELBACH_MAX_ITERS) -> RateSolution:
    """Best ``(Q, rho)`` with compression restricted to load segment ``s``."""
    gains, vecs = _modes(G, noise_power)
    return _dinkelbach([float(g) for g in gains], vecs, G, noise_power, model, s,
                       p_max, eps1, max_iters)


def optimize_covariance_ratio(G, noise_power: float, model: PiecewiseLoadModel,
                              p_max: float, eps1: float = EPS1) -> RateSolution:
    """Run the per-segment solver on every segment and keep the best."""
    gains, vecs = _modes(G, noise_power)
    gains = [float(g) for g in gains]
    best = None
    for s in range(1, model.n_segments + 1):
        if trace_budget_bounds(model, s, p_max) is None:
            continue
        sol = _dinkelbach(gains, vecs, G, noise_power, model, s, p_max, eps1,
                          DINKELBACH_MAX_ITERS)
        if best is None or sol.rate > best.rate:
            best = sol
    if best is None:
        raise NoFeasibleSolutionError(f"no load segment is feasible at P_max={p_max}")
    return best


def initial_ports(layout: PortLayout) -> tuple[int, ...]:
    """Active ports spread evenly over the FAS."""
    M, m0 = layout.n_ports, layout.n_active
    if m0 == 1:
        return ((M + 1) // 2,)
    step = (M - 1) / (m0 - 1)
    return tuple(int(math.floor(1 + m * step + 0.5)) for m in range(m0))


def _selection_rates(A, selections, ratio) -> np.ndarray:
    idx = np.asarray(selections) - 1
    sub = A[idx[:, :, None], idx[:, None, :]]
    sub = sub + np.eye(idx.shape[1])
    _, logdet = np.linalg.slogdet(sub)
    return np.maximum(logdet / _LN2, 0.0) / ratio


def _select_ports(rows, Q, ratio, noise_power, start) -> tuple[int, ...]:
    M = rows.shape[0]
    A = (rows @ Q @ rows.conj().T) / noise_power
    sel = list(start)
    m0 = len(sel)
    current = float(_selection_rates(A, np.array([sel]), ratio)[0])
    changed = True
    while changed:
        changed = False
        for m in range(m0):
            lo = sel[m - 1] + 1 if m > 0 else 1
            hi = sel[m + 1] - 1 if m < m0 - 1 else M
            cands = [r for r in range(lo, hi + 1) if r != sel[m]]
            if not cands:
                continue
            batch = np.tile(np.array(sel), (len(cands), 1))
            batch[:, m] = cands
            for r, val in zip(cands, _selection_rates(A, batch, ratio)):
                if val > current + 1e-12 * current:
                    sel[m], current, changed = r, float(val), True
    return tuple(sel)


def select_ports(geom: ArrayGeometry, layout: PortLayout, user: UserSite, uav_xy,
                 Q, ratio: float, noise_power: float, start: Sequence[int],
                 h0: float = REFERENCE_GAIN, robust: bool = False) -> tuple[int, ...]:
    """Coordinate ascent over the active-port indices with ``Q`` and ``rho`` fixed.

    Positions are visited in ascending order and candidates in ascending
    index order; a candidate replaces the current index only when it
    strictly raises the rate. Sweeps repeat until nothing changes.
    """
    start = check_selection(layout, start)
    Q = _check_covariance(Q)
    rows = port_rows(geom, layout, uav_xy, user, h0, robust)
    return _select_ports(rows, Q, ratio, noise_power, start)


def optimize_user_rate(geom: ArrayGeometry, layout: PortLayout, model: PiecewiseLoadModel,
                       user: UserSite, uav_xy, noise_power: float, p_max: float,
                       eps1: float = EPS1, eps2: float = EPS2, max_outer: int = MAX_OUTER,
                       h0: float = REFERENCE_GAIN, robust: bool = False) -> RateSolution:
    """Alternate covariance/ratio optimization and port selection."""
    rows = port_rows(geom, layout, uav_xy, user, h0, robust)
    ports = initial_ports(layout)
    cov = None
    rates: list[float] = []
    for _ in range(max_outer):
        G = rows[np.asarray(ports) - 1]
        sol = optimize_covariance_ratio(G, noise_power, model, p_max, eps1)
        if cov is None or sol.rate >= rates[-1]:
            cov = sol
        ports = _select_ports(rows, cov.covariance, cov.ratio, noise_power, ports)
        G = rows[np.asarray(ports) - 1]
        rates.append(achievable_rate(G, cov.covariance, noise_power, cov.ratio))
        if len(rates) > 1 and rates[-1] - rates[-2] < eps2:
            break
    return RateSolution(covariance=cov.covariance, ratio=cov.ratio, rate=rates[-1],
                        segment=cov.segment, ports=ports, deltas=cov.deltas,
                        gap=cov.gap, outer_rates=tuple(rates))
