"""
Brute-force reference solvers for small instances.

These are deliberately simple and slow. They share no code with the
optimizers they check beyond the problem definitions (channel model,
load model), and are used by the test suite and the ``oracle`` CLI verb.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .geometry import REFERENCE_GAIN, ArrayGeometry, PortLayout, UserSite


def _logdet2(G, Q, noise_power):
    m = G.shape[0]
    _, ld = np.linalg.slogdet(np.eye(m) + G @ Q @ G.conj().T / noise_power)
    return ld / math.log(2.0)


def simplex_grid(n: int, step: float) -> np.ndarray:
    """All points of the unit simplex in ``R^n`` whose coordinates are multiples of ``step``."""
    m = int(round(1.0 / step))
    if n == 1:
        return np.ones((1, 1))
    pts = []
    if n == 2:
        i = np.arange(m + 1)
        return np.stack([i, m - i], axis=1) / m
    if n == 3:
        i, j = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="ij")
        ok = i + j <= m
        i, j = i[ok], j[ok]
        return np.stack([i, j, m - i - j], axis=1) / m
    for combo in itertools.product(range(m + 1), repeat=n - 1):
        s = sum(combo)
        if s <= m:
            pts.append(combo + (m - s,))
    return np.asarray(pts, dtype=float) / m


def grid_capacity(G, t: float, noise_power: float, step: float = 1e-3):
    """Max of ``log2 det(I + G Q G^H / sigma^2)`` over ``tr Q = t``, by grid search.

    The search runs over power splits among the eigenvectors of ``G^H G``
    (the optimal covariance is diagonal in that basis). Returns
    ``(capacity, powers)``.
    """
    G = np.asarray(G, dtype=complex)
    w, V = np.linalg.eigh(G.conj().T @ G)
    keep = w > 1e-12 * max(float(w.max()), 1e-300)
    w, V = w[keep], V[:, keep]
    if len(w) == 0 or t <= 0:
        return 0.0, np.zeros(len(w))
    P = simplex_grid(len(w), step) * t
    vals = np.sum(np.log2(1.0 + P * (w / noise_power)[None, :]), axis=1)
    i = int(np.argmax(vals))
    # evaluate the winner through the full determinant as a cross-check
    Q = (V * P[i]) @ V.conj().T
    return float(_logdet2(G, Q, noise_power)), P[i]


def _capacity_curve(gains, t):
    """Water-filling capacity for an array of budgets (vectorised, numpy)."""
    g = np.sort(np.asarray([x for x in gains if x > 0], dtype=float))[::-1]
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    if len(g) == 0:
        return out
    inv = 1.0 / g
    done = np.zeros(t.shape, dtype=bool)
    for k in range(len(g), 0, -1):
        level = (t + inv[:k].sum()) / k
        ok = (level > inv[k - 1]) & ~done & (t > 0)
        cap = np.sum(np.log2(np.maximum(level[..., None] * g[:k], 1.0)), axis=-1)
        out = np.where(ok, cap, out)
        done |= ok
    return out


def brute_force_segment(G, noise_power: float, model, s: int, p_max: float,
                        resolution: float = 1e-3):
    """Grid search over ``(trace, rho)`` with ``rho`` on segment ``s``.

    Feasible points satisfy ``t + p0 c(rho) <= p_max``. Returns
    ``(best_value, t, rho)`` or ``None`` when nothing is feasible.
    """
    G = np.asarray(G, dtype=complex)
    gains = np.linalg.svd(G, compute_uv=False) ** 2 / noise_power
    lo, hi = model.breaks(s)
    seg = model.segments[s - 1]
    rho = np.arange(lo, hi + 0.5 * resolution, resolution)
    rho = rho[rho <= hi]
    t = np.arange(0.0, p_max + 0.5 * resolution, resolution)
    cap = _capacity_curve(gains, t)
    best = None
    for r in rho:
        budget = p_max - model.p0 * seg(r)
        if budget < 0:
            continue
        idx = np.searchsorted(t, budget, side="right") - 1
        # capacity is increasing in t, so the largest affordable grid trace wins
        val = cap[idx] / r
        if best is None or val > best[0]:
            best = (float(val), float(t[idx]), float(r))
    return best


def _nominal_channel(geom: ArrayGeometry, layout: PortLayout, sel, uav_xy, user: UserSite,
                     h0: float = REFERENCE_GAIN, robust: bool = False) -> np.ndarray:
    """Entry-by-entry channel evaluation with scalar math."""
    N, M = geom.n_antennas, layout.n_ports
    H, lam = geom.uav_height, geom.wavelength
    dist = math.hypot(uav_xy[0] - user.position[0], uav_xy[1] - user.position[1])
    out = np.zeros((len(sel), N), dtype=complex)
    for a, m in enumerate(sel):
        y_km = (2 * (m - 1) - M + 1) / 2 * layout.port_spacing
        L = math.sqrt((H - y_km) ** 2 + dist ** 2)
        sin_t = (H - y_km) / L
        for n in range(1, N + 1):
            y_bs = (2 * (n - 1) - N + 1) / 2 * geom.antenna_spacing
            d = math.sqrt(L * L + y_bs * y_bs + 2 * L * y_bs * sin_t) - L
            horiz = dist + (math.sqrt(user.uncertainty_radius_sq) if robust else 0.0)
            gain = h0 / math.sqrt((H + y_bs - y_km) ** 2 + horiz ** 2)
            out[a, n - 1] = gain * complex(math.cos(2 * math.pi * d / lam),
                                           math.sin(2 * math.pi * d / lam))
    return out


scalar_channel = _nominal_channel


def exhaustive_ports(geom, layout, model, user, uav_xy, noise_power, p_max, h0=REFERENCE_GAIN,
                     robust=False, eps1=1e-6):
    """Best rate over every port subset, each with its own optimal ``(Q, rho)``.

    Returns ``(rate, selection)``.
    """
    from .rate import optimize_covariance_ratio

    best = (-math.inf, None)
    for sel in itertools.combinations(range(1, layout.n_ports + 1), layout.n_active):
        G = _nominal_channel(geom, layout, sel, uav_xy, user, h0, robust)
        r = optimize_covariance_ratio(G, noise_power, model, p_max, eps1).rate
        if r > best[0]:
            best = (r, sel)
    return best


def exhaustive_association(table):
    """Exact max-min association by enumerating every slot-to-user map.

    Returns ``(gamma, owner)`` with ``owner[c]`` the user served in slot ``c``.
    Idle slots never help since rates are nonnegative.
    """
    R = np.asarray(table, dtype=float)
    K, C = R.shape
    owners = np.array(list(itertools.product(range(K), repeat=C)), dtype=int)
    totals = np.zeros((len(owners), K))
    for c in range(C):
        np.add.at(totals, (np.arange(len(owners)), owners[:, c]), R[owners[:, c], c])
    mins = totals.min(axis=1)
    i = int(np.argmax(mins))
    return float(mins[i]), tuple(int(v) for v in owners[i])


def closed_walks(grid, C: int):
    """Every length-``C`` walk from the start cell back to it, using the
    4-neighbour moves plus stay."""
    start = grid.start_cell
    out = []
    path = [start]

    def rec():
        remaining = C - len(path)
        cur = path[-1]
        if remaining == 0:
            if cur == start:
                out.append(tuple(path))
            return
        for nb in grid.neighbours(cur) + [cur]:
            if abs(nb[0] - start[0]) + abs(nb[1] - start[1]) <= remaining - 1:
                path.append(nb)
                rec()
                path.pop()

    rec()
    return out


def best_closed_walk(scenario, C: int | None = None):
    """Exact optimum of the max-min equivalent rate over all closed walks.

    Rates come from ``scenario.user_rate`` (the per-cell optimizer); the
    association for every walk is solved exactly. Returns ``(gamma, walk)``.
    """
    grid = scenario.grid
    C = C or scenario.slots
    K = len(scenario.users)
    walks = closed_walks(grid, C)
    cells = sorted({c for w in walks for c in w})
    index = {c: i for i, c in enumerate(cells)}
    rates = np.array([[scenario.user_rate(c, k).rate for c in cells] for k in range(K)])
    owners = np.array(list(itertools.product(range(K), repeat=C)), dtype=int)
    best = (-math.inf, None)
    for start in range(0, len(walks), 4096):
        chunk = walks[start:start + 4096]
        idx = np.array([[index[c] for c in w] for w in chunk])
        R = rates[:, idx]  # K x W x C
        totals = np.zeros((len(chunk), len(owners), K))
        for c in range(C):
            sel = owners[:, c]
            totals[:, np.arange(len(owners)), sel] += R[sel, :, c].T
        vals = totals.min(axis=2).max(axis=1)
        i = int(np.argmax(vals))
        if vals[i] > best[0]:
            best = (float(vals[i]), chunk[i])
    return best


def two_stage_walks(grid, C: int):
    """Every trajectory the two-stage ant rule can produce with positive probability.

    Mirrors the admissible sets of the step rules (not their weights):
    unvisited neighbours first while exploring, strictly closer neighbours
    on the way home, staying only at the start at the very end.
    """
    start = grid.start_cell
    out = []

    def dist(c):
        return abs(c[0] - start[0]) + abs(c[1] - start[1])

    def rec(path, visited):
        c = len(path)
        if c == C:
            out.append(tuple(path))
            return
        cur = path[-1]
        remaining = C - c
        nbs = grid.neighbours(cur)
        if remaining - 1 <= dist(cur):
            if cur == start:
                cands = [start]
            else:
                closer = [n for n in nbs if dist(n) < dist(cur)]
                cands = [n for n in closer if n not in visited] or closer
        else:
            cands = ([n for n in nbs if n not in visited] or nbs) if nbs else [cur]
        for n in cands:
            rec(path + [n], visited | {n})

    rec([start], {start})
    return out
