"""
TDMA user association maximizing the minimum cumulative rate.

The binary program is relaxed to an LP, solved exactly, and rounded back
to a one-user-per-slot schedule which is then polished by local search.
"""

from __future__ import annotations

import functools
import itertools

import numpy as np
from scipy.optimize import linprog

_ACTIVE = 1e-9
_CERT_TOL = 1e-7


def _as_table(table) -> np.ndarray:
    R = np.asarray(table, dtype=float)
    if R.ndim != 2:
        raise ValueError(f"rate table must be 2-D (users x slots), got shape {R.shape}")
    if not np.all(np.isfinite(R)) or np.any(R < 0):
        raise ValueError("rate table entries must be finite and >= 0")
    return R


def min_equivalent_rate(table, assign) -> float:
    """``min_k sum_c a[k, c] R[k, c]``."""
    R = _as_table(table)
    a = np.asarray(assign, dtype=float)
    if a.shape != R.shape:
        raise ValueError(f"association shape {a.shape} does not match table {R.shape}")
    return float(np.min(np.sum(a * R, axis=1)))


def _certify(res, c, A_ub, b_ub, scale):
    """Check primal feasibility and a zero duality gap from HiGHS marginals."""
    x = res.x
    if np.any(A_ub @ x - b_ub > _CERT_TOL * scale):
        raise RuntimeError("LP solution violates a constraint")
    y = res.ineqlin.marginals
    mu_lo = res.lower.marginals
    mu_up = res.upper.marginals
    resid = c - (A_ub.T @ y + mu_lo + mu_up)
    if np.max(np.abs(resid)) > _CERT_TOL * max(1.0, float(np.max(np.abs(c)))):
        raise RuntimeError("LP dual residual too large")
    n = len(x)
    lower = np.zeros(n)
    upper = np.ones(n)
    upper[-1] = 0.0  # gamma has no finite upper bound; its marginal must vanish
    dual = b_ub @ y + lower @ mu_lo + upper @ mu_up
    primal = c @ x
    if abs(primal - dual) > _CERT_TOL * max(1.0, abs(primal)):
        raise RuntimeError(f"LP duality gap {abs(primal - dual):.3e} too large")


def solve_relaxed(table):
    """Solve the LP relaxation ``0 <= a <= 1``; returns ``(a, gamma)``.

    Rates are normalised by their maximum before solving so the result is
    unaffected by the overall scale of the table.
    """
    R = _as_table(table)
    K, C = R.shape
    scale = float(R.max()) if R.size else 0.0
    if scale <= 0:
        return np.zeros((K, C)), 0.0
    Rn = R / scale
    n = K * C + 1
    c = np.zeros(n)
    c[-1] = -1.0
    A_ub = np.zeros((K + C, n))
    for k in range(K):
        A_ub[k, k * C:(k + 1) * C] = -Rn[k]
        A_ub[k, -1] = 1.0
    for j in range(C):
        A_ub[K + j, j:K * C:C] = 1.0
    b_ub = np.concatenate([np.zeros(K), np.ones(C)])
    bounds = [(0.0, 1.0)] * (K * C) + [(0.0, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    _certify(res, c, A_ub, b_ub, 1.0)
    a = np.clip(res.x[:-1].reshape(K, C), 0.0, 1.0)
    # keep column sums within the simplex after clipping
    col = a.sum(axis=0)
    over = col > 1.0
    a[:, over] /= col[over]
    gamma = min_equivalent_rate(R, a)
    return a, gamma


def _totals(R, owner):
    K, C = R.shape
    totals = np.zeros(K)
    for j, k in enumerate(owner):
        if k >= 0:
            totals[k] += R[k, j]
    return totals


def _move_deltas(R, owner):
    """Change of the totals vector for every move ``slot j -> user k``.

    Returns ``(deltas, moves)`` with ``deltas`` of shape ``(n_moves, K)``.
    """
    K, C = R.shape
    eye = np.eye(K)
    has = owner >= 0
    src = np.maximum(owner, 0)
    lose = np.where(has, R[src, np.arange(C)], 0.0)[:, None] * np.where(has[:, None], eye[src], 0.0)
    d = R.T[:, :, None] * eye[None, :, :] - lose[:, None, :]  # (C, K, K)
    keep = (np.arange(K)[None, :] != owner[:, None])
    js, ks = np.nonzero(keep)
    return d[js, ks], np.stack([js, ks], axis=1)


@functools.lru_cache(maxsize=32)
def _pairs(C):
    return np.triu_indices(C, 1)


def _swap_deltas(R, owner):
    K, C = R.shape
    j1, j2 = _pairs(C)
    ok = (owner[j1] >= 0) & (owner[j2] >= 0) & (owner[j1] != owner[j2])
    j1, j2 = j1[ok], j2[ok]
    o1, o2 = owner[j1], owner[j2]
    d = np.zeros((len(j1), K))
    rows = np.arange(len(j1))
    d[rows, o1] += R[o1, j2] - R[o1, j1]
    d[rows, o2] += R[o2, j1] - R[o2, j2]
    return d, np.stack([j1, j2], axis=1)


def _best_improvement(totals, deltas, tol):
    """Index of the candidate whose sorted totals beat the current ones
    lexicographically with the largest new minimum, or ``None``."""
    if len(deltas) == 0:
        return None
    cand = totals[None, :] + deltas
    cur = np.sort(totals)
    # a leximin improvement cannot lower the minimum
    keep = np.flatnonzero(cand.min(axis=1) >= cur[0] - tol)
    if len(keep) == 0:
        return None
    srt = np.sort(cand[keep], axis=1)
    diff = srt - cur[None, :]
    sig = np.abs(diff) > tol
    first = np.argmax(sig, axis=1)
    better = sig.any(axis=1) & (diff[np.arange(len(diff)), first] > 0)
    if not better.any():
        return None
    idx = np.flatnonzero(better)
    return int(keep[idx[np.argmax(srt[idx, 0])]])


def _leximin_polish(R, owner):
    """Local search on the sorted user totals.

    Single-slot moves and pairwise swaps are pooled; only when neither
    improves are pairs of moves tried whose first move hands a slot to a
    worst-off user.
    """
    K, C = R.shape
    totals = _totals(R, owner)
    tol = 1e-9 * max(float(R.max()), 1e-300)
    for _ in range(4 * K * C + 10):
        d_mv, mv = _move_deltas(R, owner)
        d_sw, sw = _swap_deltas(R, owner)
        pick = _best_improvement(totals, np.vstack([d_mv, d_sw]), tol)
        if pick is not None:
            if pick < len(mv):
                j, k = mv[pick]
                owner[j] = k
                totals = totals + d_mv[pick]
            else:
                a, b = sw[pick - len(mv)]
                owner[a], owner[b] = owner[b], owner[a]
                totals = totals + d_sw[pick - len(mv)]
            continue
        # compound: (j1 -> worst user) then (j2 -> k2), j1 != j2
        worst = np.flatnonzero(totals <= totals.min() + tol)
        first = np.flatnonzero(np.isin(mv[:, 1], worst))
        if len(first) == 0:
            break
        pairs_a = np.repeat(first, len(mv))
        pairs_b = np.tile(np.arange(len(mv)), len(first))
        ok = mv[pairs_a, 0] != mv[pairs_b, 0]
        pairs_a, pairs_b = pairs_a[ok], pairs_b[ok]
        pick = _best_improvement(totals, d_mv[pairs_a] + d_mv[pairs_b], tol)
        if pick is None:
            break
        for m in (pairs_a[pick], pairs_b[pick]):
            j, k = mv[m]
            owner[j] = k
        totals = totals + d_mv[pairs_a[pick]] + d_mv[pairs_b[pick]]
    return owner


def _argmax_rounding(R, a):
    """Each slot to the user with the largest relaxed share; ties go to the
    user with the smallest running total. Slots with no share stay empty."""
    K, C = R.shape
    owner = np.full(C, -1, dtype=int)
    totals = np.zeros(K)
    for j in range(C):
        col = a[:, j]
        top = col.max()
        if top <= _ACTIVE:
            continue
        ties = np.flatnonzero(col >= top - _ACTIVE)
        k = int(min(ties, key=lambda i: (totals[i], i)))
        owner[j] = k
        totals[k] += R[k, j]
    return owner


def _greedy_fill(R):
    """Repeatedly give the worst-off user its best remaining slot."""
    K, C = R.shape
    owner = np.full(C, -1, dtype=int)
    totals = np.zeros(K)
    left = list(range(C))
    while left:
        k = int(np.argmin(totals))
        j = max(left, key=lambda i: (R[k, i], -i))
        owner[j] = k
        totals[k] += R[k, j]
        left.remove(j)
    return owner


def _starts(R, a, max_starts):
    base = _argmax_rounding(R, a)
    yield base
    frac = [j for j in range(R.shape[1]) if np.count_nonzero(a[:, j] > _ACTIVE) > 1]
    supports = [np.flatnonzero(a[:, j] > _ACTIVE) for j in frac]
    n = 1
    for combo in itertools.product(*supports):
        if n >= max_starts:
            break
        owner = base.copy()
        owner[frac] = combo
        if np.array_equal(owner, base):
            continue
        n += 1
        yield owner
    yield _greedy_fill(R)


def round_association(table, relaxed, max_starts: int = 8, gap_tol: float = 0.01) -> np.ndarray:
    """Turn a fractional association into a feasible 0/1 schedule.

    The argmax rounding of ``relaxed`` is polished by a leximin local search
    (see :func:`_leximin_polish`). If the result is not within ``gap_tol`` of
    the LP bound, further starting points are polished as well: alternative
    roundings of the fractional slots (up to ``max_starts`` in total) and a
    greedy fill. The schedule with the best sorted user totals is returned.
    """
    R = _as_table(table)
    a = np.asarray(relaxed, dtype=float)
    K, C = R.shape
    if a.shape != R.shape:
        raise ValueError(f"association shape {a.shape} does not match table {R.shape}")
    if K == 0 or C == 0:
        return np.zeros((K, C))
    if np.all((a <= _ACTIVE) | (a >= 1 - _ACTIVE)) and np.all(a.sum(axis=0) <= 1 + _ACTIVE):
        # already integral: nothing to round
        return np.round(a)
    bound = min_equivalent_rate(R, a)
    best, best_key = None, None
    for owner in _starts(R, a, max_starts):
        if K > 1:
            owner = _leximin_polish(R, owner)
        key = np.sort(_totals(R, owner))
        if best is None or _lex_greater(key, best_key, 1e-9 * max(float(R.max()), 1e-300)):
            best, best_key = owner, key
        if best_key[0] >= (1.0 - gap_tol) * bound:
            break
    out = np.zeros((K, C))
    assigned = best >= 0
    out[best[assigned], np.flatnonzero(assigned)] = 1.0
    return out


def _lex_greater(x, y, tol) -> bool:
    for u, v in zip(x, y):
        if u > v + tol:
            return True
        if u < v - tol:
            return False
    return False


def solve_association(table):
    """Relax, solve, round. Returns ``(assign, gamma, relaxed, gamma_relaxed)``."""
    R = _as_table(table)
    relaxed, gamma_relaxed = solve_relaxed(R)
    assign = round_association(R, relaxed)
    return assign, min_equivalent_rate(R, assign), relaxed, gamma_relaxed
