"""Acceptance criteria, each at its stated tolerance.

Every test reports one ``criterion N [PASS|FAIL]`` line; pytest prints them
together in an "acceptance criteria" section at the end of the run.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from fasuav import aco
from fasuav.association import solve_association
from fasuav.config import load_config
from fasuav.geometry import (ArrayGeometry, PortLayout, UserSite, build_channel, path_difference,
                             path_length, worst_case_channel)
from fasuav.oracles import (brute_force_segment, best_closed_walk, exhaustive_association,
                            exhaustive_ports, grid_capacity)
from fasuav.rate import dinkelbach_segment, optimize_user_rate, waterfill
from fasuav.scenario import Scenario, run_joint_optimization
from fasuav.semantic import DEFAULT_LOAD_MODEL, PiecewiseLoadModel, Segment

ROOT = Path(__file__).resolve().parents[1]
REFERENCE = ROOT / "configs" / "reference.yaml"


def _channel(rng, m, n):
    return (rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))) / np.sqrt(2)


def test_c1_waterfill_matches_grid_search(acceptance_report):
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        m, n = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        G = _channel(rng, m, n)
        t, s2 = rng.uniform(0.1, 10.0), rng.uniform(0.1, 2.0)
        worst = max(worst, abs(waterfill(G, t, s2)[1] - grid_capacity(G, t, s2, step=1e-3)[0]))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-5 and elapsed < 10.0
    acceptance_report(1, "water-filling vs simplex grid", ok,
                      f"max |diff| {worst:.2e} (<= 1e-5), {elapsed:.1f} s (< 10 s)")
    assert ok


def test_c2_dinkelbach_matches_brute_force(acceptance_report):
    worst, monotone, converged = 0.0, True, True
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        A = -rng.uniform(0.5, 5.0)
        D = rng.uniform(0.2, 0.8)
        B = -A + rng.uniform(0.0, 0.5)          # c(1) >= 0
        model = PiecewiseLoadModel((Segment(A, B, D),), p0=rng.uniform(0.5, 2.0))
        m, n = int(rng.integers(1, 4)), int(rng.integers(1, 5))
        G = _channel(rng, m, n)
        s2, p_max = rng.uniform(0.05, 2.0), rng.uniform(3.0, 20.0)
        sol = dinkelbach_segment(G, s2, model, 1, p_max, eps1=1e-6, max_iters=50)
        ref = brute_force_segment(G, s2, model, 1, p_max, resolution=1e-3)[0]
        worst = max(worst, abs(sol.rate - ref) / ref)
        monotone &= all(b >= a for a, b in zip(sol.deltas, sol.deltas[1:]))
        converged &= abs(sol.gap) <= 1e-6 and len(sol.deltas) - 1 <= 50
    ok = worst <= 1e-3 and monotone and converged
    acceptance_report(2, "Dinkelbach vs (trace, rho) grid", ok,
                      f"max rel diff {worst:.2e} (<= 1e-3), delta monotone {monotone}, "
                      f"converged in <= 50 iterations {converged}")
    assert ok


def test_c3_alternating_optimization(acceptance_report):
    geom = ArrayGeometry(4, 0.002, 30.0, 0.004)
    layout = PortLayout(8, 0.002, 2)
    worst, monotone = 0.0, True
    for seed in range(50):
        rng = np.random.default_rng(2000 + seed)
        user = UserSite(tuple(rng.uniform(0.0, 300.0, 2)))
        uav = tuple(rng.uniform(0.0, 300.0, 2))
        sol = optimize_user_rate(geom, layout, DEFAULT_LOAD_MODEL, user, uav, 1e-9, 20.0)
        ref, _ = exhaustive_ports(geom, layout, DEFAULT_LOAD_MODEL, user, uav, 1e-9, 20.0)
        monotone &= all(b >= a for a, b in zip(sol.outer_rates, sol.outer_rates[1:]))
        worst = max(worst, abs(ref - sol.rate))
    ok = monotone and worst <= 1e-3
    acceptance_report(3, "alternating optimization vs port enumeration", ok,
                      f"outer rates nondecreasing {monotone}, max |gap| {worst:.2e} (<= 1e-3)")
    assert ok


def test_c4_association_gap(acceptance_report):
    worst, bounded = 1.0, True
    for seed in range(50):
        rng = np.random.default_rng(3000 + seed)
        K, C = int(rng.integers(1, 4)), int(rng.integers(1, 7))
        R = rng.uniform(0.0, 1.0, (K, C))
        _, gamma, _, gamma_rel = solve_association(R)
        opt = exhaustive_association(R)[0]
        bounded &= gamma <= gamma_rel + 1e-9
        if opt > 0:
            worst = min(worst, gamma / opt)
    ok = worst >= 0.95 and bounded
    acceptance_report(4, "association vs exhaustive", ok,
                      f"worst gamma/optimum {worst:.4f} (>= 0.95), integral <= relaxed {bounded}")
    assert ok


def _small_config(seed):
    return load_config({"noise_power": 1e-9, "seed": seed, "slots": 8,
                        "area": {"size": [250.0, 250.0], "start": [125.0, 125.0]},
                        "users": {"count": 2}})


def test_c5_aco_small_instance(acceptance_report):
    t0 = time.perf_counter()
    hits, monotone, ratios = 0, True, []
    for seed in range(20):
        cfg = _small_config(seed)
        sc = Scenario(cfg)
        _, gamma, hist = aco.run_aco(sc, cfg.aco, seed)
        opt = best_closed_walk(sc)[0]
        ratios.append(gamma / opt)
        hits += gamma >= 0.95 * opt
        best = [h.best_so_far for h in hist]
        monotone &= all(b >= a for a, b in zip(best, best[1:]))
    elapsed = time.perf_counter() - t0
    ok = hits >= 18 and monotone and elapsed < 120
    acceptance_report(5, "ACO vs closed-walk optimum (5x5, C=8, K=2)", ok,
                      f"{hits}/20 seeds >= 95% (need 18), min ratio {min(ratios):.4f}, "
                      f"history monotone {monotone}, {elapsed:.0f} s (< 120 s)")
    assert ok


def test_c6_scheme_ordering(acceptance_report):
    t0 = time.perf_counter()
    gammas = {"proposed": [], "rectangle": [], "normal_ac": []}
    for seed in range(10):
        cfg = load_config(REFERENCE, overrides=[f"seed={seed}", f"users.seed={seed}",
                                            "aco.n_rounds=20", "aco.n_ants=10"])
        res = run_joint_optimization(cfg)
        for k, v in res.gammas.items():
            gammas[k].append(v)
    mean = {k: float(np.mean(v)) for k, v in gammas.items()}
    elapsed = time.perf_counter() - t0
    ok = (mean["proposed"] >= mean["rectangle"]
          and mean["proposed"] >= 0.95 * mean["normal_ac"] and elapsed <= 1800)
    acceptance_report(6, "scheme ordering on 10 random 7-user scenarios", ok,
                      f"mean gamma proposed {mean['proposed']:.2f}, rectangle "
                      f"{mean['rectangle']:.2f}, normal-AC {mean['normal_ac']:.2f} bits; "
                      f"{elapsed:.0f} s")
    assert ok


PROPERTY_SUITES = ["test_geometry.py", "test_semantic.py", "test_rate.py",
                   "test_association.py", "test_aco.py", "test_config.py"]


def test_c7_invariant_suites(acceptance_report):
    # exact geometry identities
    identities = [
        path_length((3.0, 0.0), UserSite((0.0, 0.0)), 4.0, 0.0) == 5.0,
        path_difference(5.0, 0.0, 0.8) == 0.0,
    ]
    geom, layout = ArrayGeometry(20, 0.002, 30.0, 0.004), PortLayout(35, 0.002, 5)
    dominance = True
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        user = UserSite(tuple(rng.uniform(-500, 500, 2)), float(rng.uniform(0, 1e4)))
        sel = sorted(rng.choice(np.arange(1, 36), 5, replace=False).tolist())
        wc = worst_case_channel(geom, layout, sel, (0.0, 0.0), user)
        nom = build_channel(geom, layout, sel, (0.0, 0.0), user)
        dominance &= bool(np.all(np.abs(wc) <= np.abs(nom) * (1 + 1e-12)))
    exact = all(identities) and dominance
    # the per-module property suites (hypothesis, >= 1e3 examples where applicable)
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider"]
                          + [str(ROOT / "tests" / f) for f in PROPERTY_SUITES],
                          capture_output=True, text=True, cwd=ROOT)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    ok = exact and proc.returncode == 0
    acceptance_report(7, "invariant and property suites", ok,
                      f"3-4-5 / origin-antenna / worst-case dominance exact {exact}; "
                      f"property suites: {tail}")
    assert ok


def test_c8_run_is_deterministic(acceptance_report, tmp_path):
    args = ["--set", "slots=20", "--set", "aco.n_rounds=5", "--set", "aco.n_ants=8"]
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        subprocess.run([sys.executable, "-m", "fasuav", "run", str(REFERENCE), "--out", str(out)]
                       + args, check=True, capture_output=True)
        outs.append((out / "summary.json").read_bytes())
    ok = outs[0] == outs[1] and len(outs[0]) > 0
    acceptance_report(8, "byte-identical summary across two runs", ok,
                      f"{len(outs[0])} bytes, identical {outs[0] == outs[1]}")
    assert ok
