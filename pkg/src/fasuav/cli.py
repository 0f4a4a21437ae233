"""Command line interface: ``fasuav <verb> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import ConfigError


def _config(args):
    return load_config(Path(args.config), overrides=args.set or ())


def _add_config(p):
    p.add_argument("config", help="YAML/JSON scenario file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config field, e.g. --set aco.n_rounds=20 (repeatable)")


def cmd_validate(args) -> int:
    cfg = _config(args)
    g = cfg.grid
    print(f"ok: K={cfg.n_users} users, C={cfg.slots} slots, grid {g.nx}x{g.ny} "
          f"(cell {g.cell_size:g} m), start cell {g.start_cell}")
    return 0


def _run(args, schemes) -> int:
    from .export import export
    from .scenario import run_joint_optimization

    cfg = _config(args)
    t0 = time.perf_counter()
    result = run_joint_optimization(cfg, schemes=schemes)
    elapsed = time.perf_counter() - t0
    paths = export(result, args.out)
    for name, gamma in result.gammas.items():
        print(f"{name:10s} gamma = {gamma:.6f} bits")
    print(f"wrote {len(paths)} files to {args.out} ({elapsed:.1f} s)", file=sys.stderr)
    return 0


def cmd_run(args) -> int:
    from .scenario import SCHEMES
    return _run(args, tuple(args.schemes.split(",")) if args.schemes else SCHEMES)


def cmd_baseline_only(args) -> int:
    return _run(args, ("rectangle", "normal_ac"))


def cmd_export_plots(args) -> int:
    from .export import render_svg

    doc = json.loads(Path(args.summary).read_text())
    out = Path(args.out) if args.out else Path(args.summary).with_name("trajectories.svg")
    out.write_text(render_svg(doc))
    print(f"wrote {out}")
    return 0


def cmd_oracle(args) -> int:
    """Small-instance checks against the brute-force references."""
    from . import aco
    from .association import solve_association
    from .oracles import best_closed_walk, exhaustive_association, grid_capacity
    from .rate import waterfill
    from .scenario import Scenario

    ok_all = True

    def report(name, ok, detail):
        nonlocal ok_all
        ok_all &= ok
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    worst = 0.0
    for i in range(args.cases):
        rng = np.random.default_rng(i)
        m, n = rng.integers(1, 4), rng.integers(1, 5)
        G = (rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))) / np.sqrt(2)
        t, s2 = rng.uniform(0.1, 10), rng.uniform(0.1, 2)
        worst = max(worst, abs(waterfill(G, t, s2)[1] - grid_capacity(G, t, s2)[0]))
    report("water-filling vs grid search", worst <= 1e-5, f"max |diff| = {worst:.2e}")

    worst = 1.0
    for i in range(args.cases):
        rng = np.random.default_rng(1000 + i)
        R = rng.uniform(0, 1, size=(int(rng.integers(1, 4)), int(rng.integers(1, 7))))
        opt = exhaustive_association(R)[0]
        got = solve_association(R)[1]
        if opt > 0:
            worst = min(worst, got / opt)
    report("association vs exhaustive", worst >= 0.95, f"worst ratio = {worst:.4f}")

    hits = 0
    for seed in range(args.seeds):
        cfg = load_config({"noise_power": 1e-9, "seed": seed, "slots": 8,
                           "area": {"size": [250, 250], "start": [125, 125]},
                           "users": {"count": 2}})
        sc = Scenario(cfg)
        opt = best_closed_walk(sc)[0]
        gamma = aco.run_aco(sc, cfg.aco, seed)[1]
        hits += gamma >= 0.95 * opt
    report("ACO vs closed-walk enumeration (5x5, C=8, K=2)", hits >= 0.9 * args.seeds,
           f"{hits}/{args.seeds} seeds within 95% of optimum")
    return 0 if ok_all else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fasuav", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", help="check a config file and report every problem")
    _add_config(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run the proposed scheme and both baselines, then export")
    _add_config(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--schemes", help="comma-separated subset of proposed,rectangle,normal_ac")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("baseline-only", help="run only the rectangle and Normal-AC baselines")
    _add_config(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_baseline_only)

    p = sub.add_parser("export-plots", help="re-render the SVG plot from a summary.json")
    p.add_argument("summary", help="path to summary.json")
    p.add_argument("--out", help="SVG path (default: next to the summary)")
    p.set_defaults(func=cmd_export_plots)

    p = sub.add_parser("oracle", help="run the small-instance brute-force checks")
    p.add_argument("--cases", type=int, default=50, help="random cases per check")
    p.add_argument("--seeds", type=int, default=20, help="seeds for the ACO check")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("invalid config:", file=sys.stderr)
        for path, msg in exc.problems:
            print(f"  {path}: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
