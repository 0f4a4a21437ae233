"""
Result persistence: CSV tables, a deterministic summary JSON and an SVG
overhead plot.

Files written by :func:`export` (all rates in bits per channel use):

``trajectory_<scheme>.csv``
    columns ``slot,x,y`` (slot is 1-based, x/y in meters at cell centres)
``rates_<scheme>.csv``
    columns ``user,slot_1..slot_C``: equivalent rate per user and slot
``association_<scheme>.csv``
    columns ``user,slot_1..slot_C``: 0/1 association
``summary.json``
    gamma per scheme, trajectories, ACO history, config echo and seed
``trajectories.svg``
    users and one polyline per scheme
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from xml.sax.saxutils import escape

from .config import to_document
from .scenario import RunResult

UNITS = "bits per channel use, summed over slots"

_COLOURS = {"proposed": "#d62728", "rectangle": "#1f77b4", "normal_ac": "#2ca02c"}


def _write_matrix(path: Path, table, fmt=repr):
    C = table.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["user"] + [f"slot_{c + 1}" for c in range(C)])
        for k, row in enumerate(table):
            w.writerow([k] + [fmt(float(v)) for v in row])


def write_trajectory_csv(path, positions) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "x", "y"])
        for c, (x, y) in enumerate(positions, start=1):
            w.writerow([c, repr(float(x)), repr(float(y))])


def read_trajectory_csv(path) -> list[tuple[float, float]]:
    """Positions in slot order; inverse of :func:`write_trajectory_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    rows.sort(key=lambda r: int(r["slot"]))
    return [(float(r["x"]), float(r["y"])) for r in rows]


def summary(result: RunResult) -> dict:
    cfg = result.config
    grid = cfg.grid
    schemes = {}
    for name, s in result.schemes.items():
        ev = s.evaluation
        schemes[name] = {
            "gamma": ev.gamma,
            "gamma_relaxed": ev.gamma_relaxed,
            "trajectory": [list(c) for c in ev.trajectory],
            "positions": [list(grid.position(c)) for c in ev.trajectory],
            "served_user": ev.served,
            "history": [{"round": r.round, "best_reward": r.best_reward,
                         "best_so_far": r.best_so_far} for r in s.history],
        }
    return {
        "units": UNITS,
        "seed": cfg.seed,
        "gamma": result.gammas,
        "users": [list(u.position) for u in cfg.users],
        "grid": {"nx": grid.nx, "ny": grid.ny, "cell_size": grid.cell_size,
                 "origin": list(grid.origin), "start_cell": list(grid.start_cell)},
        "schemes": schemes,
        "config": to_document(cfg),
    }


def dumps_summary(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def render_svg(doc: dict, size: int = 600) -> str:
    """Overhead plot from a summary document."""
    g = doc["grid"]
    ox, oy = g["origin"]
    w = g["nx"] * g["cell_size"]
    h = g["ny"] * g["cell_size"]
    pad = 20
    scale = (size - 2 * pad) / max(w, h)

    def px(x, y):
        # y axis points up in the plot
        return pad + (x - ox) * scale, size - pad - (y - oy) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect x="{pad}" y="{size - pad - h * scale:.2f}" width="{w * scale:.2f}" '
           f'height="{h * scale:.2f}" fill="none" stroke="#999"/>']
    for name in sorted(doc["schemes"]):
        pts = " ".join("%.2f,%.2f" % px(x, y) for x, y in doc["schemes"][name]["positions"])
        colour = _COLOURS.get(name, "#555")
        out.append(f'<polyline class="scheme" data-scheme="{escape(name)}" points="{pts}" '
                   f'fill="none" stroke="{colour}" stroke-width="2"/>')
    for k, (x, y) in enumerate(doc["users"]):
        cx, cy = px(x, y)
        out.append(f'<circle class="user" data-user="{k}" cx="{cx:.2f}" cy="{cy:.2f}" r="5" '
                   f'fill="black"/>')
    for i, name in enumerate(sorted(doc["schemes"])):
        gamma = doc["schemes"][name]["gamma"]
        out.append(f'<text x="{pad + 4}" y="{pad + 14 * (i + 1)}" font-size="12" '
                   f'fill="{_COLOURS.get(name, "#555")}">{escape(name)}: {gamma:.2f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export(result: RunResult, directory) -> list[Path]:
    """Write all result files into ``directory``; returns the paths written."""
    d = Path(directory)
    try:
        d.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {d}: {exc}") from exc
    doc = summary(result)
    written = []
    try:
        for name, s in result.schemes.items():
            p = d / f"trajectory_{name}.csv"
            write_trajectory_csv(p, doc["schemes"][name]["positions"])
            written.append(p)
            p = d / f"rates_{name}.csv"
            _write_matrix(p, s.evaluation.rate_table)
            written.append(p)
            p = d / f"association_{name}.csv"
            _write_matrix(p, s.evaluation.association, fmt=lambda v: str(int(round(v))))
            written.append(p)
        p = d / "summary.json"
        p.write_text(dumps_summary(doc))
        written.append(p)
        p = d / "trajectories.svg"
        p.write_text(render_svg(doc))
        written.append(p)
    except OSError as exc:
        raise OSError(f"failed writing {exc.filename or d}: {exc.strerror or exc}") from exc
    return written

