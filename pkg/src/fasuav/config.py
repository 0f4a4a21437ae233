"""
Scenario configuration: parsing, validation and a canonical echo.

A config is a YAML (or JSON) mapping. Every key has a spelled-out name and
accepts the usual symbol as an alias, e.g. ``n_antennas`` / ``N``. The noise
power has no default and must be given explicitly. See
``configs/reference.yaml`` for a complete document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .aco import AcoParams, Grid
from .errors import ConfigError
from .geometry import REFERENCE_GAIN, ArrayGeometry, PortLayout, UserSite
from .rate import EPS1, EPS2, MAX_OUTER
from .semantic import DEFAULT_LOAD_MODEL, PiecewiseLoadModel, Segment, validate_load_model

_ALIASES = {
    "": {"C": "slots", "P_max": "p_max", "sigma2": "noise_power", "sigma_sq": "noise_power",
         "robust": "robust_mode"},
    "array": {"N": "n_antennas", "d_BS": "antenna_spacing", "H": "uav_height",
              "lambda": "wavelength"},
    "ports": {"M": "n_ports", "d_U": "port_spacing", "m0": "n_active"},
    "load_model": {},
    "segment": {"A": "slope", "B": "intercept", "D": "lower_break"},
    "area": {},
    "users": {"K": "count", "V": "uncertainty_radius_sq"},
    "user": {"V": "uncertainty_radius_sq", "w": "position"},
    "solver": {"epsilon_1": "eps1", "epsilon_2": "eps2"},
    "aco": {"N_A": "n_ants", "I_r": "n_rounds", "v": "evaporation", "tau_0": "tau0"},
}

_KEYS = {
    "": {"seed", "slots", "p_max", "noise_power", "h0", "h0_sq_db", "d_max", "robust_mode",
         "array", "ports", "load_model", "area", "users", "solver", "aco"},
    "array": {"n_antennas", "antenna_spacing", "uav_height", "wavelength"},
    "ports": {"n_ports", "port_spacing", "n_active"},
    "load_model": {"p0", "segments"},
    "segment": {"slope", "intercept", "lower_break"},
    "area": {"origin", "size", "start"},
    "users": {"count", "seed", "uncertainty_radius_sq", "positions"},
    "user": {"position", "uncertainty_radius_sq"},
    "solver": {"eps1", "eps2", "max_outer"},
    "aco": {"n_ants", "n_rounds", "alpha", "beta", "evaporation", "tau0", "edges"},
}


@dataclass(frozen=True)
class ScenarioConfig:
    noise_power: float
    users: tuple[UserSite, ...]
    geometry: ArrayGeometry = ArrayGeometry(20, 0.002, 30.0, 0.004)
    ports: PortLayout = PortLayout(35, 0.002, 5)
    load_model: PiecewiseLoadModel = DEFAULT_LOAD_MODEL
    area_origin: tuple[float, float] = (0.0, 0.0)
    area_size: tuple[float, float] = (1000.0, 1000.0)
    start: tuple[float, float] = (475.0, 475.0)
    slots: int = 60
    p_max: float = 20.0
    h0: float = REFERENCE_GAIN
    d_max: float = 50.0
    robust_mode: bool = False
    eps1: float = EPS1
    eps2: float = EPS2
    max_outer: int = MAX_OUTER
    aco: AcoParams = field(default_factory=AcoParams)
    normal_ac_directed: bool = True
    seed: int = 0

    @property
    def grid(self) -> Grid:
        nx = max(1, math.ceil(self.area_size[0] / self.d_max - 1e-9))
        ny = max(1, math.ceil(self.area_size[1] / self.d_max - 1e-9))
        g = Grid(nx, ny, self.d_max, self.area_origin)
        return Grid(nx, ny, self.d_max, self.area_origin, g.cell_of(self.start))

    @property
    def n_users(self) -> int:
        return len(self.users)


def generate_users(K: int, area_origin, area_size, seed: int,
                   uncertainty_radius_sq: float = 0.0) -> tuple[UserSite, ...]:
    """``K`` users placed uniformly at random in the rectangular area."""
    if K < 1:
        raise ValueError("K must be >= 1")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, 1.0, size=(K, 2)) * np.asarray(area_size, float) \
        + np.asarray(area_origin, float)
    return tuple(UserSite((float(x), float(y)), uncertainty_radius_sq) for x, y in xy)


# ---------------------------------------------------------------------------
# parsing

class _Reader:
    def __init__(self):
        self.problems: list[tuple[str, str]] = []

    def fail(self, path, msg):
        self.problems.append((path or "<document>", msg))

    def section(self, doc, kind, path):
        if doc is None:
            return {}
        if not isinstance(doc, Mapping):
            self.fail(path, "expected a mapping")
            return {}
        out = {}
        aliases = _ALIASES.get(kind, {})
        for key, value in doc.items():
            name = aliases.get(key, key)
            if name not in _KEYS[kind]:
                self.fail(_join(path, str(key)), "unknown key")
                continue
            if name in out:
                self.fail(_join(path, str(key)), f"duplicate of '{name}'")
                continue
            out[name] = value
        return out

    def number(self, sec, key, path, default=None, *, integer=False, check=None, what=""):
        if key not in sec:
            if default is None:
                self.fail(_join(path, key), "required value is missing")
            return default
        raw = sec[key]
        try:
            if isinstance(raw, bool):
                raise TypeError
            val = float(raw)
            if integer:
                if val != int(val):
                    raise ValueError
                val = int(val)
        except (TypeError, ValueError):
            self.fail(_join(path, key), f"expected {'an integer' if integer else 'a number'}, got {raw!r}")
            return default
        if not math.isfinite(val):
            self.fail(_join(path, key), "must be finite")
            return default
        if check is not None and not check(val):
            self.fail(_join(path, key), f"must be {what}")
            return default
        return val

    def flag(self, sec, key, path, default):
        if key not in sec:
            return default
        if not isinstance(sec[key], bool):
            self.fail(_join(path, key), f"expected true/false, got {sec[key]!r}")
            return default
        return sec[key]

    def pair(self, sec, key, path, default, check=None, what=""):
        if key not in sec:
            return default
        raw = sec[key]
        try:
            x, y = (float(v) for v in raw)
        except (TypeError, ValueError):
            self.fail(_join(path, key), f"expected a pair of numbers, got {raw!r}")
            return default
        if check is not None and not (check(x) and check(y)):
            self.fail(_join(path, key), f"entries must be {what}")
            return default
        return (x, y)


def _join(path, key):
    return f"{path}.{key}" if path else key


def _positive(x):
    return x > 0


def parse_config(doc: Mapping[str, Any]) -> ScenarioConfig:
    """Validate a config mapping; raises :class:`ConfigError` listing every problem."""
    r = _Reader()
    if not isinstance(doc, Mapping):
        raise ConfigError([("<document>", "top level must be a mapping")])
    top = r.section(doc, "", "")

    seed = r.number(top, "seed", "", 0, integer=True)
    slots = r.number(top, "slots", "", 60, integer=True, check=lambda v: v >= 2, what=">= 2")
    p_max = r.number(top, "p_max", "", 20.0, check=_positive, what="> 0")
    noise = r.number(top, "noise_power", "", None, check=_positive, what="> 0")
    d_max = r.number(top, "d_max", "", 50.0, check=_positive, what="> 0")
    robust = r.flag(top, "robust_mode", "", False)
    if "h0" in top and "h0_sq_db" in top:
        r.fail("h0", "give either h0 or h0_sq_db, not both")
    if "h0_sq_db" in top:
        db = r.number(top, "h0_sq_db", "", -10.0)
        h0 = 10.0 ** (db / 20.0)
    else:
        h0 = r.number(top, "h0", "", REFERENCE_GAIN, check=_positive, what="> 0")

    arr = r.section(top.get("array"), "array", "array")
    N = r.number(arr, "n_antennas", "array", 20, integer=True, check=lambda v: v >= 1, what=">= 1")
    wl = r.number(arr, "wavelength", "array", 0.004, check=_positive, what="> 0")
    d_bs = r.number(arr, "antenna_spacing", "array", wl / 2, check=_positive, what="> 0")
    H = r.number(arr, "uav_height", "array", 30.0, check=_positive, what="> 0")

    prt = r.section(top.get("ports"), "ports", "ports")
    M = r.number(prt, "n_ports", "ports", 35, integer=True, check=lambda v: v >= 1, what=">= 1")
    d_u = r.number(prt, "port_spacing", "ports", wl / 2, check=_positive, what="> 0")
    m0 = r.number(prt, "n_active", "ports", 5, integer=True, check=lambda v: v >= 1, what=">= 1")
    if M is not None and m0 is not None and m0 > M:
        r.fail("ports.n_active", f"must not exceed n_ports ({M})")

    load_model = _parse_load_model(r, top.get("load_model"))

    area = r.section(top.get("area"), "area", "area")
    origin = r.pair(area, "origin", "area", (0.0, 0.0))
    size = r.pair(area, "size", "area", (1000.0, 1000.0), check=_positive, what="> 0")
    start = r.pair(area, "start", "area", (origin[0] + 475.0, origin[1] + 475.0))
    if not (origin[0] <= start[0] < origin[0] + size[0] and origin[1] <= start[1] < origin[1] + size[1]):
        r.fail("area.start", "start position lies outside the area")

    users = _parse_users(r, top.get("users"), origin, size, seed)

    sol = r.section(top.get("solver"), "solver", "solver")
    eps1 = r.number(sol, "eps1", "solver", EPS1, check=_positive, what="> 0")
    eps2 = r.number(sol, "eps2", "solver", EPS2, check=_positive, what="> 0")
    max_outer = r.number(sol, "max_outer", "solver", MAX_OUTER, integer=True,
                         check=lambda v: v >= 1, what=">= 1")

    aco_sec = r.section(top.get("aco"), "aco", "aco")
    defaults = AcoParams()
    aco_kw = dict(
        n_ants=r.number(aco_sec, "n_ants", "aco", defaults.n_ants, integer=True,
                        check=lambda v: v >= 1, what=">= 1"),
        n_rounds=r.number(aco_sec, "n_rounds", "aco", defaults.n_rounds, integer=True,
                          check=lambda v: v >= 1, what=">= 1"),
        alpha=r.number(aco_sec, "alpha", "aco", defaults.alpha, check=lambda v: v >= 0, what=">= 0"),
        beta=r.number(aco_sec, "beta", "aco", defaults.beta, check=lambda v: v >= 0, what=">= 0"),
        evaporation=r.number(aco_sec, "evaporation", "aco", defaults.evaporation,
                             check=lambda v: 0 <= v < 1, what="in [0, 1)"),
        tau0=r.number(aco_sec, "tau0", "aco", defaults.tau0, check=_positive, what="> 0"),
    )
    edges = aco_sec.get("edges", "directed")
    if edges not in ("directed", "undirected"):
        r.fail("aco.edges", "must be 'directed' or 'undirected'")

    if r.problems:
        raise ConfigError(r.problems)
    try:
        return ScenarioConfig(
            noise_power=noise, users=users,
            geometry=ArrayGeometry(N, d_bs, H, wl), ports=PortLayout(M, d_u, m0),
            load_model=load_model, area_origin=origin, area_size=size, start=start,
            slots=slots, p_max=p_max, h0=h0, d_max=d_max, robust_mode=robust,
            eps1=eps1, eps2=eps2, max_outer=max_outer, aco=AcoParams(**aco_kw),
            normal_ac_directed=(edges == "directed"), seed=seed)
    except ValueError as exc:
        raise ConfigError([("<document>", str(exc))]) from None


def _parse_load_model(r: _Reader, doc) -> PiecewiseLoadModel:
    if doc is None:
        return DEFAULT_LOAD_MODEL
    sec = r.section(doc, "load_model", "load_model")
    p0 = r.number(sec, "p0", "load_model", 1.0, check=_positive, what="> 0")
    raw = sec.get("segments")
    if raw is None:
        return PiecewiseLoadModel(DEFAULT_LOAD_MODEL.segments, p0) if p0 else DEFAULT_LOAD_MODEL
    if not isinstance(raw, list) or not raw:
        r.fail("load_model.segments", "expected a non-empty list")
        return DEFAULT_LOAD_MODEL
    segs = []
    for i, item in enumerate(raw):
        path = f"load_model.segments[{i}]"
        s = r.section(item, "segment", path)
        vals = [r.number(s, k, path) for k in ("slope", "intercept", "lower_break")]
        if None in vals:
            return DEFAULT_LOAD_MODEL
        segs.append(Segment(*vals))
    problems = validate_load_model(tuple(segs), p0 or 1.0)
    for msg in problems:
        r.fail("load_model.segments", msg)
    if problems or not p0:
        return DEFAULT_LOAD_MODEL
    return PiecewiseLoadModel(tuple(segs), p0)


def _parse_users(r: _Reader, doc, origin, size, seed):
    if isinstance(doc, list):
        doc = {"positions": doc}
    sec = r.section(doc, "users", "users")
    V = r.number(sec, "uncertainty_radius_sq", "users", 0.0, check=lambda v: v >= 0, what=">= 0")
    if "positions" in sec:
        if "count" in sec or "seed" in sec:
            r.fail("users", "give either explicit positions or count/seed, not both")
        raw = sec["positions"]
        if not isinstance(raw, list) or not raw:
            r.fail("users.positions", "expected a non-empty list")
            return ()
        users = []
        for i, item in enumerate(raw):
            path = f"users.positions[{i}]"
            if isinstance(item, Mapping):
                u = r.section(item, "user", path)
                pos = r.pair(u, "position", path, None)
                if pos is None:
                    r.fail(_join(path, "position"), "required value is missing")
                    continue
                v = r.number(u, "uncertainty_radius_sq", path, V, check=lambda x: x >= 0, what=">= 0")
            else:
                pos = r.pair({"position": item}, "position", path, None)
                if pos is None:
                    continue
                v = V
            users.append(UserSite(pos, v if v is not None else 0.0))
        return tuple(users)
    K = r.number(sec, "count", "users", 7, integer=True, check=lambda v: v >= 1, what=">= 1")
    useed = r.number(sec, "seed", "users", seed if seed is not None else 0, integer=True)
    if K is None or useed is None or V is None:
        return ()
    return generate_users(K, origin, size, useed, V)


def load_config(source, overrides=()) -> ScenarioConfig:
    """Load a config from a path, a YAML/JSON string, or a mapping.

    ``overrides`` are ``"dotted.key=value"`` strings applied before
    validation (values are parsed as YAML scalars).
    """
    if isinstance(source, Mapping):
        doc = dict(source)
    else:
        text = source
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source
                                        and Path(source).is_file()):
            try:
                text = Path(source).read_text()
            except OSError as exc:
                raise ConfigError([(str(source), f"cannot read file: {exc}")]) from None
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError([("<document>", f"parse error: {exc}")]) from None
        if doc is None:
            doc = {}
    doc = apply_overrides(doc, overrides)
    return parse_config(doc)


def apply_overrides(doc, overrides):
    import copy
    doc = copy.deepcopy(doc) if isinstance(doc, Mapping) else doc
    for item in overrides:
        if "=" not in item:
            raise ConfigError([(item, "override must look like key.path=value")])
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = doc
        for i, p in enumerate(parts[:-1]):
            p = _ALIASES[""].get(p, p) if i == 0 else p
            if not isinstance(node.get(p), Mapping):
                node[p] = {}
            node = node[p]
        kind = _ALIASES[""].get(parts[0], parts[0]) if len(parts) > 1 else ""
        aliases = _ALIASES.get(kind, {}) if len(parts) <= 2 else {}
        name = aliases.get(parts[-1], parts[-1])
        # drop any spelling of the same field already present
        for k in [k for k in node if aliases.get(k, k) == name]:
            del node[k]
        node[name] = yaml.safe_load(raw)
    return doc


def to_document(cfg: ScenarioConfig) -> dict:
    """Canonical mapping that :func:`parse_config` turns back into ``cfg``."""
    g, p, aco = cfg.geometry, cfg.ports, cfg.aco
    return {
        "seed": cfg.seed,
        "slots": cfg.slots,
        "p_max": cfg.p_max,
        "noise_power": cfg.noise_power,
        "h0": cfg.h0,
        "d_max": cfg.d_max,
        "robust_mode": cfg.robust_mode,
        "array": {"n_antennas": g.n_antennas, "antenna_spacing": g.antenna_spacing,
                  "uav_height": g.uav_height, "wavelength": g.wavelength},
        "ports": {"n_ports": p.n_ports, "port_spacing": p.port_spacing, "n_active": p.n_active},
        "load_model": {"p0": cfg.load_model.p0,
                       "segments": [{"slope": s.slope, "intercept": s.intercept,
                                     "lower_break": s.lower_break}
                                    for s in cfg.load_model.segments]},
        "area": {"origin": list(cfg.area_origin), "size": list(cfg.area_size),
                 "start": list(cfg.start)},
        "users": {"positions": [{"position": list(u.position),
                                 "uncertainty_radius_sq": u.uncertainty_radius_sq}
                                for u in cfg.users]},
        "solver": {"eps1": cfg.eps1, "eps2": cfg.eps2, "max_outer": cfg.max_outer},
        "aco": {"n_ants": aco.n_ants, "n_rounds": aco.n_rounds, "alpha": aco.alpha,
                "beta": aco.beta, "evaporation": aco.evaporation, "tau0": aco.tau0,
                "edges": "directed" if cfg.normal_ac_directed else "undirected"},
    }
