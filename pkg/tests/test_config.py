import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fasuav.config import generate_users, load_config, parse_config, to_document
from fasuav.errors import ConfigError
from fasuav.geometry import REFERENCE_GAIN

ROOT = Path(__file__).resolve().parents[1]
REFERENCE = ROOT / "configs" / "reference.yaml"


def test_reference_document_is_valid():
    cfg = load_config(REFERENCE)
    assert cfg.geometry.n_antennas == 20 and cfg.ports.n_ports == 35 and cfg.ports.n_active == 5
    assert cfg.geometry.uav_height == 30.0 and cfg.geometry.wavelength == 0.004
    assert cfg.geometry.antenna_spacing == cfg.ports.port_spacing == 0.002
    assert cfg.p_max == 20.0 and cfg.d_max == 50.0 and cfg.slots == 60
    assert cfg.aco.n_rounds == 100 and cfg.aco.n_ants == 50
    assert cfg.start == (475.0, 475.0) and cfg.area_size == (1000.0, 1000.0)
    assert cfg.n_users == 7
    assert cfg.h0 == pytest.approx(REFERENCE_GAIN)
    g = cfg.grid
    assert (g.nx, g.ny, g.start_cell) == (20, 20, (9, 9))


def test_minimal_document_uses_defaults():
    cfg = load_config("noise_power: 1.0e-9\n")
    ref = load_config(REFERENCE)
    assert cfg.geometry == ref.geometry and cfg.ports == ref.ports
    assert cfg.load_model == ref.load_model and cfg.aco == ref.aco


def test_symbol_aliases():
    cfg = load_config({"sigma2": 1e-9, "C": 12, "P_max": 5.0,
                       "array": {"N": 4, "H": 50.0, "lambda": 0.01},
                       "ports": {"M": 6, "m0": 2}, "aco": {"N_A": 3, "I_r": 7, "v": 0.2}})
    assert cfg.slots == 12 and cfg.p_max == 5.0 and cfg.noise_power == 1e-9
    assert cfg.geometry.n_antennas == 4 and cfg.geometry.antenna_spacing == 0.005
    assert cfg.ports.port_spacing == 0.005
    assert (cfg.aco.n_ants, cfg.aco.n_rounds, cfg.aco.evaporation) == (3, 7, 0.2)


def test_too_many_active_ports():
    with pytest.raises(ConfigError) as exc:
        load_config({"noise_power": 1e-9, "ports": {"n_ports": 4, "n_active": 5}})
    assert [p for p, _ in exc.value.problems] == ["ports.n_active"]


def test_missing_noise_power_is_an_error():
    with pytest.raises(ConfigError) as exc:
        load_config({"seed": 1})
    assert exc.value.problems == [("noise_power", "required value is missing")]


def test_all_problems_reported_with_paths():
    doc = {"noise_power": 0, "slots": 1, "p_max": -1, "array": {"n_antennas": 2.5},
           "aco": {"evaporation": 1.5, "colour": "red"},
           "load_model": {"segments": [{"slope": 1.0, "intercept": 0.0, "lower_break": 0.5}]},
           "users": {"positions": [[1, 2], "x"]}}
    with pytest.raises(ConfigError) as exc:
        load_config(doc)
    paths = {p for p, _ in exc.value.problems}
    assert {"noise_power", "slots", "p_max", "array.n_antennas", "aco.evaporation",
            "aco.colour", "load_model.segments", "users.positions[1].position"} <= paths


def test_parse_error():
    with pytest.raises(ConfigError) as exc:
        load_config("a: [1, 2\n")
    assert "parse error" in exc.value.problems[0][1]


def test_overrides():
    cfg = load_config(REFERENCE, overrides=["aco.I_r=3", "C=20", "array.N=8", "users.count=2"])
    assert cfg.aco.n_rounds == 3 and cfg.slots == 20 and cfg.geometry.n_antennas == 8
    assert cfg.n_users == 2


def test_echo_round_trip():
    cfg = load_config(REFERENCE)
    echoed = json.loads(json.dumps(to_document(cfg)))
    assert parse_config(echoed) == cfg


@settings(max_examples=200)
@given(seed=st.integers(0, 10**6), K=st.integers(1, 9), C=st.integers(2, 90),
       V=st.floats(0, 100), robust=st.booleans(), edges=st.sampled_from(["directed", "undirected"]))
def test_echo_round_trip_random(seed, K, C, V, robust, edges):
    cfg = load_config({"noise_power": 1e-9, "seed": seed, "slots": C, "robust_mode": robust,
                       "users": {"count": K, "V": V}, "aco": {"edges": edges}})
    assert parse_config(json.loads(json.dumps(to_document(cfg)))) == cfg


# --- user generation ----------------------------------------------------------------

def test_single_user_in_bounds():
    (u,) = generate_users(1, (0.0, 0.0), (1000.0, 1000.0), 0)
    assert 0 <= u.position[0] <= 1000 and 0 <= u.position[1] <= 1000


def test_same_seed_same_layout():
    assert generate_users(7, (0, 0), (1000, 1000), 42) == generate_users(7, (0, 0), (1000, 1000), 42)
    assert generate_users(7, (0, 0), (1000, 1000), 42) != generate_users(7, (0, 0), (1000, 1000), 43)


def test_uniform_mean_near_centre():
    users = generate_users(10_000, (0.0, 0.0), (1000.0, 1000.0), 5)
    xy = np.array([u.position for u in users])
    sigma = 1000 / np.sqrt(12) / np.sqrt(len(xy))
    assert np.all(np.abs(xy.mean(axis=0) - 500.0) <= 3 * sigma)
    assert xy.min() >= 0 and xy.max() <= 1000
