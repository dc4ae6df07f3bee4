import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from frmcs_sim import (ConfigParseError, ConfigValidationError, ScenarioConfig,
                       TrainTrajectory, build_layout, config_from_dict,
                       load_config, make_trajectories, save_config,
                       train_position)
from frmcs_sim.scenario import TRAIN_SPEED_500_KMH_MPS


def test_defaults_match_reference_scenario():
    cfg = ScenarioConfig()
    assert cfg.carrier_frequency_hz == 900e6
    assert cfg.bandwidth_hz == 3e6
    assert cfg.subcarrier_spacing_hz == 15e3
    assert cfg.duplex_mode == "FDD"
    assert cfg.isd_m == 8000.0
    assert cfg.track_length_m == 16000.0
    assert cfg.sim_duration_s == 115.14
    assert cfg.n_trains == 2
    assert cfg.gnb_height_m == 35.0
    assert cfg.ue_height_m == 4.0
    assert cfg.n_realizations == 29
    assert cfg.traffic.packet_size_bits == 4e6
    assert cfg.traffic.arrival_rate_pps == 2.5
    assert cfg.sweep.a3_offset_db == (2.0, 4.0, 6.0, 8.0)
    assert cfg.sweep.ttt_ms == (80.0, 160.0, 240.0)
    # 500 km/h stored exactly; the full run stays on the track
    assert cfg.train_speed_mps == 1250.0 / 9.0
    assert cfg.sim_duration_s * cfg.train_speed_mps <= cfg.track_length_m


def test_load_config_table_values(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({
        "carrier_frequency_hz": 900e6,
        "bandwidth_hz": 3e6,
        "n_realizations": 29,
    }))
    cfg = load_config(path)
    assert cfg.carrier_frequency_hz == 900e6
    assert cfg.bandwidth_hz == 3e6
    assert cfg.n_realizations == 29


def test_load_config_defaults_fill(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{}")
    cfg = load_config(path)
    assert cfg == ScenarioConfig()


def test_eirp_cap_violation_named(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"eirp_dbm": 70.0}))
    with pytest.raises(ConfigValidationError, match="EIRP exceeds 63 dBm cap"):
        load_config(path)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigValidationError, match="unknown config key"):
        config_from_dict({"isd_km": 8})
    with pytest.raises(ConfigValidationError, match="unknown key"):
        config_from_dict({"radio": {"sigma": 4}})


def test_malformed_json_is_parse_error(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigParseError):
        load_config(path)


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ConfigParseError):
        load_config(tmp_path / "nope.json")


@pytest.mark.parametrize("overrides,fragment", [
    ({"n_trains": 0}, "n_trains"),
    ({"sim_duration_s": -1.0}, "strictly positive"),
    ({"duplex_mode": "TDD"}, "FDD"),
    ({"sim_duration_s": 200.0}, "track_length_m"),
    ({"traffic": {"arrival_rate_pps": -2.0}}, "arrival_rate_pps"),
])
def test_invariant_violations(overrides, fragment):
    with pytest.raises((ConfigValidationError, ValueError), match=fragment):
        config_from_dict(overrides)


def test_config_round_trip(tmp_path):
    cfg = config_from_dict({
        "eirp_dbm": 58.5,
        "base_seed": 7,
        "radio": {"sf_sigma_nlos_db": 7.5, "interference_mode": "full_buffer_neighbors"},
        "measurement": {"offset_db": 6.0, "ttt_ms": 240.0},
        "traffic": {"arrival_rate_pps": 0.25},
        "sweep": {"a3_offset_db": [2.0, 8.0], "ttt_ms": [80.0]},
    })
    path = tmp_path / "roundtrip.json"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_build_layout_site_grid():
    cfg = ScenarioConfig()
    layout = build_layout(cfg)
    assert [s.x_m for s in layout.sites] == [0.0, 8000.0, 16000.0]
    assert all(s.height_m == 35.0 for s in layout.sites)
    assert all(s.y_m == cfg.rail_offset_m for s in layout.sites)
    spacings = np.diff([s.x_m for s in layout.sites])
    assert np.all(spacings == cfg.isd_m)


def test_build_layout_site_counts():
    assert len(build_layout(config_from_dict(
        {"track_length_m": 8000.0, "sim_duration_s": 57.0})).sites) == 2
    assert len(build_layout(config_from_dict({"isd_m": 4000.0})).sites) == 5


def _traj(start=0.0, direction=1):
    return TrainTrajectory(train_id=0, direction=direction, start_offset_m=start,
                           speed_mps=TRAIN_SPEED_500_KMH_MPS, antenna_height_m=4.0)


def test_train_position_full_run():
    # 1250/9 m/s for 115.14 s = 15991.666... m (hand-checked product)
    x, y = train_position(_traj(), 115.14, 16000.0, 115.14)
    assert x == pytest.approx(15991.666666666666, abs=1e-6)
    assert y == 0.0


def test_train_position_identity_at_t0():
    x, _ = train_position(_traj(start=1234.5), 0.0, 16000.0, 115.14)
    assert x == 1234.5


def test_train_position_wraps():
    # 15000 + (1250/9) * 14.4 = 17000 -> wraps to 1000
    x, _ = train_position(_traj(start=15000.0), 14.4, 16000.0, 115.14)
    assert x == pytest.approx(1000.0, abs=1e-9)


def test_train_position_rejects_out_of_range_time():
    with pytest.raises(ValueError):
        train_position(_traj(), 200.0, 16000.0, 115.14)
    with pytest.raises(ValueError):
        train_position(_traj(), -0.1, 16000.0, 115.14)


@given(st.floats(min_value=0.0, max_value=115.14),
       st.floats(min_value=0.0, max_value=16000.0, exclude_max=True))
def test_position_stays_on_track(t, start):
    for direction in (1, -1):
        x, _ = train_position(_traj(start=start, direction=direction),
                              t, 16000.0, 115.14)
        assert 0.0 <= x < 16000.0


@given(st.floats(min_value=0.0, max_value=115.14),
       st.floats(min_value=1e-6, max_value=16000.0, exclude_max=True))
def test_opposite_trains_mirror(t, start):
    a = _traj(start=start, direction=1)
    b = _traj(start=16000.0 - start, direction=-1)
    xa, _ = train_position(a, t, 16000.0, 115.14)
    xb, _ = train_position(b, t, 16000.0, 115.14)
    assert (xa + xb) % 16000.0 == pytest.approx(0.0, abs=1e-6) or \
        xa + xb == pytest.approx(16000.0, abs=1e-6)


def test_nearest_site_distance_bound():
    cfg = ScenarioConfig()
    layout = build_layout(cfg)
    site_x = np.array([s.x_m for s in layout.sites])
    bound = np.hypot(cfg.isd_m / 2, cfg.rail_offset_m) + 1e-9
    t = np.linspace(0.0, cfg.sim_duration_s, 2000)
    for start in (0.0, 3123.4, 12999.0):
        x, _ = train_position(_traj(start=start), t, cfg.track_length_m,
                              cfg.sim_duration_s)
        d = np.hypot(x[:, None] - site_x[None, :], cfg.rail_offset_m)
        assert np.all(d.min(axis=1) <= bound)


def test_make_trajectories_randomized_starts_opposite_directions():
    cfg = ScenarioConfig()
    rng = np.random.default_rng(0)
    trajs = make_trajectories(cfg, rng)
    assert len(trajs) == cfg.n_trains
    assert trajs[0].direction == 1 and trajs[1].direction == -1
    assert all(0.0 <= tr.start_offset_m < cfg.track_length_m for tr in trajs)
    trajs2 = make_trajectories(cfg, np.random.default_rng(0))
    assert [t.start_offset_m for t in trajs] == [t.start_offset_m for t in trajs2]
