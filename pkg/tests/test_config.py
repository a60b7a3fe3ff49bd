import dataclasses

import pytest

import susyoptics as so
from susyoptics import ConfigurationError
from susyoptics.config import CONFIG_KEYS, validate


def test_defaults(tmp_path):
    cfg = so.parse_config(None)
    assert cfg.scenario == "all"
    assert cfg.grid_points == 2048
    assert cfg.steps_per_period == 60
    assert cfg.convergence_steps == (15, 30, 60, 120, 240)
    # with no file every key is a default and says so
    assert set(cfg.defaulted_keys) == set(CONFIG_KEYS)
    assert validate(cfg) == []


def test_parse_file_tracks_defaulted_keys(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment line\n\nomega = 2.0\ngrid_points=1024\n")
    cfg = so.parse_config(path)
    assert cfg.omega == 2.0
    assert cfg.grid_points == 1024
    assert "omega" not in cfg.defaulted_keys
    assert "grid_points" not in cfg.defaulted_keys
    assert "x0_mm" in cfg.defaulted_keys


def test_parse_tuple_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("convergence_steps = 10, 20, 40\n")
    cfg = so.parse_config(path)
    assert cfg.convergence_steps == (10, 20, 40)


def test_unknown_key_is_error_with_location(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("omega = 1.0\ngridpoints = 512\n")
    with pytest.raises(ConfigurationError) as err:
        so.parse_config(path)
    msg = str(err.value)
    assert "gridpoints" in msg and ":2:" in msg


def test_all_problems_reported_at_once(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("x0_mm = fast\nomega = 1.0\nomega = 2.0\nbad line\nmystery = 3\n")
    with pytest.raises(ConfigurationError) as err:
        so.parse_config(path)
    msg = str(err.value)
    assert "x0_mm" in msg          # unparseable float
    assert "duplicate" in msg      # repeated key
    assert "bad line" in msg       # missing separator
    assert "mystery" in msg        # unknown key


def test_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        so.parse_config(tmp_path / "absent.cfg")


@pytest.mark.parametrize("override,fragment", [
    (dict(scenario="spectral"), "scenario"),
    (dict(grid_points=1), "grid_points"),
    (dict(omega=-2.0), "omega"),
    (dict(x_min_x0=5.0, x_max_x0=-5.0), "domain"),
    (dict(x_center_x0=40.0), "x_center_x0"),
    (dict(convergence_steps=(30, 15)), "convergence_steps"),
    (dict(spectrum_levels=16), "spectrum_levels"),
    (dict(eta_points=80), "eta grid"),
    (dict(aperture_x0=20.0), "aperture_x0"),
    (dict(parity_mode="mirror"), "parity_mode"),
    (dict(fidelity_convention="overlap"), "fidelity_convention"),
    (dict(battery_size=0), "battery_size"),
])
def test_validate_rules(override, fragment):
    cfg = dataclasses.replace(so.parse_config(None), **override)
    problems = validate(cfg)
    assert problems, f"expected a violation for {override}"
    assert any(fragment in p for p in problems)


def test_eta_grid_must_hold_landmarks():
    # 81 points over [-2, 2] lands exactly on -1, 0, 1; 81 over [-2, 1.9] does not
    good = dataclasses.replace(so.parse_config(None), eta_max=2.0, eta_points=81)
    assert validate(good) == []
    bad = dataclasses.replace(so.parse_config(None), eta_max=1.9, eta_points=81)
    assert validate(bad)


def test_serialize_roundtrip_fixed_point(tmp_path):
    cfg = so.parse_config(None)
    text = so.serialize_config(cfg)
    path = tmp_path / "canon.cfg"
    path.write_text(text)
    reparsed = so.parse_config(path)
    assert reparsed == cfg
    assert so.serialize_config(reparsed) == text
    # nothing was defaulted on the reparse: every key is in the file
    assert reparsed.defaulted_keys == ()


def test_serialize_covers_every_key():
    text = so.serialize_config(so.parse_config(None))
    keys = {line.split("=")[0].strip() for line in text.splitlines()
            if line and not line.startswith("#")}
    assert keys == set(CONFIG_KEYS)


def test_config_hash_tracks_content():
    base = so.parse_config(None)
    assert so.config_hash(base) == so.config_hash(so.parse_config(None))
    bumped = dataclasses.replace(base, omega=2.0)
    assert so.config_hash(bumped) != so.config_hash(base)
    assert len(so.config_hash(base)) == 12
    # provenance bookkeeping does not change identity
    marked = dataclasses.replace(base, defaulted_keys=())
    assert so.config_hash(marked) == so.config_hash(base)


def test_float_formats_preserved(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("omega = 0.30000000000000004\n")
    cfg = so.parse_config(path)
    assert cfg.omega == 0.1 + 0.2
    assert "0.30000000000000004" in so.serialize_config(cfg)
