import pytest

from slitlab.config import KINDS, ConfigError, load_config, parse_config

SIM = """\
[grid]
nx = 64
ny = 64
lx = 16
ly = 16

[slits]
barrier_x = -2
thickness = 1
width = 1
separation = 4
height_factor = 100

[packet]
x0 = -5
width = 1.5
kx = 6.283185307179586

[evolution]
screen_x = 4
"""


def test_parse_simulate_defaults():
    cfg = parse_config(SIM, "simulate")
    assert cfg.kind == "simulate"
    assert cfg.block("grid") == {"nx": 64, "ny": 64, "lx": 16.0, "ly": 16.0}
    assert cfg.block("slits")["mode"] == "double"
    assert cfg.block("packet")["y0"] == 0.0
    assert "dt" not in cfg.block("evolution")
    assert cfg.block("evolution")["absorber_width"] == 0


def test_missing_block_is_named():
    text = SIM.split("[slits]")[0] + "[packet]" + SIM.split("[packet]")[1]
    with pytest.raises(ConfigError, match=r"missing required block \[slits\]"):
        parse_config(text, "simulate")


def test_unknown_key_reports_line():
    text = SIM.replace("ly = 16\n", "ly = 16\nlz = 3\n")
    with pytest.raises(ConfigError, match=r"<string>:6: unknown key 'lz'"):
        parse_config(text, "simulate")


def test_bad_value_reports_line():
    text = SIM.replace("nx = 64", "nx = 6.5")
    with pytest.raises(ConfigError, match=r"<string>:2: bad value for 'nx'"):
        parse_config(text, "simulate")


def test_unknown_section():
    with pytest.raises(ConfigError, match=r"unknown section \[gird\]"):
        parse_config(SIM + "\n[gird]\nnx = 3\n", "simulate")


def test_missing_required_key():
    with pytest.raises(ConfigError, match="missing required key 'kx'"):
        parse_config(SIM.replace("kx = 6.283185307179586\n", ""), "simulate")


def test_height_exactly_one():
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(SIM.replace("height_factor = 100", "height_factor = 100\nheight = 5"), "simulate")
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(SIM.replace("height_factor = 100\n", ""), "simulate")


def test_list_and_row_values():
    cfg = parse_config("[sweep]\nqq_primes = 0, 0.5 1.5\nk_max = 10\n", "visibility-sweep")
    assert cfg.block("sweep")["qq_primes"] == [0.0, 0.5, 1.5]
    text = "[grid]\nnx=64\nny=64\nlx=8\nly=8\n[field]\nsource=vortex\nvortices=0 0 1; 1 1 -1\n" \
           "[loops]\ncircles = 0 0 1 64 # comment\n"
    cfg = parse_config(text, "winding")
    assert cfg.block("field")["vortices"] == [[0.0, 0.0, 1.0], [1.0, 1.0, -1.0]]
    assert cfg.block("loops")["circles"] == [[0.0, 0.0, 1.0, 64.0]]


def test_syntax_error_and_unknown_kind():
    with pytest.raises(ConfigError):
        parse_config("nx = 3\n", "simulate")
    with pytest.raises(ConfigError):
        parse_config(SIM, "fly")


def test_unrelated_blocks_ignored_for_kind():
    cfg = parse_config(SIM + "\n[sweep]\nqq_primes = 1\nk_max = 3\n", "simulate")
    assert not cfg.has("sweep")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "nope.ini", "simulate")


def test_shipped_configs_parse():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    kinds = {"simulate_default": "simulate", "simulate_small": "simulate", "winding_vortex": "winding",
             "currents_spinor": "currents", "currents_packet": "currents", "predict": "predict",
             "sweep": "visibility-sweep", "coupling": "estimate-coupling"}
    for name, kind in kinds.items():
        assert kind in KINDS
        load_config(root / f"{name}.ini", kind)
