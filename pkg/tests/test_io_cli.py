import os

import numpy as np
import pytest

from mixzone import io_formats
from mixzone.cli import main
from mixzone.curves import build_scenario
from mixzone.io_formats import Config, ConfigError, parse_config


def test_config_defaults_valid():
    cfg = Config()
    io_formats.validate_config(cfg)
    assert cfg.n == 512 and cfg.eta == 0.25


def test_config_parse_and_errors(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("n = 128\ndt = 0.005\noutput_times = 0.01\nt_final = 0.02\n")
    cfg = parse_config(str(p))
    assert cfg.n == 128
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("bogus = 1\n", is_text=True)
    with pytest.raises(ConfigError, match="dt"):
        parse_config("dt = 0\n", is_text=True)
    with pytest.raises(ConfigError, match="multiple of dt"):
        parse_config("dt = 0.003\noutput_times = 0.01\n", is_text=True)


def test_curve_roundtrip(tmp_path):
    c = build_scenario("unit-circle", 64)
    path = tmp_path / "curve.txt"
    io_formats.write_curve(str(path), c, t=0.125)
    c2, t = io_formats.read_curve(str(path))
    assert t == 0.125
    assert c2.topology == c.topology
    assert c2.ell == c.ell          # header parses back bit-exact
    assert np.array_equal(c2.z, c.z)  # 17 significant digits round-trip


def test_manifest_hashes(tmp_path):
    (tmp_path / "a.txt").write_text("alpha")
    (tmp_path / "b.txt").write_text("beta")
    io_formats.write_manifest(str(tmp_path))
    man = io_formats.read_manifest(str(tmp_path / "MANIFEST.txt"))
    assert set(man) == {"a.txt", "b.txt"}
    import hashlib
    assert man["a.txt"] == hashlib.sha256(b"alpha").hexdigest()


CFG_SMALL = """
scenario = unit-circle
n = 128
dt = 0.005
t_final = 0.01
output_times = 0.005 0.01
ladder_times = 0.01 0.005
weak_grids = 40 80
field_nx = 60
field_ny = 60
output_dir = {out}
"""


def test_cli_simulate_fields_and_errors(tmp_path):
    out = tmp_path / "run"
    cfg_path = tmp_path / "cfg.txt"
    cfg_path.write_text(CFG_SMALL.format(out=out))
    assert main(["simulate", "--config", str(cfg_path)]) == 0
    names = sorted(os.listdir(out))
    assert "MANIFEST.txt" in names and "diagnostics.txt" in names
    assert sum(n.startswith("curve_t") for n in names) >= 3
    assert main(["fields", "--config", str(cfg_path), "--time", "0.01"]) == 0
    # out-of-range time -> missing-input exit code
    assert main(["fields", "--config", str(cfg_path), "--time", "0.33"]) == 3
    # schema rejection, no outputs
    bad = tmp_path / "bad.cfg"
    bad.write_text("dt = 0\n")
    assert main(["simulate", "--config", str(bad)]) == 2


def test_cli_deterministic_outputs(tmp_path):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        cfg_path = tmp_path / f"{name}.cfg"
        cfg_path.write_text(CFG_SMALL.format(out=out))
        assert main(["simulate", "--config", str(cfg_path)]) == 0
        outs.append(out)
    for fname in os.listdir(outs[0]):
        if fname == "config.txt":
            continue  # embeds the output path
        if fname == "MANIFEST.txt":
            m1 = io_formats.read_manifest(str(outs[0] / fname))
            m2 = io_formats.read_manifest(str(outs[1] / fname))
            m1.pop("config.txt"), m2.pop("config.txt")
            assert m1 == m2
            continue
        a = (outs[0] / fname).read_bytes()
        b = (outs[1] / fname).read_bytes()
        assert a == b, f"nondeterministic output {fname}"


def test_cli_turned_headers(tmp_path):
    # turned geometry needs n >= 512 to satisfy the constant-speed residual;
    # a single step suffices to exercise the artifact set
    out = tmp_path / "turned"
    cfg_path = tmp_path / "cfg.txt"
    cfg_path.write_text(
        f"scenario = turned-graph\nn = 512\ndt = 0.005\nt_final = 0.005\n"
        f"output_times = 0.005\nladder_times = 0.005 0.0025\n"
        f"output_dir = {out}\n")
    assert main(["simulate", "--config", str(cfg_path)]) == 0
    curve, t = io_formats.read_curve(str(out / "curve_t0.005000.txt"))
    assert curve.topology == "periodic-graph"


def test_cli_density_levels_differ_only_on_mix(tmp_path):
    out = tmp_path / "run"
    cfg_path = tmp_path / "cfg.txt"
    cfg_path.write_text(CFG_SMALL.format(out=out))
    assert main(["simulate", "--config", str(cfg_path)]) == 0
    assert main(["fields", "--config", str(cfg_path), "--time", "0.01"]) == 0
    os.rename(out / "fields_t0.010000_N1.txt", out / "N1.txt")
    assert main(["fields", "--config", str(cfg_path), "--time", "0.01",
                 "--levels", "2"]) == 0
    _, cols, d1 = io_formats._read(str(out / "N1.txt"))
    _, _, d2 = io_formats._read(str(out / "fields_t0.010000_N2.txt"))
    lab1, rho1 = d1[:, 2], d1[:, 3]
    lab2, rho2 = d2[:, 2], d2[:, 3]
    settled = (lab1 != 0) & (lab2 != 0) & (lab1 != 2) & (lab2 != 2)
    assert np.array_equal(rho1[settled], rho2[settled])
    mix_both = (lab1 == 0) & (lab2 == 0)
    if mix_both.any():
        assert not np.array_equal(rho1[mix_both], rho2[mix_both]) or \
            np.allclose(rho1[mix_both], 0)


def test_ladder_report_roundtrip(tmp_path):
    rows = [{"t": 0.02, "q": 0.4}, {"t": 0.01, "q": 0.2}]
    slopes = {"q": 1.0}
    path = tmp_path / "ladder.txt"
    io_formats.write_ladder(str(path), rows, slopes, {"q": 0.9})
    times, table = io_formats.read_ladder(str(path))
    assert times == [0.02, 0.01]
    assert table["q"]["slope"] == 1.0
    assert table["q"]["values"] == [0.4, 0.2]
