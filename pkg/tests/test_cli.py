import math
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fivharvest.cli import run_command
from fivharvest.config import ConfigError, RunConfig, parse_config
from fivharvest.tables import CsvTable, format_value, read_csv, write_csv


class TestConfig:
    def test_defaults(self):
        assert parse_config("") == RunConfig()

    def test_values_and_comments(self):
        cfg = parse_config("# harvester\nalpha = 0.5\nbeta=0.25  # TW\n\nv0 = 0.2\ncases = BS, TS\nsteps = 5\n")
        assert (cfg.params.alpha, cfg.params.beta, cfg.params.V0) == (0.5, 0.25, 0.2)
        assert cfg.sweep.cases == ("BS", "TS") and cfg.sweep.steps == 5

    def test_initial_state(self):
        cfg = parse_config("x_init = 0.5\ni_init = -0.1")
        assert (cfg.sim.initial.X, cfg.sim.initial.I) == (0.5, -0.1)

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("alpha = 1\nbogus = 2", "line 2"),
            ("alpha", "line 1"),
            ("alpha = ", "no value"),
            ("alpha = 1\nalpha = 2", "repeated"),
            ("beta = x", "cannot parse"),
            ("beta = nan", "cannot parse"),
            ("\n\ngamma = -1", "line 3"),
            ("vary = alpha", "vary"),
            ("steps = 1", "steps"),
            ("hb_mode = exact", "hb_mode"),
            ("omega_min = 2\nomega_max = 1", "omega"),
        ],
    )
    def test_errors(self, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            parse_config(text)


class TestTables:
    def test_empty_has_header(self):
        assert CsvTable("equilibria").render() == "X_star,stability,local_stiffness\n"

    def test_row_length(self):
        with pytest.raises(ValueError):
            CsvTable("portrait").append(1.0, 2.0)

    def test_unknown_schema(self):
        with pytest.raises(ValueError):
            CsvTable("nope")

    def test_round_trip_random_bits(self):
        rng = np.random.default_rng(5)
        bits = rng.integers(0, 2**64 - 1, size=10_000, dtype=np.uint64)
        for x in bits.view(np.float64):
            if math.isfinite(x):
                assert float(format_value(x)) == x

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_round_trip(self, x):
        assert struct.pack("<d", float(format_value(x))) == struct.pack("<d", x)

    def test_write_read(self, tmp_path):
        t = CsvTable("portrait")
        t.append(0.1, -0.2, 1 / 3)
        path = write_csv(t, tmp_path / "sub" / "p.csv")
        assert path.read_bytes() == b"X,V,H\n0.10000000000000001,-0.20000000000000001,0.33333333333333331\n"
        header, rows = read_csv(path)
        assert header == ("X", "V", "H") and float(rows[0][2]) == 1 / 3

    def test_write_failure_names_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError, match="file"):
            write_csv(CsvTable("portrait"), blocker / "x.csv")


class TestCli:
    def test_classify(self, capsys):
        assert run_command(["classify", "--alpha", "0", "--beta", "1"]) == 0
        assert capsys.readouterr().out.strip() == "QZS3"

    def test_classify_tw(self, capsys):
        assert run_command(["classify", "--set", "alpha=0.5", "--set", "beta=0.25"]) == 0
        assert capsys.readouterr().out.strip() == "TW"

    @pytest.mark.parametrize(
        "argv",
        [
            ["frobnicate"],
            [],
            ["classify", "--alpha", "-1"],
            ["force", "--set", "nokey=1"],
            ["force", "--set", "alpha"],
            ["sweep", "--steps", "1"],
            ["force", "--config", "/nonexistent/run.cfg"],
        ],
    )
    def test_usage_errors(self, argv, capsys):
        assert run_command(argv) == 2
        assert capsys.readouterr().err

    def test_config_error_names_file_and_line(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("alpha = 0.2\nbeta = -3\n")
        assert run_command(["classify", "--config", str(cfg)]) == 2
        err = capsys.readouterr().err
        assert "run.cfg" in err and "line 2" in err

    def test_simulation_failure_exit(self, tmp_path, capsys):
        argv = ["simulate", "--out", str(tmp_path), "--set", "f0=1e308", "--set", "omega0=1", "--t-end", "5"]
        assert run_command(argv) == 1
        assert "last good sample" in capsys.readouterr().err

    def test_simulate_first_row(self, tmp_path):
        assert run_command(["simulate", "--out", str(tmp_path), "--t-end", "1", "--dt", "0.01"]) == 0
        header, rows = read_csv(tmp_path / "timeseries.csv")
        assert header == ("T", "X", "V", "Q", "I", "mode", "U", "P")
        assert len(rows) == 101 and all(float(c) == 0.0 for c in rows[0])

    @pytest.mark.parametrize(
        "cmd,schema",
        [
            ("force", "X,F_s,K"),
            ("friction", "V_r,F_lo,F_hi"),
            ("potential", "X,PEN"),
            ("equilibria", "X_star,stability,local_stiffness"),
            ("portrait", "X,V,H"),
            ("codim2", "plane_value,xi,region"),
        ],
    )
    def test_static_commands(self, cmd, schema, tmp_path, capsys):
        assert run_command([cmd, "--out", str(tmp_path), "--alpha", "0.25", "--beta", "0.5"]) == 0
        path = tmp_path / f"{cmd}.csv"
        assert capsys.readouterr().out.strip() == str(path)
        text = path.read_text()
        assert text.startswith(schema + "\n") and text.count("\n") > 1

    def test_amplitude(self, tmp_path):
        argv = ["amplitude", "--out", str(tmp_path), "--alpha", "0.25", "--beta", "0.5", "--grid", "64"]
        assert run_command(argv) == 0
        _, rows = read_csv(tmp_path / "amplitude.csv")
        assert {r[3] for r in rows} == {"RealPart", "ImagPart"}

    def test_sweep_small_deterministic(self, tmp_path):
        argv = ["sweep", "--vary", "theta", "--steps", "3", "--set", "cases=BS", "--set", "t_end=20", "--set", "dt=0.01"]
        assert run_command(argv + ["--out", str(tmp_path / "a")]) == 0
        assert run_command(argv + ["--out", str(tmp_path / "b")]) == 0
        a, b = (tmp_path / d / "sweep.csv" for d in "ab")
        assert a.read_bytes() == b.read_bytes()
        _, rows = read_csv(a)
        assert [r[0] for r in rows] == ["BS"] * 3 and rows[0][1] == "theta"
