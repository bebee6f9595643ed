import json

import pytest
from hypothesis import given, settings, strategies as st

from dampwave.cli import (CONFIGS, ConfigError, SimulateConfig, build_config, main,
                          predicted_residual, read_ini, to_ini)
from dampwave.rate_calculus import GrowthExpr


@pytest.mark.parametrize("command", sorted(CONFIGS))
def test_default_config_round_trips(command):
    cfg = CONFIGS[command]()
    assert build_config(command, read_ini(to_ini(command, cfg), command)) == cfg


@given(st.floats(1e-6, 1e-2), st.lists(st.integers(-50, 50), min_size=1, max_size=4),
       st.sampled_from(["quasimode", "random_smooth", "single_frequency"]), st.booleans())
@settings(max_examples=30, deadline=None)
def test_simulate_config_round_trips(dt, modes, data, fit):
    cfg = SimulateConfig(dt=dt, modes=tuple(modes), initial_data=data, fit=fit)
    assert build_config("simulate", read_ini(to_ini("simulate", cfg), "simulate")) == cfg


def test_unknown_keys_and_sections():
    with pytest.raises(ConfigError, match="'sigmaa'"):
        build_config("simulate", {"sigmaa": "1"})
    with pytest.raises(ConfigError, match="'nope'"):
        read_ini("[nope]\nx = 1\n", "rate")
    with pytest.raises(ConfigError, match="'N_x'"):
        build_config("simulate", {"N_x": "many"})


def test_config_key_error_exits_2(tmp_path, capsys):
    ini = tmp_path / "run.ini"
    ini.write_text("[average-fit]\ncase = convex\nbeta_typo = 2\n")
    assert main(["average-fit", "--config", str(ini), "--out", str(tmp_path)]) == 2
    assert "beta_typo" in capsys.readouterr().err
    assert main(["simulate", "--initial_data", "noise", "--out", str(tmp_path)]) == 2


def test_golden_table_command(tmp_path):
    assert main(["golden-table", "--out", str(tmp_path)]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["passed"] and man["version"] and len(man["config_hash"]) == 64
    assert "wall_time_s" in man and man["tolerances"] == {"exact": True}
    body = (tmp_path / "golden-table.csv").read_text().splitlines()
    assert body[0] == "case,quantity,expected,computed,match"
    assert all(line.endswith(",true") for line in body[1:])


def test_average_fit_end_to_end(tmp_path):
    assert main(["average-fit", "--case", "convex", "--beta", "2", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "average-fit.csv").read_text().splitlines()
    assert rows[0] == "s,log_A" and len(rows) == 41


def test_failed_check_exits_1(tmp_path):
    assert main(["quasimode-check", "--exponent_tol", "1e-12", "--ns", "16 32 64",
                 "--out", str(tmp_path)]) == 1
    assert not json.loads((tmp_path / "manifest.json").read_text())["passed"]


def test_csv_is_deterministic(tmp_path):
    bodies = []
    for i, workers in enumerate((1, 3, 1)):
        out = tmp_path / str(i)
        assert main(["quasimode-check", "--workers", str(workers), "--out", str(out)]) == 0
        assert main(["simulate", "--workers", str(workers), "--T", "0.1", "--out", str(out)]) == 0
        bodies.append(((out / "quasimode-check.csv").read_bytes(), (out / "simulate.csv").read_bytes()))
    assert bodies[0] == bodies[1] == bodies[2]


def test_rate_command(tmp_path):
    assert main(["rate", "--V", "z^2 @small", "--mode", "thin", "--out", str(tmp_path)]) == 0
    assert "t^-2 @large" in (tmp_path / "rate.csv").read_text()


def test_predicted_residual_order():
    S = GrowthExpr.small
    for beta in (1, 2, 4):
        assert predicted_residual(S(pow=beta)).pow == pytest.approx(-2 / (beta + 2))
