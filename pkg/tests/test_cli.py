import csv
import json
import subprocess
import sys

import pytest

from zeno_dephase.cli import RECIPE_NAMES, figure_recipe, main, resolve
from zeno_dephase.errors import ConfigError

FIG1 = {"bath": {"kind": "ohmic-continuum", "G": 0.01, "omega_c": 15, "beta": 1},
        "schedule": {"tau": {"start": 0.01, "stop": 5, "points": 40}}}


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_empty_config_names_missing_key(tmp_path, capsys):
    for text in ("", "{}"):
        assert main(["run", "--config", write(tmp_path, "c.json", text)]) == 1
        assert "missing key: bath.kind" in capsys.readouterr().err


def test_unknown_and_invalid_keys(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", FIG1)
    assert main(["run", "--config", cfg, "--set", "system.spin=1"]) == 1
    assert "unknown key: system.spin" in capsys.readouterr().err
    assert main(["run", "--config", cfg, "--set", "schedule.tau.points=zero"]) == 1
    assert "schedule.tau.points" in capsys.readouterr().err
    assert main(["run", "--config", cfg, "--set", "mode=magic"]) == 1
    assert main(["run", "--config", cfg, "--set", "schedule.tau.start=0"]) == 1
    assert "schedule.tau.start" in capsys.readouterr().err


def test_single_mode_csv(tmp_path):
    out = tmp_path / "out.csv"
    assert main(["run", "--config", write(tmp_path, "c.json", FIG1), "--output", str(out)]) == 0
    rows = read_csv(out)
    assert rows[0] == ["tau", "gamma_rate", "N", "J", "survival"]
    assert len(rows) == 41
    rates = [float(r[1]) for r in rows[1:]]
    peak = rates.index(max(rates))
    assert 0 < peak < len(rates) - 1
    assert all(a < b for a, b in zip(rates[:peak], rates[1:peak + 1]))
    assert all(a > b for a, b in zip(rates[peak:-1], rates[peak + 1:]))
    # 17 significant digits
    assert len(rows[1][1].replace(".", "").lstrip("0").split("e")[0]) >= 15
    meta = json.loads((tmp_path / "out.csv.meta.json").read_text())
    assert meta["config"]["bath"]["omega_c"] == 15.0


def test_round_trip_is_byte_identical(tmp_path):
    out = tmp_path / "a.csv"
    assert main(["run", "--config", write(tmp_path, "c.json", FIG1), "--set", "bath.beta=0.25",
                 "--output", str(out)]) == 0
    again = tmp_path / "b.csv"
    assert main(["run", "--config", str(out) + ".meta.json", "--output", str(again)]) == 0
    assert out.read_bytes() == again.read_bytes()


def test_json_round_trip(tmp_path):
    out = tmp_path / "a.json"
    cfg = write(tmp_path, "c.json", FIG1)
    assert main(["run", "--config", cfg, "--format", "json", "--output", str(out),
                 "--set", "mode=collective", "--set", "system.J=2"]) == 0
    doc = json.loads(out.read_text())
    assert doc["columns"][0] == "tau"
    assert doc["metadata"]["config"]["system"]["J"] == 2.0
    again = tmp_path / "b.json"
    doc["metadata"]["config"]["output"]["path"] = str(again)
    replay = write(tmp_path, "replay.json", doc)
    assert main(["run", "--config", replay]) == 0
    assert json.loads(again.read_text())["rows"] == doc["rows"]


def test_crossover_mode(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", FIG1)
    assert main(["run", "--config", cfg, "--set", "mode=crossover", "--set", "schedule.tau.points=64"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "tau,gamma_rate,kind,curve"
    assert len(lines) == 2 and lines[1].endswith(",max,single")


def test_correlated_budget_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", FIG1)
    code = main(["run", "--config", cfg, "--set", "mode=correlated", "--set", "system.J=5",
                 "--set", "schedule.N=5", "--set", "schedule.tau.points=2"])
    assert code == 3
    assert "25937424601" in capsys.readouterr().err


def test_numerical_error_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {**FIG1, "numerics": {"rel_tol": 1e-30, "abs_tol": 1e-40}})
    assert main(["run", "--config", cfg, "--set", "schedule.tau.points=2"]) == 2
    assert "did not converge" in capsys.readouterr().err


@pytest.mark.filterwarnings("ignore:decay_rate_rwa")
def test_other_modes(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", FIG1)
    for mode, header in (("rwa", "tau,gamma_rate,N,J,omega0"),
                         ("interaction", "tau,survival,J,chi"),
                         ("correlated", "tau,gamma_rate,N,J,survival,term_count")):
        assert main(["run", "--config", cfg, "--set", f"mode={mode}", "--set", "schedule.tau.points=3",
                     "--set", "schedule.N=2"]) == 0
        assert capsys.readouterr().out.splitlines()[0] == header


def test_master_mode(tmp_path, capsys):
    cfg = write(tmp_path, "c.json", {**FIG1, "mode": "master",
                                     "schedule": {"tau": {"start": 0.05, "stop": 0.2, "points": 4,
                                                          "kind": "linear"}},
                                     "numerics": {"me_step": 1e-3}})
    assert main(["run", "--config", cfg]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0][-1] == "delta" and len(rows) == 5


def test_recipes(tmp_path, capsys):
    assert len(figure_recipe("fig1")) == 4
    fig3a = figure_recipe("fig3a")
    assert sorted({c["bath"]["G"] for c in fig3a}) == [0.05, 0.5]
    assert {c["schedule"]["N"] for c in fig3a} == {1, 3, 5}
    fig2b = figure_recipe("fig2b")
    assert [c["system"]["delta"] for c in fig2b] == [0.0, 0.1, 1.0]
    assert all(c["system"]["omega0"] == 0.1 for c in fig2b)
    for name in RECIPE_NAMES:
        for cfg in figure_recipe(name):
            assert resolve(cfg) == cfg
    with pytest.raises(ConfigError, match="valid names: fig1"):
        figure_recipe("fig9")
    assert main(["recipe", "fig9"]) == 1
    assert "fig2a" in capsys.readouterr().err
    assert main(["recipe", "fig1", "--output", str(tmp_path / "rec")]) == 0
    assert len(list((tmp_path / "rec").iterdir())) == 4


def test_jobs_do_not_change_output(tmp_path, monkeypatch):
    cfg = write(tmp_path, "c.json", FIG1)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--config", cfg, "--output", str(a), "--jobs", "1"]) == 0
    monkeypatch.setenv("ZENO_DEPHASE_JOBS", "3")
    assert main(["run", "--config", cfg, "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_oracle_check_subcommand(tmp_path):
    out = tmp_path / "oracle.csv"
    proc = subprocess.run([sys.executable, "-m", "zeno_dephase.cli", "oracle-check", "--output", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    rows = read_csv(out)
    assert rows[0][0] == "tau"
    assert all(r[-1] == "true" for r in rows[1:])
