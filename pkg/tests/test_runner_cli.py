import json
from pathlib import Path

import numpy as np
import pytest

from nvholonomy import cli, runner
from nvholonomy.runner import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_NUMERIC,
    EXIT_OK,
    ConfigError,
    ExperimentSpec,
)

GOLDEN = Path(__file__).parent / "golden"
SCHEMAS = json.loads((GOLDEN / "schemas.json").read_text())


def run_json(name, params=None, seed=0):
    return json.loads(runner.execute(ExperimentSpec(name, params or {}, seed, format="json")))


@pytest.mark.parametrize("name", sorted(SCHEMAS["schemas"]))
def test_output_schema_is_pinned(name):
    out = run_json(name, SCHEMAS["small_params"][name])
    want = SCHEMAS["schemas"][name]
    assert sorted(out["provenance"]) == want["provenance_keys"]
    assert sorted(out["provenance"]["parameters"]) == want["parameter_keys"]
    assert sorted(out["result"]) == want["result_keys"]
    assert out["result"].get("columns") == want["columns"]


def test_gyro_golden_bytes():
    assert runner.execute(ExperimentSpec("gyro")) == (GOLDEN / "gyro_default.json").read_text()


def test_catalog():
    cat = runner.list_experiments()
    lines = [f"{n}: {d}" for n, d in cat]
    assert len(cat) >= 7
    assert [n for n, _ in cat] == list(runner.EXPERIMENTS)
    assert any(line.startswith("witness: non-Abelian ordering difference (14.4%)") for line in lines)
    assert any(line.startswith("degeneracy_sweep: Fig. 3 reproduction") for line in lines)


def test_list_command(capsys):
    assert cli.main(["list"]) == EXIT_OK
    assert "square_holonomy:" in capsys.readouterr().out


def test_witness_reports_both_measures():
    r = run_json("witness")["result"]
    assert r["difference"] == pytest.approx(abs(r["pop_ab"] - r["pop_ba"]))
    assert r["amplitude_difference"] == pytest.approx(0.144, abs=5e-3)


def test_square_holonomy_to_two_decimals():
    r = run_json("square_holonomy")["result"]
    m = np.array(r["matrix_rounded"]["re"]) + 1j * np.array(r["matrix_rounded"]["im"])
    assert np.allclose(m, runner.U_SQUARE_QUOTED, atol=1e-12)
    assert r["max_entry_error_vs_quoted"] < 5e-3


def test_seeded_runs_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert cli.main(["run", "witness", "--seed", "7", "--set", "steps=512", "--out", str(a)]) == 0
    assert cli.main(["run", "witness", "--seed", "7", "--set", "steps=512", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["provenance"]["seed"] == 7


def test_noise_csv_is_reproducible_and_documented(tmp_path):
    argv = ["noise-ensemble", "--sigma", "1e-3", "--events", "20", "--members", "3",
            "--total-time", "100", "--seed", "4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(argv + ["--out", str(a)]) == 0
    assert cli.main(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0].startswith("# package:")
    header = next(line for line in lines if not line.startswith("#"))
    assert header.startswith("sigma,sigma_gauss,events,members,mean_p1")


def test_sweep_cli_csv(capsys):
    assert cli.main(["sweep-degeneracy", "--deltas", "0,1e-3", "--times", "100"]) == 0
    rows = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    assert rows[0] == "delta,T,pop_p1,pop_0,pop_m1"
    assert len(rows) == 3
    assert abs(sum(float(x) for x in rows[1].split(",")[2:]) - 1) < 1e-9


def test_multi_time_sweep_uses_adiabatic_table(capsys):
    assert cli.main(["sweep-degeneracy", "--deltas", "0", "--times", "50 100"]) == 0
    out = capsys.readouterr().out
    assert '# experiment: "adiabatic_sweep"' in out


def test_holonomy_command(capsys):
    assert cli.main(["holonomy", "--path", "circle", "--steps", "256", "--connection", "numeric"]) == 0
    r = json.loads(capsys.readouterr().out)
    u = np.array(r["matrix"]["re"]) + 1j * np.array(r["matrix"]["im"])
    assert abs(abs(u[0, 0]) ** 2 - 0.381975) < 1e-5
    assert r["unitarity_residual"] < 1e-10


def test_holonomy_from_path_file(tmp_path, capsys):
    f = tmp_path / "p.yaml"
    f.write_text("segments:\n  - longitude: {phi: 0, theta_start: 0.3, theta_end: 1.3}\n")
    assert cli.main(["holonomy", "--path", str(f), "--steps", "64"]) == 0
    r = json.loads(capsys.readouterr().out)
    assert r["matrix"]["re"][0][0] == pytest.approx(np.cos(1 / np.sqrt(2)), abs=1e-12)


def test_gyro_command(capsys):
    assert cli.main(["gyro", "--t1", "2e-3"]) == 0
    r = json.loads(capsys.readouterr().out)["result"]
    assert r["alpha"] == pytest.approx(np.sqrt(4000))


@pytest.mark.parametrize("argv", [
    ["run", "nope"],
    ["run", "witness", "--set", "colour=red"],
    ["run", "witness", "--set", "steps"],
    ["run", "witness", "--set", "steps=2.5"],
    ["frobnicate"],
])
def test_config_errors_exit_2(argv):
    assert cli.main(argv) == EXIT_CONFIG


def test_numeric_precondition_exit_3():
    assert cli.main(["run", "degeneracy_sweep", "--set", "deltas=[0.9]", "--set", "total_time=10"]) == EXIT_NUMERIC
    assert cli.main(["run", "witness", "--set", "steps=0"]) == EXIT_NUMERIC


def test_io_error_exit_4(tmp_path):
    assert cli.main(["holonomy", "--path", str(tmp_path / "nowhere.yaml")]) == EXIT_IO
    assert cli.main(["run", "witness", "--set", "path_a=missing.yaml"]) == EXIT_IO
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["run", "gyro", "--out", str(blocker / "x.json")]) == EXIT_IO


def test_batch_run_file(tmp_path):
    out1, out2 = tmp_path / "g.json", tmp_path / "s.csv"
    f = tmp_path / "run.yaml"
    f.write_text(
        f"experiment: gyro\nout: {out1}\n---\n"
        f"experiment: degeneracy_sweep\nseed: 3\nout: {out2}\n"
        "params: {deltas: [0.0], total_time: 100, min_steps: 200}\n"
    )
    assert cli.main(["batch", str(f)]) == 0
    assert json.loads(out1.read_text())["provenance"]["experiment"] == "gyro"
    assert "# seed: 3" in out2.read_text()


@pytest.mark.parametrize("text", ["params: {}\n", "experiment: gyro\nbogus: 1\n", "experiment: gyro\nparams: [1]\n"])
def test_bad_run_files(tmp_path, text):
    f = tmp_path / "run.yaml"
    f.write_text(text)
    with pytest.raises(ConfigError):
        runner.load_run_file(f)
    assert cli.main(["batch", str(f)]) == EXIT_CONFIG


def test_missing_run_file_is_io_error(tmp_path):
    assert cli.main(["batch", str(tmp_path / "none.yaml")]) == EXIT_IO


def test_coercion():
    _, params, fmt = runner.resolve(ExperimentSpec("noise_ensemble", {"sigma": "[1e-4, 1e-3]", "members": "4"}))
    assert params["sigma"] == [1e-4, 1e-3] and params["members"] == 4 and fmt == "csv"
    with pytest.raises(ConfigError):
        runner.resolve(ExperimentSpec("gyro", format="xml"))
