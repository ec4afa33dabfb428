import csv
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from autotune.cli import main, read_config, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def tune_json(capsys, *extra):
    code, out, err = run(capsys, "tune", "--data", "sonar", "--target", "Class", "--learner", "svm",
                         "--optimizer", "hj", "--fast", "0.5", "--budget", "15", *extra)
    assert code == 0, err
    return json.loads(out)


def regression_csv(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 2))
    y = X[:, 0] + 0.1 * rng.normal(size=40)
    path = tmp_path / "reg.csv"
    rows = ["a,b,y"] + [f"{a:.6f},{b:.6f},{t:.6f}" for (a, b), t in zip(X, y)]
    path.write_text("\n".join(rows) + "\n")
    return path


def csv_without_timing(path):
    with open(path, newline="") as fh:
        return [{k: v for k, v in row.items() if k != "mean_seconds"} for row in csv.DictReader(fh)]


def test_tune_prints_result(capsys):
    doc = tune_json(capsys)
    assert set(doc["best"]) == {"cost", "gamma"}
    assert {"loss", "n_evals", "elapsed", "learner", "optimizer", "strategy"} <= set(doc)
    assert doc["n_evals"] <= 15
    assert 0.0 <= doc["loss"] <= 1.0


def test_tune_same_seed_same_json(capsys):
    a = tune_json(capsys, "--seed", "7")
    b = tune_json(capsys, "--seed", "7")
    a.pop("elapsed"), b.pop("elapsed")
    assert a == b
    assert a["seed"] == 7


def test_tune_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("AUTOTUNE_SEED", "11")
    assert tune_json(capsys)["seed"] == 11
    monkeypatch.setenv("AUTOTUNE_SEED", "eleven")
    code, _, err = run(capsys, "tune", "--data", "sonar", "--budget", "2")
    assert code == 2 and "AUTOTUNE_SEED" in err


def test_tune_trace_and_out_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    doc = tune_json(capsys, "--trace", "--out", str(out))
    assert len(doc["trace"]) == doc["n_evals"]
    assert json.loads(out.read_text()) == doc


def test_tune_bounds_override(capsys):
    doc = tune_json(capsys, "--bound", "cost=1:4", "--bound", "gamma=0.01:0.1")
    assert 1 <= doc["best"]["cost"] <= 4
    assert 0.01 <= doc["best"]["gamma"] <= 0.1
    code, _, _ = run(capsys, "tune", "--data", "sonar", "--bound", "nope=1:2")
    assert code == 2
    code, _, _ = run(capsys, "tune", "--data", "sonar", "--bound", "cost=abc")
    assert code == 2


def test_adaboost_on_regression_exits_2(capsys, tmp_path):
    code, out, err = run(capsys, "tune", "--data", str(regression_csv(tmp_path)), "--target", "y",
                         "--learner", "adaboost")
    assert code == 2
    assert "adaboost" in err
    assert out == ""


def test_grid_optimizer(capsys, tmp_path):
    code, out, _ = run(capsys, "tune", "--data", str(regression_csv(tmp_path)), "--target", "y",
                       "--learner", "en", "--optimizer", "grid", "--cross", "5")
    assert code == 0
    doc = json.loads(out)
    assert doc["optimizer"] == "alpha-grid" and doc["n_evals"] == 11


@pytest.mark.parametrize("argv", [
    ["tune"],
    ["tune", "--data", "sonar", "--optimizer", "annealing"],
    ["tune", "--data", "sonar", "--fast", "0.5", "--cross", "10"],
    ["frobnicate"],
    ["tune", "--data", "no-such-dataset"],
    ["tune", "--data", "sonar", "--learner", "forest"],
])
def test_bad_flags_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_benchmark_two_datasets(capsys, tmp_path):
    out = tmp_path / "bench"
    code, stdout, err = run(capsys, "benchmark", "--datasets", "sonar,breast-cancer", "--learner", "en",
                            "--trials", "2", "--out", str(out), "--seed", "3")
    assert code == 0, err
    rows = csv_without_timing(out / "report.csv")
    assert [r["dataset"] for r in rows] == ["breast-cancer", "sonar"]
    assert all(r["n_trials"] == "2" and r["metric"] == "accuracy" for r in rows)
    report = json.loads((out / "report.json").read_text())
    assert len(report["records"]) == 4
    assert str(out / "report.json") in stdout


def test_benchmark_rerun_identical_aggregates(capsys, tmp_path):
    args = ["benchmark", "--datasets", "breast-cancer", "--learner", "en,svm", "--trials", "1",
            "--seed", "5"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"))[0] == 0
    assert csv_without_timing(tmp_path / "a" / "report.csv") == csv_without_timing(tmp_path / "b" / "report.csv")


def test_plot_from_benchmark(capsys, tmp_path):
    out = tmp_path / "bench"
    assert run(capsys, "benchmark", "--datasets", "breast-cancer", "--learner", "en",
               "--optimizer", "hj,grid", "--trials", "1", "--out", str(out))[0] == 0
    code, stdout, _ = run(capsys, "plot", str(out / "report.json"), "--title", "bc")
    assert code == 0
    svg = out / "report.svg"
    assert stdout.strip() == str(svg)
    root = ET.fromstring(svg.read_bytes())
    assert len([e for e in root.iter() if e.get("class") == "marker"]) == 2


def test_plot_empty_or_missing_report(capsys, tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text(json.dumps({"trials": 1, "records": []}))
    assert run(capsys, "plot", str(empty))[0] == 1
    assert run(capsys, "plot", str(tmp_path / "missing.json"))[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "plot", str(bad))[0] == 1


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sonar run\ndata = sonar\nbudget = 6\nseed = 4\nbound = cost=1:2\n")
    code, out, _ = run(capsys, "tune", "--config", str(cfg))
    assert code == 0
    doc = json.loads(out)
    assert doc["n_evals"] <= 6 and doc["seed"] == 4
    assert 1 <= doc["best"]["cost"] <= 2
    # flags override the file
    code, out, _ = run(capsys, "tune", "--config", str(cfg), "--seed", "9")
    assert json.loads(out)["seed"] == 9
    cfg.write_text("colour = blue\n")
    assert run(capsys, "tune", "--data", "sonar", "--config", str(cfg))[0] == 2


def test_read_config_errors(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("no equals sign\n")
    with pytest.raises(UsageError):
        read_config(p)
    with pytest.raises(UsageError):
        read_config(tmp_path / "missing.cfg")


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "autotune.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "tune" in out.stdout and "benchmark" in out.stdout
