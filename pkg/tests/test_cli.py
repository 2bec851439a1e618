import csv
import json
import math

import pytest
import yaml

from ftnoise.config import config_hash
from ftnoise.ftnoise import main, parse_args


def load_report(path):
    with open(path, "r") as fh:
        return json.load(fh)


def test_parse_args():
    args = parse_args(["-v", "sweep", "model.yaml", "--table", "out.csv", "--quiet"])
    assert args.command == "sweep"
    assert str(args.table) == "out.csv"
    assert args.quiet
    with pytest.raises(SystemExit):
        parse_args(["plot", "model.yaml"])


def test_analyze(config_fixtures, tmp_path, capsys):
    out = tmp_path / "report.json"
    args = ["analyze", str(config_fixtures["three_qubit"]), "--out", str(out)]
    assert main(args) == 0
    report = load_report(out)
    assert report["command"] == "analyze"
    assert report["profile"]["eta_tilde"] == pytest.approx([0.0, 0.05, 0.002])
    assert report["bound"]["alpha"] == pytest.approx(0.22360, abs=1e-5)
    assert report["bound"]["verdict"] == "not_scalable"
    assert report["bound"]["epsilon"] > 1e-4
    assert len(report["contraction"]) == 3
    assert all(c["holds"] for c in report["contraction"])
    assert "verdict:  not_scalable" in capsys.readouterr().out


def test_analyze_echoes_config_hash(config_fixtures, tmp_path):
    out = tmp_path / "report.json"
    main(["analyze", str(config_fixtures["three_qubit"]), "--out", str(out), "--quiet"])
    document = yaml.safe_load(config_fixtures["three_qubit"].read_text())
    assert load_report(out)["config_hash"] == config_hash(document)


def test_analyze_is_deterministic(config_fixtures, tmp_path):
    reports = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        main(["analyze", str(config_fixtures["parametric"]), "--out", str(out)])
        report = load_report(out)
        del report["timestamp"]
        reports.append(json.dumps(report, indent=2))
    assert reports[0] == reports[1]


def test_analyze_parametric(config_fixtures, tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(config_fixtures["parametric"]), "--out", str(out)]) == 0
    bound = load_report(out)["bound"]
    assert bound["method"] == "corollary2"
    assert bound["verdict"] == "scalable"


def test_analyze_zero_coupling(config_fixtures, tmp_path):
    out = tmp_path / "report.json"
    args = ["analyze", str(config_fixtures["zero_coupling"]), "--out", str(out)]
    assert main(args) == 0
    bound = load_report(out)["bound"]
    assert bound["epsilon"] == 0.0
    assert bound["verdict"] == "scalable"


def test_analyze_divergent(config_fixtures, tmp_path):
    out = tmp_path / "report.json"
    assert main(["analyze", str(config_fixtures["divergent"]), "--out", str(out)]) == 3
    report = load_report(out)
    assert report["bound"]["epsilon"] is None
    assert report["bound"]["verdict"] == "inconclusive"
    assert report["errors"] == ["numerical precondition failed"]


def test_config_errors(config_fixtures, write_config, tmp_path):
    assert main(["analyze", str(tmp_path / "missing.yaml")]) == 2
    assert main(["verify", str(config_fixtures["three_qubit"])]) == 2
    path = write_config({"layout": {"count": 2}, "t0": -1})
    assert main(["analyze", str(path)]) == 2


def test_verify_single_term(config_fixtures, tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", str(config_fixtures["single_term"]), "--out", str(out)]) == 0
    report = load_report(out)
    rows = report["verification"]
    assert len(rows) == 1
    assert rows[0]["norm"] == pytest.approx(2.0 * math.sin(0.005), abs=1e-10)
    alpha = 0.01
    epsilon = 2.0 * alpha * math.exp((math.e - 1.0) / 2.0 / (1.0 - 2.0 * alpha))
    assert rows[0]["epsilon_r"] == pytest.approx(epsilon)
    assert rows[0]["epsilon_r"] == pytest.approx(4.72 * alpha, rel=0.05)
    assert report["violations"] == 0


def test_verify_zero_coupling(config_fixtures, tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", str(config_fixtures["zero_verify"]), "--out", str(out)]) == 0
    rows = load_report(out)["verification"]
    assert len(rows) == 3 + 3 + 1
    assert all(row["norm"] == pytest.approx(0.0, abs=1e-12) for row in rows)


def test_verify_r_cap(config_fixtures):
    assert main(["verify", str(config_fixtures["r_cap"]), "--quiet"]) == 3


def read_table(path):
    with open(path, "r", newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_lambda_scale(config_fixtures, tmp_path):
    table = tmp_path / "sweep.csv"
    assert main(["sweep", str(config_fixtures["sweep"]), "--table", str(table)]) == 0
    rows = read_table(table)
    assert len(rows) == 3
    assert [float(row["value"]) for row in rows] == [0.0, 1.0, 10.0]
    assert float(rows[0]["epsilon"]) == 0.0
    assert rows[0]["verdict"] == "scalable"
    assert float(rows[2]["alpha"]) == pytest.approx(10.0 * float(rows[1]["alpha"]))


def test_sweep_t0(config_fixtures, tmp_path):
    table = tmp_path / "sweep.csv"
    assert main(["sweep", str(config_fixtures["sweep_t0"]), "--table", str(table)]) == 0
    rows = read_table(table)
    assert float(rows[0]["alpha"]) == pytest.approx(0.002)
    assert float(rows[1]["alpha"]) == pytest.approx(2.0 * float(rows[0]["alpha"]))


def test_sweep_marks_failed_points(write_config, tmp_path):
    path = write_config(
        {
            "layout": {"count": 1},
            "coupling": {"table": [{"qubits": [0], "norm": 0.01}]},
            "sweep": {"parameter": "lambda_scale", "values": [1.0, 100.0]},
        }
    )
    table = tmp_path / "sweep.csv"
    assert main(["sweep", str(path), "--table", str(table), "--quiet"]) == 0
    rows = read_table(table)
    assert rows[0]["verdict"] == "not_scalable"
    assert rows[1]["verdict"] == "inconclusive"
    assert rows[1]["epsilon"] == ""


def test_sweep_to_stdout(config_fixtures, capsys):
    assert main(["sweep", str(config_fixtures["sweep"]), "--quiet"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "value,alpha,epsilon,verdict"
    assert len(lines) == 4


def test_sweep_to_stdout_is_csv(config_fixtures, capsys):
    assert main(["sweep", str(config_fixtures["sweep"])]) == 0
    out = capsys.readouterr().out
    rows = list(csv.DictReader(out.strip().splitlines()))
    assert len(rows) == 3
    assert rows[0]["verdict"] == "scalable"


@pytest.mark.parametrize("p", [1.01, 1.02, 1.03])
def test_analyze_factorial_power_near_one(write_config, tmp_path, p):
    path = write_config(
        {
            "layout": {"count": 1},
            "coupling": {"table": [{"qubits": [0], "norm": 1e-6}]},
            "envelope": {"variant": "factorial_power", "p": p},
        }
    )
    out = tmp_path / "report.json"
    assert main(["analyze", str(path), "--out", str(out), "--quiet"]) in (0, 3)
    bound = load_report(out)["bound"]
    assert bound["method"] == "corollary2"
    assert bound["verdict"] in ("not_scalable", "inconclusive")
