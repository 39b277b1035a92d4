import csv
import io
import json
import math

import numpy as np
import pytest

from qdelay.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_pea_zero(capsys):
    rec = run_json(capsys, "pea", "--n", "2", "--phase-bits", "11", "--policy", "zero")
    assert rec["results"]["most_likely"] == "11"
    assert rec["results"]["expected_probability"] == pytest.approx(1.0, abs=1e-12)
    assert rec["experiment"] == "pea" and "timestamp" in rec


def test_pea_worst(capsys):
    # the exact readout splits evenly between 00 and 10; see test_pea for the oracle
    rec = run_json(capsys, "pea", "--n", "2", "--phase-bits", "11", "--policy", "worst")
    dist = rec["results"]["distribution"]
    assert dist["00"] == pytest.approx(0.5, abs=1e-12)
    assert dist["10"] == pytest.approx(0.5, abs=1e-12)
    assert rec["oracle"]["per_qubit_success"] == pytest.approx([0.0, 0.0], abs=1e-12)


def test_pea_matched_three_qubits(capsys):
    rec = run_json(capsys, "pea", "--n", "3", "--phase-bits", "101", "--delta", "1,2,3", "--policy", "matched")
    assert rec["results"]["most_likely"] == "101"
    assert rec["results"]["expected_probability"] == pytest.approx(1.0, abs=1e-9)
    assert [r["closed_form_success"] for r in rec["table"]] == pytest.approx([1.0] * 3)
    assert {r["delay_class"] for r in rec["table"]} == {"matched"}


def test_pea_explicit_delays(capsys):
    rec = run_json(capsys, "pea", "--phase-bits", "10", "--delays", "1.0,0.5:1.5")
    assert [r["tau_total"] for r in rec["table"]] == pytest.approx([1.0, 2.0])
    assert [r["tau_before"] for r in rec["table"]] == pytest.approx([0.5, 0.5])
    sim = [r["simulated_success"] for r in rec["table"]]
    assert sim == pytest.approx([r["closed_form_success"] for r in rec["table"]], abs=1e-10)


def test_pea_sample_carries_seed(capsys):
    rec = run_json(capsys, "pea", "--phase-bits", "011", "--delays", "0.3", "--mode", "sample", "--seed", "9")
    assert rec["seed"] == 9 and rec["config"]["seed"] == 9
    assert rec["results"]["sampled_outcome"] in rec["results"]["distribution"]


def test_orderfind_defaults(capsys):
    rec = run_json(capsys, "orderfind")
    assert rec["results"]["distribution"] == pytest.approx({"00": 0.25, "01": 0.25, "10": 0.25, "11": 0.25})
    assert [r["verified_order"] for r in rec["table"]] == [None, 4, 4, 4]


def test_orderfind_conditioned_and_seeded(capsys):
    rec = run_json(capsys, "orderfind", "--delta", "1,2", "--policy", "matched", "--condition-k", "3", "--seed", "4")
    assert rec["results"]["conditional_distribution"]["11"] == pytest.approx(1.0, abs=1e-12)
    assert rec["results"]["measured_k"] == rec["results"]["target_label"]
    assert rec["seed"] == 4


def test_orderfind_not_coprime(capsys):
    code, _, err = run(capsys, "orderfind", "--y", "5")
    assert code == 1 and "gcd" in err


@pytest.mark.parametrize(
    "argv,expected",
    [
        (["--k", "6"], 1.0),
        (["--k", "0"], 1.0),
        (["--k", "6", "--delays", f"{math.pi},0,0,0,0,0"], -1.0),
    ],
)
def test_count_examples(capsys, argv, expected):
    rec = run_json(capsys, "count", *argv)
    assert rec["results"]["sigma_z"] == pytest.approx(expected, abs=1e-9)
    assert rec["oracle"]["product"] == pytest.approx(expected, abs=1e-9)


def test_count_sweep_fit(capsys):
    rec = run_json(capsys, "count", "--k-max", "12")
    assert rec["results"]["count_estimate"] == 4
    assert len(rec["table"]) == 12


@pytest.mark.parametrize("experiment", ["pea", "notgate", "count"])
def test_sweep_matches_closed_form(capsys, experiment):
    rec = run_json(capsys, "sweep", "--experiment", experiment, "--points", "17", "--delta", "1")
    assert rec["results"]["max_abs_deviation"] < 1e-10
    assert [r["index"] for r in rec["table"]] == list(range(17))


def test_sweep_endpoints():
    # 0..4 pi with 9 points: tau = pi, 3 pi are worst, 2 pi, 4 pi matched
    buf = io.StringIO()
    import contextlib

    with contextlib.redirect_stdout(buf):
        assert main(["sweep", "--points", "9", "--format", "csv"]) == 0
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    sim = [float(r["simulated"]) for r in rows]
    assert sim[0] == pytest.approx(1.0) and sim[4] == pytest.approx(1.0) and sim[8] == pytest.approx(1.0)
    assert sim[2] == pytest.approx(0.0, abs=1e-12) and sim[6] == pytest.approx(0.0, abs=1e-12)


def test_sweep_jobs_order(capsys):
    a = run_json(capsys, "sweep", "--points", "33", "--jobs", "4")
    b = run_json(capsys, "sweep", "--points", "33")
    assert a["table"] == b["table"]


def test_csv_is_valid_and_precise(capsys):
    code, out, _ = run(capsys, "sweep", "--points", "5", "--tau-max", "1", "--format", "csv")
    assert code == 0
    assert out.endswith("\r\n")
    rows = list(csv.reader(io.StringIO(out, newline="")))
    assert rows[0] == ["index", "tau", "delta_tau", "simulated", "closed_form"]
    assert len(rows) == 6
    tau = rows[2][1]
    assert float(tau) == 0.25
    val = rows[3][3]
    assert float(val) == (1 + math.cos(0.5)) / 2 or abs(float(val) - (1 + math.cos(0.5)) / 2) < 1e-15
    assert len(val.replace(".", "").lstrip("0")) >= 15


def test_schedule_command(capsys):
    rec = run_json(capsys, "schedule", "--delta", "1,2", "--min-delay", "7")
    assert rec["results"]["totals"] == pytest.approx([4 * math.pi, 3 * math.pi])
    assert [r["success_probability"] for r in rec["table"]] == pytest.approx([1.0, 1.0])


def test_degenerate_qubit_exit_2(capsys):
    code, _, err = run(capsys, "schedule", "--delta", "0")
    assert code == 2 and "model error" in err
    code, _, _ = run(capsys, "pea", "--delta", "0", "--policy", "matched")
    assert code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["pea", "--bogus", "1"],
        ["pea", "--n", "3", "--phase-bits", "11"],
        ["pea", "--phase-bits", "12"],
        ["pea", "--delta", "1,2", "--phase-bits", "111"],
        ["pea", "--mode", "sample"],
        ["pea", "--policy", "sideways"],
        ["nope"],
        [],
    ],
)
def test_usage_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1 and err


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\nphase-bits = 101\ndelta = 1,2,3\npolicy = worst\nformat = csv\n")
    code, out, _ = run(capsys, "pea", "--config", str(cfg))
    assert code == 0 and out.startswith("qubit,")
    rec = run_json(capsys, "pea", "--config", str(cfg), "--policy", "matched", "--format", "json")
    assert rec["results"]["most_likely"] == "101"
    assert rec["config"]["delta"] == [1.0, 2.0, 3.0]


def test_bad_config_line(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("phase-bits 101\n")
    code, _, _ = run(capsys, "pea", "--config", str(cfg))
    assert code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["pea", "--phase-bits", "0110", "--delays", "0.3,1:2,0,5", "--mode", "sample", "--seed", "17"],
        ["orderfind", "--delta", "1.5,2", "--delays", "1,2:0.5", "--seed", "3", "--condition-k", "1"],
        ["count", "--m", "3", "--solutions", "1,6", "--k", "4", "--delays", "0.1,0.2,0.3,0.4"],
        ["notgate", "--sign", "-1", "--tau", "1.3", "--split", "0.2"],
    ],
)
def test_record_replay(capsys, tmp_path, argv):
    first = run_json(capsys, *argv)
    path = tmp_path / "rec.json"
    path.write_text(json.dumps(first))
    second = run_json(capsys, argv[0], "--config", str(path))
    assert second["config"] == first["config"]
    assert second["results"] == first["results"]
    assert second["table"] == first["table"]


def test_output_dir_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QDELAY_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "notgate", "--policy", "worst", "--delta", "2")
    assert code == 0 and out == ""
    rec = json.loads((tmp_path / "notgate.json").read_text())
    assert rec["results"]["P1"] == pytest.approx(1.0, abs=1e-12)
    explicit = tmp_path / "x.csv"
    assert main(["notgate", "--format", "csv", "--output", str(explicit)]) == 0
    assert explicit.read_text().startswith("tau,")


def test_version(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
    assert "qdelay" in capsys.readouterr().out
