import json

import pytest

from fasep.cli import main


def run(tmp_path, *args):
    return main([*args, "--out-dir", str(tmp_path)])


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--L", "12", "--N", "4", "--p", "1/2", "--to-frozen", "--seed", "3", "--seed", "4"]
    assert run(a, *args) == 0 and run(b, *args) == 0
    text = (a / "runs.jsonl").read_text()
    assert text == (b / "runs.jsonl").read_text()
    recs = [json.loads(x) for x in text.splitlines()]
    assert len(recs) == 2 and all("spec_hash" in r and r["version"] for r in recs)


def test_simulate_single_particle_is_frozen(tmp_path):
    assert run(tmp_path, "simulate", "--L", "4", "--N", "1", "--to-frozen") == 0
    rec = json.loads((tmp_path / "runs.jsonl").read_text())
    assert rec["events"] == 0 and rec["final"] == rec["initial"]


def test_simulate_high_density_to_frozen_exits_3(tmp_path):
    assert run(tmp_path, "simulate", "--L", "8", "--N", "5", "--to-frozen", "--max-events", "2000") == 3


def test_simulate_window_time(tmp_path):
    assert run(tmp_path, "simulate", "--topology", "window", "--L", "50", "--rho", "0.3",
               "--t-end", "2", "--snapshot-every", "1") == 0
    rec = json.loads((tmp_path / "runs.jsonl").read_text())
    assert len(rec["snapshots"]) == 3 and rec["final"].startswith("window:")


def test_invalid_settings_exit_2(tmp_path):
    assert run(tmp_path, "simulate", "--L", "4", "--N", "9", "--t-end", "1") == 2
    assert run(tmp_path, "simulate", "--L", "4", "--N", "1", "--p", "2", "--t-end", "1") == 2
    assert run(tmp_path, "simulate", "--L", "4", "--N", "1") == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("L = [\n")
    assert run(tmp_path, "verify", "--config", str(bad)) == 2
    unknown = tmp_path / "u.json"
    unknown.write_text('{"colour": 3}')
    assert run(tmp_path, "verify", "--config", str(unknown)) == 2


def test_exact_commands(tmp_path):
    assert run(tmp_path, "exact", "--L", "8", "--N", "3", "--p", "1/4", "--p", "3/4") == 0
    rep = json.loads((tmp_path / "exact_report.json").read_text())
    assert rep["verdicts"][0]["passed"] and rep["verdicts"][0]["statistic"] == 0
    assert (tmp_path / "absorption_L8_N3_p1-4.csv").read_text().startswith("# version=")
    assert run(tmp_path, "exact", "--L", "6", "--N", "4", "--p", "1/3") == 0
    assert run(tmp_path, "exact", "--L", "20", "--N", "3") == 4


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('L = 10\nN = 6\np = ["1/2"]\n')
    assert run(tmp_path, "exact", "--config", str(cfg), "--p", "1/4") == 0
    assert (tmp_path / "stationary_L10_N6_p1-4.csv").exists()


def test_couple_gaps_cylinders(tmp_path):
    assert run(tmp_path, "couple", "--L", "10", "--N", "4", "--max-events", "300") == 0
    assert run(tmp_path, "gaps", "--rho", "0.3", "--L", "5000", "--p", "1", "--min-gaps", "5000") == 0
    assert run(tmp_path, "cylinders", "--L", "200", "--rho", "0.7", "--p", "0.75", "--burn-in",
               "100000", "--snapshots", "100", "--spacing", "1000") == 0
    assert (tmp_path / "cylinders_m4_p3-4.csv").exists()


def test_verify_subset(tmp_path):
    assert run(tmp_path, "verify", "--quick", "--criteria", "1", "2", "5") == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert [v["passed"] for v in rep["verdicts"]] == [True, True, True]


def test_version_flag(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
    assert capsys.readouterr().out.strip() == "0.1.0"
