import json
import subprocess
import sys

import pytest

from evohpo.cli import main


def test_run_and_export_and_resume(tmp_path, capsys):
    out = tmp_path / "runs"
    rc = main(
        [
            "run",
            "--space", "tables/table1.space",
            "--mode", "both",
            "--evaluator", "surrogate",
            "--trials", "10",
            "--repeats", "2",
            "--seeds", "1,2",
            "--out", str(out),
        ]
    )
    assert rc == 0
    printed = capsys.readouterr().out
    assert "median final best" in printed
    assert (out / "trend_both_1.csv").exists()

    rc = main(
        ["export", "--study", str(out / "both_seed1"), str(out / "both_seed2"),
         "--out", str(tmp_path / "exported")]
    )
    assert rc == 0
    assert (tmp_path / "exported" / "trend_both_1.csv").exists()
    assert (tmp_path / "exported" / "trend_both_2.csv").exists()

    rc = main(["resume", "--study", str(out / "both_seed1"), "--evaluator", "surrogate"])
    assert rc == 0
    assert "10 trials" in capsys.readouterr().out  # already complete


def test_final_eval_command(tmp_path, capsys):
    setting_file = tmp_path / "setting.json"
    setting_file.write_text(
        json.dumps(
            {"n_g": 3, "s_g": [512] * 3, "s_d": 1024, "n_f": 4, "s_f": [1024] * 4, "a": "relu"}
        )
    )
    out_file = tmp_path / "summary.json"
    rc = main(
        [
            "final-eval",
            "--setting", str(setting_file),
            "--space", "tables/table1.space",
            "--evaluator", "surrogate",
            "--noise-free",
            "-n", "5",
            "--label", "optimum",
            "--out", str(out_file),
        ]
    )
    assert rc == 0
    record = json.loads(out_file.read_text())
    assert record["label"] == "optimum"
    assert record["mean_rmse"] == 0.60
    assert record["std"] == 0.0
    assert len(record["scores"]) == 5


def test_ttest_command(capsys):
    rc = main(["ttest", "--a", "default:1.1570:0.0700:30", "--b", "both:0.8824:0.0417:30"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "18.4592" in out


def test_ttest_rejects_malformed_group():
    with pytest.raises(SystemExit):
        main(["ttest", "--a", "bad", "--b", "both:0.88:0.04:30"])


def test_unknown_mode_is_usage_error(tmp_path):
    with pytest.raises(SystemExit):
        main(
            ["run", "--space", "tables/table1.space", "--mode", "sideways",
             "--out", str(tmp_path)]
        )


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "evohpo.cli", "ttest",
         "--a", "default:1.1570:0.0700:30", "--b", "graph:1.0854:0.0660:30"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "4.0763" in proc.stdout
