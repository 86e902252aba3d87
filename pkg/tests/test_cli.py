"""Tests for the trisplit command-line interface.

These call cli.main(argv) in-process (fast, capsys-friendly) plus one
subprocess test for the installed console script.
"""

import argparse
import csv
import json
import subprocess
import sys

import pytest

from trisplit import cli
from trisplit.core import DivergenceError
from trisplit.splitting import TRACE_COLUMNS


TINY = ["--n", "12", "--s", "40", "--rank", "3", "--seed", "7", "--max-iter", "4000"]


class TestPlanCommand:
    def test_json_output_keys_and_values(self, capsys):
        rc = cli.main(["plan", "--l1", "10", "--l2", "1", "--format", "json"])
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert list(payload) == [
            "alpha_bar",
            "eps1",
            "eps2",
            "gbar0",
            "gbar1",
            "gbar2",
            "gbar3",
            "gamma_ryu",
            "thm2_cap",
            "gamma_in_thm2_cap",
        ]
        assert payload["alpha_bar"] == pytest.approx(0.6180339887498949, rel=1e-12)
        assert payload["gamma_ryu"] == pytest.approx(0.004850206820383053, rel=1e-9)
        assert payload["thm2_cap"] == pytest.approx(0.01, rel=1e-12)
        assert payload["gamma_in_thm2_cap"] is True

    def test_text_output_lists_every_field(self, capsys):
        rc = cli.main(["plan", "--l1", "10", "--l2", "1"])
        assert rc == 0
        out = capsys.readouterr().out
        for field in ("alpha_bar", "eps1", "eps2", "gamma_upper", "gamma_ryu", "thm2_cap"):
            assert any(line.startswith(field) for line in out.splitlines()), field

    def test_infeasible_plan_exits_2(self, capsys):
        # alpha below the relaxation-dependent lower bound is rejected as input error
        rc = cli.main(["plan", "--l1", "10", "--l2", "1", "--alpha", "0.5"])
        assert rc == 2
        assert "input error" in capsys.readouterr().err


class TestSolveCommand:
    def test_solve_prints_report_line(self, capsys):
        rc = cli.main(["solve", "--algo", "dys", *TINY])
        assert rc == 0
        out = capsys.readouterr().out
        assert "algo=dys" in out and "converged" in out
        assert "n=12" in out and "s=40" in out

    def test_solve_writes_csv_trace(self, tmp_path, capsys):
        path = tmp_path / "trace.csv"
        rc = cli.main(["solve", "--algo", "dys", *TINY, "--trace", str(path)])
        assert rc == 0
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == list(TRACE_COLUMNS)
        assert len(rows) > 1
        assert f"trace written to {path}" in capsys.readouterr().out

    def test_solve_writes_json_trace(self, tmp_path, capsys):
        path = tmp_path / "trace.json"
        rc = cli.main(
            ["solve", "--algo", "ryu+", *TINY, "--trace", str(path), "--format", "json"]
        )
        assert rc == 0
        records = json.loads(path.read_text())
        assert [r["k"] for r in records] == list(range(1, len(records) + 1))
        assert set(records[0]) == set(TRACE_COLUMNS)
        out = capsys.readouterr().out
        iters = int(out.split("iters=")[1].split()[0])
        assert len(records) == iters

    def test_solve_gamma_override(self, capsys):
        rc = cli.main(["solve", "--algo", "dys", *TINY, "--gamma-dys", "0.05"])
        assert rc == 0
        assert "converged" in capsys.readouterr().out


class TestBenchCommand:
    def test_bench_writes_summary_and_traces(self, tmp_path, capsys):
        rc = cli.main(
            [
                "bench",
                "--sizes",
                "12:40",
                "--seeds",
                "2",
                "--rank",
                "3",
                "--algos",
                "dys",
                "--max-iter",
                "4000",
                "--outdir",
                str(tmp_path),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "dys" in out and "summary written" in out
        with open(tmp_path / "summary.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["algo", "n", "s", "mean_iter", "mean_time_ms", "mean_obj", "conv_rate", "capped"]
        assert len(rows) == 2  # one grouped row: dys at 12x12/s=40
        for seed in (0, 1):
            assert (tmp_path / f"trace_dys_12x12_s40_seed{seed}.csv").exists()

    def test_bench_bad_sizes_exits_2(self, capsys):
        rc = cli.main(["bench", "--sizes", "nonsense"])
        assert rc == 2
        assert "sizes must look like" in capsys.readouterr().err

    def test_parse_sizes(self):
        assert cli._parse_sizes("100:1000,300:10000") == [(100, 1000), (300, 10000)]
        with pytest.raises(argparse.ArgumentTypeError):
            cli._parse_sizes("100-1000")


class TestCheckCommand:
    def test_check_passes_and_prints_one_line_per_check(self, capsys):
        rc = cli.main(["check"])
        assert rc == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 10
        assert all(line.startswith("PASS ") for line in lines)

    def test_check_failure_exits_1(self, monkeypatch):
        monkeypatch.setattr(cli, "run_all_checks", lambda: False)
        assert cli.main(["check"]) == 1


class TestExitCodes:
    def test_missing_subcommand_exits_2(self, capsys):
        assert cli.main([]) == 2
        capsys.readouterr()

    def test_unknown_algo_exits_2(self, capsys):
        assert cli.main(["solve", "--algo", "bogus"]) == 2
        capsys.readouterr()

    def test_numerical_failure_exits_3(self, monkeypatch, capsys):
        def boom():
            raise DivergenceError("iterates blew up")

        monkeypatch.setattr(cli, "run_all_checks", boom)
        rc = cli.main(["check"])
        assert rc == 3
        assert "numerical failure" in capsys.readouterr().err


def test_console_script_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "trisplit.cli", "plan", "--l1", "1", "--l2", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "gamma_ryu" in proc.stdout
