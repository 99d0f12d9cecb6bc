"""Command-line interface: outputs, round trips, exit codes."""

import csv
import json
import os

import pytest

from keyflux.cli import curves_document, main, read_curves_document

SMALL = ["--set", "max=6"]
FAST = []  # cli always runs the full horizon; small max keeps it quick


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestExitCodes:
    def test_usage_error_is_one(self, capsys):
        code, _out, err = run(["analyze", "NOPE", "1"], capsys)
        assert code == 1
        assert "unknown strategy kind" in err

    def test_bad_flag_value_is_one(self, capsys):
        code, _out, _err = run(["analyze", "LB", "1", "--set", "bogus=3"], capsys)
        assert code == 1

    def test_missing_argument_is_one(self, capsys):
        code, _out, _err = run(["analyze"], capsys)
        assert code == 1

    def test_success_is_zero(self, capsys):
        code, out, _err = run(["analyze", "LB", "1", *SMALL], capsys)
        assert code == 0
        assert "steady risk" in out

    def test_verification_failure_is_two(self, capsys):
        # zero compromise probability cannot match the published risk table
        code, out, _err = run(
            ["verify", "--scope", "risk-average", "--kinds", "LB", "--set", "p_comp=0", "--workers", "1"],
            capsys,
        )
        assert code == 2
        assert "FAIL" in out


class TestAnalyze:
    def test_json_record(self, tmp_path, capsys):
        path = tmp_path / "record.json"
        code, _out, _err = run(
            ["analyze", "LB", "2", *SMALL, "--json", str(path)], capsys
        )
        assert code == 0
        record = json.loads(path.read_text())
        assert record["kind"] == "LB"
        assert record["threshold"] == 2
        assert len(record["monthlyRisk"]) == 120
        assert record["stateCount"] > 0
        assert 0 <= record["steadyRisk"] <= 1

    def test_zero_pcomp_zero_risk(self, tmp_path, capsys):
        path = tmp_path / "r.json"
        code, _out, _err = run(
            ["analyze", "LB", "1", "--set", "max=6", "--set", "p_comp=0", "--json", str(path)],
            capsys,
        )
        assert code == 0
        record = json.loads(path.read_text())
        assert record["steadyRisk"] == 0.0
        assert record["maxRisk"] == 0.0

    def test_plot_written(self, tmp_path, capsys):
        fig = tmp_path / "timeline.png"
        code, _out, _err = run(["analyze", "JB", "1", *SMALL, "--plot", str(fig)], capsys)
        assert code == 0
        assert fig.exists() and fig.stat().st_size > 0


class TestSweep:
    def test_tables_written(self, tmp_path, capsys):
        code, _out, _err = run(
            ["sweep", "--kinds", "LB", "--thresholds", "1,2", *SMALL, "--out", str(tmp_path), "--workers", "1"],
            capsys,
        )
        assert code == 0
        for name, metrics in (
            ("risk.csv", {"risk_max", "risk_average"}),
            ("cost.csv", {"cost_before_monthly", "cost_after_monthly"}),
            ("stabilisation.csv", {"stabilisation_month"}),
        ):
            with open(tmp_path / name, newline="") as fh:
                rows = list(csv.DictReader(fh))
            assert {r["metric"] for r in rows} == metrics
            assert {(r["kind"], r["threshold"]) for r in rows} == {("LB", "1"), ("LB", "2")}
            assert list(rows[0].keys()) == ["kind", "threshold", "metric", "value"]


class TestCurves:
    def test_json_round_trip(self, tmp_path, capsys):
        code, _out, _err = run(
            [
                "curves",
                "--kinds",
                "LB,JB",
                "--thresholds",
                "1,2",
                *SMALL,
                "--out",
                str(tmp_path),
                "--no-plot",
                "--workers",
                "1",
            ],
            capsys,
        )
        assert code == 0
        doc = read_curves_document(str(tmp_path / "curves.json"))
        assert {c["kind"] for c in doc["curves"]} == {"LB", "JB"}
        assert {c["phase"] for c in doc["curves"]} == {"before", "after"}
        point = doc["curves"][0]["points"][0]
        assert set(point) == {"threshold", "costPerMonth", "riskPercent"}
        # re-reading parses to values identical to those emitted
        assert json.loads(json.dumps(doc)) == doc

    def test_plot_rendered_alongside_data(self, tmp_path, capsys):
        code, _out, _err = run(
            ["curves", "--kinds", "LB", "--thresholds", "1", *SMALL, "--out", str(tmp_path), "--workers", "1"],
            capsys,
        )
        assert code == 0
        assert (tmp_path / "curves.json").exists()
        assert (tmp_path / "curves.png").stat().st_size > 0

    def test_empty_kinds_is_usage_error(self, capsys):
        code, _out, _err = run(["curves", "--kinds", ",", *SMALL], capsys)
        assert code == 1


class TestStatespace:
    def test_published_cells(self, capsys):
        code, out, _err = run(
            ["statespace", "--kinds", "LB", "--thresholds", "1", "--max", "50,100", "--workers", "1"],
            capsys,
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "kind,threshold,max,states,transitions"
        assert "LB,1,50,101,349" in lines
        assert "LB,1,100,201,699" in lines

    def test_cap_exceeded_reported_per_cell(self, tmp_path, capsys):
        # TB at k=100 has 10200 states for max=50; a tiny cap trips it
        code, out, _err = run(
            ["statespace", "--kinds", "TB", "--thresholds", "1", "--max", "50", "--workers", "1"],
            capsys,
        )
        assert code == 0
        assert "TB,1,50,10200,50200" in out


class TestVerify:
    def test_statespace_scope_passes(self, capsys):
        code, out, _err = run(
            ["verify", "--scope", "statespace", "--kinds", "LB,JB", "--max", "50", "--workers", "1"],
            capsys,
        )
        assert code == 0
        assert "20/20 checks passed" in out

    def test_json_report(self, tmp_path, capsys):
        path = tmp_path / "report.json"
        code, _out, _err = run(
            ["verify", "--scope", "statespace", "--kinds", "LB", "--max", "50", "--json", str(path), "--workers", "1"],
            capsys,
        )
        assert code == 0
        entries = json.loads(path.read_text())
        assert len(entries) == 10
        assert all(e["passed"] for e in entries)


class TestSimulateCommand:
    def test_requires_seed(self, capsys):
        code, _out, _err = run(["simulate", "LB", "1", *SMALL], capsys)
        assert code == 1

    def test_runs_with_seed(self, capsys):
        code, out, _err = run(
            ["simulate", "LB", "1", *SMALL, "--trials", "200", "--horizon-days", "30", "--seed", "9"],
            capsys,
        )
        assert code == 0
        assert "risk at 30 days" in out
