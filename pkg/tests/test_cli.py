"""Command-line interface: parsing, reports, exit codes."""

import json
from fractions import Fraction

import pytest

from digitq.cli import main, parse_angle


class TestParseAngle:
    @pytest.mark.parametrize("text,expected", [
        ("0", Fraction(0)),
        ("pi", Fraction(1)),
        ("1/3pi", Fraction(1, 3)),
        ("3/4 pi", Fraction(3, 4)),
        ("2pi", Fraction(2)),
        ("1/2pi", Fraction(1, 2)),
    ])
    def test_valid(self, text, expected):
        assert parse_angle(text) == expected

    @pytest.mark.parametrize("text", ["", "x", "1.5pi", "2", "pi/3"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_angle(text)


class TestHelp:
    def test_help_enumerates_experiments(self, capsys):
        with pytest.raises(SystemExit):
            main(["--help"])
        out = capsys.readouterr().out
        for name in ("polarization", "trace-rule", "epr", "interference",
                     "weak-reduction", "seed-invariance", "state", "suite"):
            assert name in out

    def test_subcommand_help_lists_flags(self, capsys):
        with pytest.raises(SystemExit):
            main(["polarization", "--help"])
        out = capsys.readouterr().out
        for flag in ("--seed", "--depth", "--length", "--threads", "--out",
                     "--format", "--theta"):
            assert flag in out


class TestStateCommand:
    def test_qubit_constant_zero(self, capsys):
        rc = main(["state", "qubit", "--theta", "0", "--lambda", "0",
                   "--length", "16384", "--prefix", "8"])
        out = capsys.readouterr().out
        assert rc == 0
        assert ".00000000" in out

    def test_off_grid_exit_code(self, capsys):
        rc = main(["state", "qubit", "--theta", "1/2pi", "--lambda", "1/3pi"])
        err = capsys.readouterr().err
        assert rc == 2
        assert "off-grid" in err


class TestExperimentCommands:
    def test_polarization_writes_reports(self, tmp_path, capsys):
        rc = main(["polarization", "--theta", "1/3pi", "--depth", "9",
                   "--seed", "7", "--out", str(tmp_path)])
        assert rc == 0
        payload = json.loads((tmp_path / "report.json").read_text())
        assert payload[0]["experiment"] == "polarization"
        assert payload[0]["passed"] is True
        csv_text = (tmp_path / "report.csv").read_text()
        assert csv_text.startswith("experiment,statistic")

    def test_csv_byte_identical_across_runs(self, tmp_path):
        d1 = tmp_path / "a"
        d2 = tmp_path / "b"
        for d in (d1, d2):
            rc = main(["epr", "--dtheta", "1/2pi", "--pairs", "512",
                       "--seed", "3", "--out", str(d), "--format", "csv"])
            assert rc == 0
        assert (d1 / "report.csv").read_bytes() == (d2 / "report.csv").read_bytes()

    def test_epr_correlation_near_zero(self, tmp_path):
        rc = main(["epr", "--dtheta", "1/2pi", "--pairs", "2048",
                   "--out", str(tmp_path), "--format", "json"])
        assert rc == 0
        payload = json.loads((tmp_path / "report.json").read_text())
        assert abs(payload[0]["statistics"][0]["observed"]) <= 0.05

    def test_interference(self, capsys):
        rc = main(["interference", "--depth", "8"])
        assert rc == 0

    def test_weak_reduction_small(self, capsys):
        rc = main(["weak-reduction", "--theta0", "1/2pi", "--walks", "120",
                   "--seed", "1"])
        assert rc == 0

    def test_seed_invariance_negative_control(self, capsys):
        rc = main(["seed-invariance", "--negative-control"])
        assert rc == 0


class TestSuiteCommand:
    def test_reduced_suite_passes(self, tmp_path, capsys):
        rc = main(["suite", "--depth", "8", "--samples", "192", "--walks", "64",
                   "--seed", "0", "--out", str(tmp_path), "--format", "json"])
        out = capsys.readouterr().out
        assert "suite:" in out
        assert rc == 0
        payload = json.loads((tmp_path / "report.json").read_text())
        names = {r["experiment"] for r in payload}
        assert {"operator_algebra", "polarization", "trace_rule", "epr",
                "interference", "weak_reduction", "seed_invariance"} <= names

    def test_negative_control_suite(self, capsys):
        rc = main(["suite", "--depth", "8", "--samples", "128", "--walks", "48",
                   "--negative-control"])
        out = capsys.readouterr().out
        assert "negative control: as expected" in out
        assert rc == 0
