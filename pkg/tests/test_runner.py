#!/usr/bin/env python3
"""
Test the command-line front end and the report serialization it relies on
"""

from fractions import Fraction

import pytest

from orbital.errors import VerificationError
from orbital.shintani_counts import ClassNumberTable
from runner import EXIT_OK, EXIT_USAGE, run
from utils.report import VerificationReport, emit, parse


# =============================================================================
# Usage errors
# =============================================================================

def test_no_command_is_usage_error():
    assert run([]) == EXIT_USAGE


def test_unknown_flag_is_usage_error():
    assert run(["atlas", "census", "--prime", "3", "--bogus"]) == EXIT_USAGE


def test_help_exits_cleanly():
    assert run(["atlas", "census", "--help"]) == EXIT_OK


def test_threads_must_be_positive():
    assert run(["atlas", "census", "--prime", "3", "--threads", "0"]) == EXIT_USAGE


def test_resource_cap_is_usage_error():
    assert run(["atlas", "census", "--prime", "101", "--level", "p2", "--threads", "1"]) == EXIT_USAGE


def test_residue_filter_needs_modulus():
    assert run(["zeta", "coeffs", "--max-disc", "50", "--residue", "1"]) == EXIT_USAGE


def test_unknown_weight_and_character():
    assert run(["density", "residue", "--modulus", "5", "--weight", "nope"]) == EXIT_USAGE
    assert run(["density", "residue", "--modulus", "5", "--weight", "divisible", "--character", "9"]) == EXIT_USAGE


# =============================================================================
# Reports
# =============================================================================

def test_census_writes_json_and_csv(tmp_path, capsys):
    json_path, csv_path = tmp_path / "census.json", tmp_path / "census.csv"
    code = run(["atlas", "census", "--prime", "3", "--level", "p", "--threads", "1",
                "--json", str(json_path), "--csv", str(csv_path)])
    assert code == EXIT_OK
    (report,) = parse(json_path.read_bytes())
    assert report.passed
    assert report.suite == "census_p3_e1"
    # six types plus the total
    assert len(report.cells) == 7
    assert len(csv_path.read_text().splitlines()) == len(report.cells) + 1
    assert "PASS" in capsys.readouterr().out


def test_unwritable_report_is_an_error(tmp_path, capsys):
    path = tmp_path / "missing_dir" / "census.json"
    code = run(["atlas", "census", "--prime", "3", "--threads", "1", "--json", str(path)])
    assert code == EXIT_USAGE
    assert not path.exists()
    captured = capsys.readouterr()
    assert "[OK]Saved" not in captured.out
    assert "runner.py: error:" in captured.err


def test_mod_p_gauss_table(tmp_path):
    path = tmp_path / "mori.json"
    assert run(["gauss", "verify", "--prime", "5", "--table", "mori", "--threads", "1", "--json", str(path)]) == EXIT_OK
    (report,) = parse(path.read_text())
    assert len(report.cells) == 12


def test_gauss_value_payload(tmp_path):
    path = tmp_path / "w.json"
    code = run(["gauss", "value", "--modulus", "7", "--form", "1,0,0,0", "--dual", "0,0,0,0",
                "--threads", "1", "--json", str(path)])
    assert code == EXIT_OK
    assert '"a": [' in path.read_text()


def test_coefficient_table_file(tmp_path):
    path = tmp_path / "h_plus.json"
    assert run(["zeta", "coeffs", "--max-disc", "100", "--sign", "+", "--threads", "1", "--out", str(path)]) == EXIT_OK
    table = ClassNumberTable.load(path)
    assert table[1] == Fraction(1, 3)


def test_failing_report_raises():
    report = VerificationReport("demo")
    report.add("one", 1, 2)
    assert not report.passed
    with pytest.raises(VerificationError):
        report.raise_for_failures()


def test_report_round_trip():
    report = VerificationReport("demo", workers=3)
    report.add("exact", Fraction(1, 3), Fraction(1, 3))
    report.add("float", 1.0, 1.0 + 1e-12, tolerance=1e-9)
    report.check("flag", False, note="kept")
    (back,) = parse(emit(report.finish()))
    assert back.suite == "demo" and back.workers == 3
    assert [c.passed for c in back.cells] == [True, True, False]
    assert back.cells[2].note == "kept"
    assert len(emit([report, report], "csv").decode().splitlines()) == 2 * len(report.cells) + 1
