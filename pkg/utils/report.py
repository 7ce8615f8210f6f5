"""
Verification reports.

A report is a flat list of cells, one per table entry or property check,
each carrying the expected and computed values as strings. Reports
serialize to JSON (indent 2) and CSV with a stable field order and parse
back from JSON unchanged.
"""

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from numbers import Number
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

from orbital.cyclotomic import CyclotomicSum
from orbital.errors import VerificationError

logger = logging.getLogger(__name__)

CELL_FIELDS = ("location", "expected", "got", "exact", "passed", "note")


def format_value(value: Any) -> str:
    """Exact rationals as "num/den", decimals with 12 significant digits."""
    if isinstance(value, bool) or isinstance(value, str):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, CyclotomicSum):
        if value.is_rational():
            return format_value(value.rational_value())
        return format_value(value.value)
    if isinstance(value, complex):
        if value.imag == 0:
            return f"{value.real:.12g}"
        return f"{value.real:.12g}{value.imag:+.12g}i"
    if isinstance(value, Number):
        return f"{float(value):.12g}"
    return str(value)


def _is_exact(value: Any) -> bool:
    return isinstance(value, (int, Fraction, CyclotomicSum)) and not isinstance(value, bool)


def values_match(expected: Any, got: Any, tolerance: float) -> bool:
    """Exact comparison when both sides are exact, relative tolerance otherwise."""
    if _is_exact(expected) and _is_exact(got):
        if isinstance(got, CyclotomicSum):
            return got.equals(expected)
        if isinstance(expected, CyclotomicSum):
            return expected.equals(got)
        return Fraction(expected) == Fraction(got)
    if isinstance(expected, bool) or isinstance(got, bool):
        return expected == got
    e, g = complex(expected), complex(got)
    return abs(e - g) <= tolerance * max(1.0, abs(e))


@dataclass
class ReportCell:
    location: str
    expected: str
    got: str
    exact: bool
    passed: bool
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in CELL_FIELDS}


@dataclass
class VerificationReport:
    """Outcome of one verification suite."""

    suite: str
    cells: List[ReportCell] = field(default_factory=list)
    wall_time: float = 0.0
    workers: int = 1

    def __post_init__(self) -> None:
        self._started = time.time()

    @property
    def passed(self) -> bool:
        return all(cell.passed for cell in self.cells)

    @property
    def failures(self) -> List[ReportCell]:
        return [cell for cell in self.cells if not cell.passed]

    def add(
        self,
        location: str,
        expected: Any,
        got: Any,
        tolerance: float = 0.0,
        passed: Optional[bool] = None,
        note: str = "",
    ) -> ReportCell:
        """Record one check; ``passed`` is computed from the values unless given."""
        exact = _is_exact(expected) and _is_exact(got)
        if passed is None:
            passed = values_match(expected, got, tolerance)
        cell = ReportCell(location, format_value(expected), format_value(got), exact, bool(passed), note)
        self.cells.append(cell)
        if cell.passed:
            logger.debug(f"[{self.suite}] {location}: {cell.got}")
        else:
            logger.warning(f"[{self.suite}] {location}: expected {cell.expected}, got {cell.got}")
        return cell

    def check(self, location: str, condition: bool, note: str = "") -> ReportCell:
        """Record a boolean property."""
        return self.add(location, True, bool(condition), passed=bool(condition), note=note)

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        for cell in other.cells:
            self.cells.append(
                ReportCell(f"{other.suite}/{cell.location}", cell.expected, cell.got, cell.exact, cell.passed, cell.note)
            )
        return self

    def finish(self) -> "VerificationReport":
        self.wall_time = round(time.time() - self._started, 3)
        return self

    def raise_for_failures(self) -> None:
        if not self.passed:
            first = self.failures[0]
            raise VerificationError(
                f"{self.suite}: {len(self.failures)} of {len(self.cells)} cells failed "
                f"(first: {first.location} expected {first.expected}, got {first.got})"
            )

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "wall_time": self.wall_time,
            "workers": self.workers,
            "cells": [cell.to_dict() for cell in self.cells],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VerificationReport":
        report = cls(
            suite=data["suite"],
            cells=[ReportCell(**{name: c[name] for name in CELL_FIELDS}) for c in data.get("cells", [])],
            wall_time=data.get("wall_time", 0.0),
            workers=data.get("workers", 1),
        )
        return report

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.suite}: {status} ({len(self.cells) - len(self.failures)}/{len(self.cells)} cells, {self.wall_time:.1f}s)"


def emit(reports: Union[VerificationReport, Iterable[VerificationReport]], fmt: str = "json") -> bytes:
    """Serialize one or more reports as JSON or CSV."""
    if isinstance(reports, VerificationReport):
        reports = [reports]
    reports = list(reports)
    if fmt == "json":
        payload: Any = reports[0].to_dict() if len(reports) == 1 else {"reports": [r.to_dict() for r in reports]}
        return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if fmt == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(("suite",) + CELL_FIELDS)
        for report in reports:
            for cell in report.cells:
                writer.writerow([report.suite] + [getattr(cell, name) for name in CELL_FIELDS])
        return buffer.getvalue().encode("utf-8")
    raise ValueError(f"unknown report format: {fmt}")


def parse(data: Union[str, bytes]) -> List[VerificationReport]:
    """Inverse of emit(..., "json")."""
    payload = json.loads(data)
    if "reports" in payload:
        return [VerificationReport.from_dict(r) for r in payload["reports"]]
    return [VerificationReport.from_dict(payload)]


def write_reports(reports: Iterable[VerificationReport], path: Union[str, Path], fmt: str = "json") -> None:
    """Write reports to a file; I/O failures are logged and re-raised."""
    path = Path(path)
    try:
        path.write_bytes(emit(list(reports), fmt))
    except OSError as e:
        logger.error(f"Could not write {path.name}: {e}")
        raise
