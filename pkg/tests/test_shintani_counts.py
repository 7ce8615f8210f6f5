#!/usr/bin/env python3
"""
Test class enumeration, class number tables and the weighted zeta coefficients
"""

from fractions import Fraction

import pytest

from orbital import config
from orbital.errors import ContractViolationError, DomainError, OracleInconclusiveError
from orbital.gauss_fourier import FiniteFunction
from orbital.local_densities import unramified_cubic_character
from orbital.residue_rings import DirichletCharacter
from orbital.shintani_counts import (
    ClassNumberTable,
    ClassRecord,
    bfs_canonical_oracle,
    class_arrays,
    class_number_table,
    divisible_coeffs,
    enumerate_classes,
    progression_partial_sums,
    stabilizer_elements,
    theta_coeffs,
    verify_ohno_nakagawa,
    verify_oracle,
    verify_partial_zeta,
    verify_stabilizer_rings,
    verify_theta,
    verify_twisted,
    weighted_coeffs,
)
from orbital.types import Form


def _assert_passed(report):
    assert report.passed, [f"{c.location}: expected {c.expected}, got {c.got}" for c in report.failures]


# =============================================================================
# Classes
# =============================================================================

def test_smallest_positive_class_has_stabilizer_three():
    first = enumerate_classes(50, 1)[0]
    assert first.disc == 1
    assert first.stabilizer == 3
    assert len(stabilizer_elements(first.representative)) == 3


def test_classes_are_sorted_and_in_range():
    records = enumerate_classes(150, -1)
    discs = [abs(r.disc) for r in records]
    assert discs == sorted(discs)
    assert all(0 < d <= 150 for d in discs)
    assert all(r.disc < 0 for r in records)


def test_class_arrays_reject_bad_sign():
    with pytest.raises(DomainError):
        class_arrays(10, 0)


def test_class_record_validation():
    with pytest.raises(DomainError):
        ClassRecord(Form(0, 1, -1, 0), 1, 2)
    with pytest.raises(DomainError):
        ClassRecord(Form(1, 0, 0, 0), 0, 1)


def test_class_record_properties():
    split = ClassRecord(Form(0, 1, -1, 0), 1, 3)
    assert split.is_reducible()
    pure = ClassRecord(Form(1, 0, 0, 2), -108, 1)
    assert not pure.is_reducible()
    assert pure.maximality_mask() == 0b1111
    assert ClassRecord.from_dict(pure.to_dict()) == pure


# =============================================================================
# Class number tables
# =============================================================================

def test_class_numbers_are_thirds():
    table = class_number_table(200, 1)
    assert table[1] == Fraction(1, 3)
    assert all((3 * h).denominator == 1 for h in table.coefficients.values())
    assert table.total() == sum(table.coefficients.values())


def test_table_round_trip(tmp_path):
    table = class_number_table(100, -1)
    path = tmp_path / "tables" / "h_minus.json"
    table.save(path)
    loaded = ClassNumberTable.load(path)
    assert loaded.coefficients == table.coefficients
    assert (loaded.sign, loaded.bound, loaded.dual) == (-1, 100, False)
    assert loaded.metadata["classes"] == table.metadata["classes"]


def test_table_manifest_carries_format_version():
    data = class_number_table(50, 1).to_dict()
    assert data["manifest"]["version"] == config.TABLE_FORMAT_VERSION
    assert "version" not in ClassNumberTable.from_dict(data).metadata
    data["manifest"]["version"] = config.TABLE_FORMAT_VERSION + 1
    with pytest.raises(DomainError):
        ClassNumberTable.from_dict(data)


def test_ohno_nakagawa_small():
    _assert_passed(verify_ohno_nakagawa(200))


@pytest.mark.slow
def test_ohno_nakagawa_default_bound():
    _assert_passed(verify_ohno_nakagawa(threads=4))


def test_progression_partial_sums():
    table = ClassNumberTable(1, 10, {1: Fraction(1, 3), 4: Fraction(1), 7: Fraction(2, 3), 8: Fraction(5)})
    sums = progression_partial_sums(table, 3, 1, [1, 5, 10])
    assert sums == {1: Fraction(1, 3), 5: Fraction(4, 3), 10: Fraction(2)}
    with pytest.raises(DomainError):
        progression_partial_sums(table, 3, 1, [20])


# =============================================================================
# Oracle
# =============================================================================

def test_oracle_on_split_form():
    result = bfs_canonical_oracle(Form(0, 1, -1, 0))
    assert result.canonical.height() == 1
    assert result.stabilizer_order == 3
    assert not result.truncated


def test_oracle_visit_budget():
    result = bfs_canonical_oracle(Form(0, 1, -1, 0), max_visited=3)
    assert result.truncated
    assert result.visited == 3
    with pytest.raises(OracleInconclusiveError):
        bfs_canonical_oracle(Form(0, 1, -1, 0), max_visited=3, strict=True)


def test_oracle_domain():
    with pytest.raises(DomainError):
        bfs_canonical_oracle(Form(1, 0, 0, 0, 5))
    with pytest.raises(DomainError):
        bfs_canonical_oracle(Form(1, 0, 0, 0))


def test_oracle_agrees_with_reduction():
    _assert_passed(verify_oracle(60))


def test_stabilizer_rings():
    _assert_passed(verify_stabilizer_rings(150))


# =============================================================================
# Weighted coefficients
# =============================================================================

def test_divisible_by_one_is_the_class_table():
    assert divisible_coeffs(1, 100, 1) == class_number_table(100, 1).coefficients


def test_divisible_coeffs_keep_multiples():
    coeffs = divisible_coeffs(5, 300, -1)
    table = class_number_table(300, -1)
    assert coeffs == {n: h for n, h in table.coefficients.items() if n % 5 == 0}


def test_theta_factors_by_gcd():
    theta = theta_coeffs(6, 200, 1)
    table = class_number_table(200, 1)
    # n prime to 6 keeps h(n); 2 || gcd multiplies by 1 - 2
    assert theta.get(49, Fraction(0)) == table[49]
    assert theta.get(4, Fraction(0)) == -table[4]


@pytest.mark.parametrize("sign", [1, -1])
def test_theta_mod_15(sign):
    _assert_passed(verify_theta(15, 300, sign))


@pytest.mark.parametrize("sign", [1, -1])
def test_theta_mod_6(sign):
    report = verify_theta(6, 500, sign)
    _assert_passed(report)
    assert report.cells[0].got == "500"


def test_partial_zeta_by_character_average():
    _assert_passed(verify_partial_zeta(Form(1, 0, 1, 1, 5), 200))


def test_twisted_by_unramified_cubic_character():
    _assert_passed(verify_twisted(unramified_cubic_character(7), 1, 300))


@pytest.mark.slow
def test_twisted_at_the_conductor():
    chi = unramified_cubic_character(5)
    _assert_passed(verify_twisted(chi, chi.modulus, 300))


def test_weighted_coeffs_checks_invariance(rng):
    trivial = DirichletCharacter.trivial(5)
    f = FiniteFunction.from_points([Form(1, 0, 0, 0, 5)], [1])
    with pytest.raises(ContractViolationError):
        weighted_coeffs(f, 50, 1, chi=trivial, rng=rng)


def test_weighted_coeffs_needs_forms_not_duals():
    f = FiniteFunction.from_values(5, [1], [1], dual=True)
    with pytest.raises(DomainError):
        weighted_coeffs(f, 50, 1)
