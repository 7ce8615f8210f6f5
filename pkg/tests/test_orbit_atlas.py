#!/usr/bin/env python3
"""
Test the orbit types of V_p and V_{p^2} and their closed-form counts
"""

import pytest

from orbital.errors import DomainError, ResourceCapError, UnsupportedRingError
from orbital.linear_groups import group_order
from orbital.orbit_atlas import (
    LEVEL_P,
    LEVEL_P2,
    NONMAXIMAL,
    SINGULAR_P2,
    OrbitClass,
    TypeSymbol,
    census,
    expected_counts,
    is_nm_or_totally_ramified,
    is_nonmaximal,
    level_p_orbits,
    nonmaximal_count,
    orbit_decomposition,
    orbit_split,
    representative_mod_p,
    stabilizer_order,
    type_mod_p,
    type_mod_p2,
    verify_census,
    verify_g27,
)
from orbital.types import Form


@pytest.mark.parametrize("coeffs, symbol", [
    ((0, 0, 0, 0), TypeSymbol.ZERO),
    ((1, 0, 0, 0), TypeSymbol.TRIPLE),
    ((0, 1, 0, 0), TypeSymbol.DOUBLE),
    ((0, 1, 1, 0), TypeSymbol.ONE_ONE_ONE),
    ((1, 0, 0, 2), TypeSymbol.TWO_ONE),
])
def test_level_p_types(coeffs, symbol):
    assert type_mod_p(Form.of(coeffs, 5)) is symbol


@pytest.mark.parametrize("coeffs, symbol", [
    ((0, 1, 0, 5), TypeSymbol.DOUBLE_MAX),
    ((0, 1, 0, 0), TypeSymbol.DOUBLE_STAR),
    ((1, 0, 0, 5), TypeSymbol.TRIPLE_MAX),
    ((1, 0, 5, 0), TypeSymbol.TRIPLE_STAR),
    ((1, 0, 0, 0), TypeSymbol.TRIPLE_STAR2),
    ((5, 0, 10, 0), TypeSymbol.DIVISIBLE),
])
def test_level_p2_types(coeffs, symbol):
    a = Form.of(coeffs, 25)
    assert type_mod_p2(a) is symbol
    assert symbol.reduction is type_mod_p(a.reduce(5))


def test_valuation_and_closure_methods_agree():
    for coeffs in [(0, 1, 0, 5), (1, 0, 5, 0), (1, 0, 0, 10), (0, 2, 0, 0), (3, 1, 4, 1)]:
        a = Form.of(coeffs, 25)
        assert type_mod_p2(a, method="valuation") is type_mod_p2(a, method="closure")


def test_maximality_indicators():
    assert is_nonmaximal(Form(0, 1, 0, 0, 25))
    assert not is_nonmaximal(Form(0, 1, 0, 5, 25))
    assert is_nm_or_totally_ramified(Form(1, 0, 0, 5, 25))
    assert not is_nm_or_totally_ramified(Form(0, 1, 1, 0, 25))


def test_type_mod_p_needs_prime():
    with pytest.raises(DomainError):
        type_mod_p(Form(1, 0, 0, 0, 6))


def test_valuation_method_excludes_small_primes():
    with pytest.raises(UnsupportedRingError):
        type_mod_p2(Form(1, 0, 0, 0, 9), method="valuation")


# =============================================================================
# Counts
# =============================================================================

@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_closed_forms_partition_the_space(p):
    assert sum(expected_counts(p, 1).values()) == p ** 4
    assert sum(expected_counts(p, 2).values()) == p ** 8
    assert sum(expected_counts(p, 2)[s] for s in NONMAXIMAL) == nonmaximal_count(p)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_level_p_census(p):
    assert census(p, 1) == expected_counts(p, 1)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_level_p2_census(p):
    report = verify_census(p, 2)
    assert report.passed, report.failures


@pytest.mark.slow
def test_level_p2_census_at_7():
    assert verify_census(7, 2, threads=4).passed


def test_census_cap():
    with pytest.raises(ResourceCapError):
        census(101, 2)


def test_census_keys():
    assert set(census(3, 1)) == set(LEVEL_P)
    assert set(expected_counts(3, 2)) == set(LEVEL_P2)


# =============================================================================
# Orbits and stabilizers
# =============================================================================

def test_level_p_orbit_stabilizers():
    order = group_order(5)
    for cls in level_p_orbits(5):
        assert stabilizer_order(cls.representative) == order // cls.cardinality


def test_representative_has_its_type():
    for symbol in LEVEL_P:
        assert type_mod_p(representative_mod_p(7, symbol)) is symbol


@pytest.mark.parametrize("symbol", SINGULAR_P2)
def test_orbit_split_covers_type(symbol):
    classes = orbit_split(5, symbol)
    assert sum(c.cardinality for c in classes) == expected_counts(5, 2)[symbol]
    for c in classes:
        assert type_mod_p2(c.representative) is symbol


def test_orbit_split_exclusions():
    with pytest.raises(UnsupportedRingError):
        orbit_split(2, TypeSymbol.DOUBLE_MAX)
    with pytest.raises(UnsupportedRingError):
        orbit_split(3, TypeSymbol.TRIPLE_MAX)


def test_orbit_decomposition_covers_v25():
    orbits = orbit_decomposition(5, 2)
    assert sum(size for _, size in orbits) == 5 ** 8


def test_orbit_class_checks_orbit_stabilizer():
    with pytest.raises(ValueError):
        OrbitClass(5, 1, Form(1, 0, 0, 0, 5), TypeSymbol.TRIPLE, 24, 21)


@pytest.mark.slow
def test_g27_stabilizers():
    report = verify_g27(threads=4)
    assert report.passed, report.failures
