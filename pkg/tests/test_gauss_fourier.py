#!/usr/bin/env python3
"""
Test orbital Gauss sums, the finite Fourier transform and the Gauss sum tables
"""

from fractions import Fraction

import pytest

from orbital.errors import ContractViolationError, DomainError
from orbital.gauss_fourier import (
    FiniteFunction,
    check_decomposition,
    check_equivariance,
    check_fourier_inversion,
    check_identities,
    check_inversion,
    check_orbit_function_transform,
    check_product_fourier,
    check_pv_reduction,
    check_reduction,
    check_stabilizer_vanishing,
    divisible_indicator,
    divisible_transform_value,
    form_outside_orbit,
    fourier_transform,
    fourier_value,
    mori_table,
    orbital_gauss_sum,
    parseval_check,
    verify_divisible_fourier,
    verify_phi_transforms,
    verify_mori_table,
    verify_singular_table,
    verify_squarefree_divisible,
)
from orbital.linear_groups import group_order
from orbital.orbit_atlas import LEVEL_P, TypeSymbol, expected_counts, orbit_forms, type_mod_p
from orbital.residue_rings import DirichletCharacter, all_characters
from orbital.types import DualForm, Form


def _assert_passed(report):
    assert report.passed, [f"{c.location}: expected {c.expected}, got {c.got}" for c in report.failures]


# =============================================================================
# FiniteFunction
# =============================================================================

def test_from_values_merges_duplicates():
    f = FiniteFunction.from_values(5, [3, 3, 7], [1, Fraction(1, 2), 2])
    assert len(f) == 2
    assert f.value(3).equals(Fraction(3, 2))
    assert f.value(7).equals(2)
    assert f.value(4).equals(0)
    assert f.sum_of_squares() == Fraction(9, 4) + 4


def test_value_rejects_other_modulus():
    f = FiniteFunction.from_values(5, [1], [1])
    with pytest.raises(DomainError):
        f.value(Form(1, 0, 0, 0, 7))


def test_support_must_increase():
    with pytest.raises(DomainError):
        FiniteFunction(5, [4, 2], [[1], [1]])


def test_scaled_argument_moves_support():
    a = Form(1, 2, 0, 3, 7)
    f = FiniteFunction.from_points([a], [1])
    g = f.scaled_argument(3)
    # g(x) = f(3x), so g is supported at a / 3
    assert g.value(a.scaled(pow(3, -1, 7))).equals(1)
    assert g.value(a).equals(0)


def test_tensor_is_pointwise_product():
    f = FiniteFunction.from_points([Form(1, 0, 0, 0, 3)], [2])
    g = FiniteFunction.from_points([Form(0, 1, 4, 0, 5), Form(1, 1, 1, 1, 5)], [1, 3])
    h = f.tensor(g)
    assert h.modulus == 15
    assert len(h) == 2
    # (10, 6, 9, 0) reduces to (1, 0, 0, 0) mod 3 and (0, 1, 4, 0) mod 5
    assert h.value(Form(10, 6, 9, 0, 15)).equals(2)
    assert h.total().equals(8)


def test_tensor_needs_coprime_moduli():
    f = FiniteFunction.from_values(3, [1], [1])
    with pytest.raises(DomainError):
        f.tensor(FiniteFunction.from_values(9, [1], [1]))


def test_orbit_function_total_is_group_order(trivial_5, rng):
    f = FiniteFunction.orbit_function(trivial_5, Form(1, 0, 0, 0, 5))
    assert f.total().equals(group_order(5))
    f.check_relative_invariance(trivial_5, rng)


def test_divisible_indicator_is_invariant(trivial_5, rng):
    f = divisible_indicator(5)
    # singular forms mod p: p^3 + p^2 - p
    assert len(f) == 125 + 25 - 5
    f.check_relative_invariance(trivial_5, rng)


def test_relative_invariance_violation_has_witness(trivial_5, rng):
    f = FiniteFunction.from_points([Form(1, 0, 0, 0, 5)], [1])
    with pytest.raises(ContractViolationError) as info:
        f.check_relative_invariance(trivial_5, rng)
    assert info.value.witness is not None


# =============================================================================
# Gauss sums
# =============================================================================

def test_gauss_sum_at_zero_dual_is_group_order():
    trivial = DirichletCharacter.trivial(7)
    w = orbital_gauss_sum(trivial, Form(0, 1, 0, 0, 7), DualForm(0, 0, 0, 0, 7))
    assert w.equals(group_order(7))


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_mod_p_table_rows_sum_to_zero(p):
    # sum over all b of W(1, a, b) vanishes for a != 0; iota matches dual and form type counts
    table = mori_table(p)
    counts = expected_counts(p, 1)
    for a_symbol in (TypeSymbol.TRIPLE, TypeSymbol.DOUBLE):
        assert sum(table[(a_symbol, b)] * counts[b] for b in LEVEL_P) == 0


def test_mod_p_table_at_5():
    report = verify_mori_table(5)
    _assert_passed(report)
    assert len(report.cells) == 12


def test_mod_p_table_needs_p_at_least_5():
    with pytest.raises(DomainError):
        verify_mori_table(3)


def test_singular_table_at_5():
    _assert_passed(verify_singular_table(5))


@pytest.mark.slow
def test_singular_table_at_7():
    _assert_passed(verify_singular_table(7, threads=4))


def test_equivariance(cubic_character_mod_7, rng):
    _assert_passed(check_equivariance(cubic_character_mod_7, 7, rng))


def test_stabilizer_vanishing(rng):
    chi = [c for c in all_characters(5) if c.order == 2][0]
    _assert_passed(check_stabilizer_vanishing(chi, Form(0, 1, 0, 0, 5), rng))


def test_orbit_function_transform(cubic_character_mod_7, rng):
    _assert_passed(check_orbit_function_transform(cubic_character_mod_7, Form(1, 0, 0, 1, 7), rng))


# =============================================================================
# Fourier transforms
# =============================================================================

@pytest.mark.parametrize("p", [2, 3, 5])
def test_divisible_transform(p):
    _assert_passed(verify_divisible_fourier(p))


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_divisible_transform_sums_to_value_at_zero(p):
    # sum_b f^(b) = f(0) = 1; singular nonzero dual forms number p^3 + p^2 - p - 1
    values = [
        divisible_transform_value(p, DualForm(0, 0, 0, 0, p)),
        divisible_transform_value(p, DualForm(1, 0, 0, 0, p)),
        divisible_transform_value(p, DualForm(1, 0, 0, 1, p)),
    ]
    singular = p ** 3 + p ** 2 - p - 1
    nonsingular = p ** 4 - singular - 1
    assert values[0] + singular * values[1] + nonsingular * values[2] == 1


def test_squarefree_divisible_is_multiplicative(rng):
    _assert_passed(verify_squarefree_divisible(15, 5, rng))
    with pytest.raises(DomainError):
        verify_squarefree_divisible(12, 1, rng)


def test_transform_of_delta_at_zero():
    f = FiniteFunction.from_points([Form(0, 0, 0, 0, 3)], [1])
    fhat = fourier_transform(f)
    assert len(fhat) == 3 ** 4
    assert fourier_value(f, DualForm(1, 2, 0, 1, 3)).equals(Fraction(1, 81))


def test_fourier_inversion(rng):
    _assert_passed(check_fourier_inversion(5, rng))


def test_nonmaximal_transforms_at_5():
    _assert_passed(verify_phi_transforms(5))


@pytest.mark.slow
def test_nonmaximal_transforms_at_7():
    _assert_passed(verify_phi_transforms(7, threads=4))


def test_parseval_at_5():
    _assert_passed(parseval_check(5))


# =============================================================================
# Identities
# =============================================================================

def test_pv_reduction(rng):
    _assert_passed(check_pv_reduction(5, rng, samples=2))


def test_reduction_by_prime_factor(rng):
    chi5 = all_characters(5)[1]
    _assert_passed(check_reduction(chi5, 25, 5, rng, samples=2))


def test_reduction_needs_conductor_to_divide():
    chi5 = all_characters(5)[1]
    with pytest.raises(DomainError):
        check_reduction(chi5, 5, 5, None)


def test_crt_decomposition(rng):
    _assert_passed(check_decomposition(all_characters(15)[1], rng, samples=2))


def test_product_fourier(rng):
    _assert_passed(check_product_fourier(3, 5, rng))


def test_identities_mod_5(rng):
    _assert_passed(check_identities(5, all_characters(5)[1], rng))


def test_form_outside_orbit_at_prime_level(rng):
    a = Form(1, 0, 0, 1, 5)
    b = form_outside_orbit(a, rng)
    assert not b.is_zero()
    assert b not in orbit_forms(a)
    # level-p types are single orbits
    assert type_mod_p(b) is not type_mod_p(a)


def test_form_outside_orbit_keeps_the_type_mod_p(rng):
    a = Form(0, 1, 0, 5, 25)
    b = form_outside_orbit(a, rng)
    assert b not in orbit_forms(a)
    assert type_mod_p(b.reduce(5)) is TypeSymbol.DOUBLE


def test_inversion_separates_orbits(rng):
    report = check_inversion(all_characters(5)[1], 5, rng)
    _assert_passed(report)
    assert any("outside the orbit" in c.location and "[0, 0, 0, 0]" not in c.location for c in report.cells)
