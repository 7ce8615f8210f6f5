#!/usr/bin/env python3
"""
Test local densities, residue tables and the gamma-matrix identity
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from orbital.errors import DomainError, UnsupportedRingError
from orbital.gauss_fourier import FiniteFunction, divisible_indicator
from orbital.local_densities import (
    LocalDensityValue,
    ResidueVector,
    assembled_standard_l_density,
    assembled_theta_residues,
    b_density,
    b_prime,
    bias_constant_k1,
    c_density,
    compare_progressions,
    dirichlet_l,
    gamma_matrices,
    gamma_two_thirds,
    has_bias_pole,
    i_value,
    identity_check,
    progression_prediction,
    ramified_cubic_characters,
    residue_constants,
    residue_of_zeta,
    standard_l_density,
    standard_l_residue,
    theta_residues,
    tilde_at_p,
    tilde_c,
    tilde_c_representatives,
    twisted_density,
    twisted_residue,
    unramified_cubic_character,
    verify_corollaries,
    verify_density_properties,
    verify_gamma,
    verify_l_residues,
    verify_ramified_level_p,
    verify_ramified_maximal,
    verify_ramified_nonmaximal,
    verify_residue_tables,
    verify_unramified_level_p,
    verify_unramified_maximal,
    verify_unramified_nonmaximal,
    zeta_one_third,
)
from orbital.residue_rings import DirichletCharacter, characters_of_order
from orbital.shintani_counts import ClassNumberTable
from orbital.types import Form


def _assert_passed(report):
    assert report.passed, [f"{c.location}: expected {c.expected}, got {c.got}" for c in report.failures]


# =============================================================================
# Value types and constants
# =============================================================================

def test_local_density_value_from_polynomial():
    v = LocalDensityValue.from_polynomial({0: 1, 1: -1}, 0.5)
    assert abs(v.value - 0.5) < 1e-15
    doubled = v.scaled(2)
    assert doubled.exact == ((0, Fraction(2)), (1, Fraction(-2)))
    assert abs(complex(doubled) - 1.0) < 1e-15


def test_local_density_value_checks_exact_form():
    with pytest.raises(DomainError):
        LocalDensityValue(1.0, ((0, Fraction(2)),), 0.3)
    with pytest.raises(DomainError):
        LocalDensityValue(1.0, ((0, Fraction(1)),))


def test_residue_vector_arithmetic():
    v = ResidueVector(1 + 0j, 2 + 0j) * 3 + ResidueVector(1j, 0j)
    assert v == ResidueVector(3 + 1j, 6 + 0j)
    assert v.is_finite()
    assert v.to_list() == [[3.0, 1.0], [6.0, 0.0]]


def test_special_values():
    assert abs(zeta_one_third() - (-0.97336025)) < 1e-7
    assert abs(gamma_two_thirds() - 1.3541179394264) < 1e-9
    assert abs(dirichlet_l(2, DirichletCharacter.trivial(1)) - math.pi ** 2 / 6) < 1e-12


def test_residue_constants():
    alpha, beta, gamma = residue_constants()
    assert abs(alpha.plus - math.pi ** 2 / 36) < 1e-15
    assert alpha.minus == beta.plus == beta.minus
    assert abs(gamma.minus / gamma.plus - math.sqrt(3)) < 1e-12


def test_theta_residues_need_squarefree_modulus():
    with pytest.raises(DomainError):
        theta_residues(12)


# =============================================================================
# Densities
# =============================================================================

def test_density_needs_prime_power_level():
    with pytest.raises(DomainError):
        b_density(Form(1, 0, 0, 0, 6))


def test_unknown_density_method():
    with pytest.raises(DomainError):
        b_density(Form(1, 0, 0, 0, 5), method="z")


def test_group_formula_needs_unramified_character():
    chi = ramified_cubic_characters(7)[0]
    with pytest.raises(DomainError):
        c_density(Form(1, 0, 0, 0, 7), chi, method="cg")


def test_unramified_level_p():
    _assert_passed(verify_unramified_level_p(5))


@pytest.mark.slow
def test_unramified_level_7():
    _assert_passed(verify_unramified_level_p(7, threads=4))


def test_unramified_maximal():
    _assert_passed(verify_unramified_maximal(5))


@pytest.mark.parametrize("p", [2, 5])
def test_unramified_nonmaximal(p):
    _assert_passed(verify_unramified_nonmaximal(p))


def test_unramified_character_is_cubic_and_moves_p():
    chi = unramified_cubic_character(5)
    assert chi.order == 3 and chi.is_primitive()
    assert chi.modulus % 5
    assert not chi.value(5).is_one()


# =============================================================================
# Ramified characters
# =============================================================================

def test_ramified_characters_exist_only_for_suitable_primes():
    assert len(ramified_cubic_characters(7)) == 2
    assert all(chi.modulus == 9 for chi in ramified_cubic_characters(3))
    with pytest.raises(UnsupportedRingError):
        ramified_cubic_characters(5)
    with pytest.raises(UnsupportedRingError):
        tilde_c_representatives(5)


def test_ramified_level_p(rng):
    _assert_passed(verify_ramified_level_p(7, rng, samples=2))


@pytest.mark.parametrize("p", [3, 7])
def test_ramified_nonmaximal(p):
    _assert_passed(verify_ramified_nonmaximal(p))


@pytest.mark.parametrize("p", [3, 7])
def test_ramified_maximal(p):
    _assert_passed(verify_ramified_maximal(p))


def test_tilde_c_rejects_nonmaximal_and_singular():
    chi = ramified_cubic_characters(7)[0]
    with pytest.raises(DomainError):
        tilde_c(Form(7, 0, 0, 7), chi, 7)
    with pytest.raises(DomainError):
        tilde_c(Form(1, 0, 0, 0), chi, 7)
    with pytest.raises(DomainError):
        tilde_c(Form(0, 1, 0, 7, 25), chi, 7)


# =============================================================================
# Distributions
# =============================================================================

def test_corollaries_at_5():
    _assert_passed(verify_corollaries(5))


def test_density_properties(rng):
    _assert_passed(verify_density_properties(5, rng, samples=3))


def test_suite_dispatch(rng):
    reports = verify_residue_tables("ur1", primes=[5], rng=rng)
    assert [r.suite for r in reports] == ["ur1_p5"]
    with pytest.raises(DomainError):
        verify_residue_tables("nope")


@pytest.mark.slow
def test_l_residues():
    _assert_passed(verify_l_residues(threads=4))


# =============================================================================
# Gamma matrices and bias constants
# =============================================================================

def test_gamma_identity(rng):
    _assert_passed(verify_gamma(rng, samples=3))
    assert identity_check(0.3 + 1.5j)


def test_bias_pole_characters():
    assert has_bias_pole(DirichletCharacter.trivial(1))
    assert not has_bias_pole(characters_of_order(5, 2)[0])


def test_bias_constant_domain():
    with pytest.raises(UnsupportedRingError):
        bias_constant_k1(4, 1)
    with pytest.raises(DomainError):
        bias_constant_k1(9, 3)


def test_k1_at_5_is_constant():
    # no sextic characters mod 5, only the trivial one contributes
    expected = zeta_one_third() * (1 - 5 ** (-4.0 / 3.0))
    for a in range(1, 5):
        assert abs(bias_constant_k1(5, a) - expected) < 1e-9


def test_k1_at_7_is_real_and_depends_on_residue():
    values = [bias_constant_k1(7, a) for a in range(1, 7)]
    assert all(abs(v.imag) < 1e-9 for v in values)
    assert max(v.real for v in values) - min(v.real for v in values) > 1e-6


def test_gamma_matrix_at_two_is_finite():
    m, d_plus, d_minus = gamma_matrices(2)
    assert m.shape == (2, 2)
    assert np.isfinite(m).all()
    assert np.isfinite([d_plus, d_minus]).all()


# =============================================================================
# Pointwise integrands
# =============================================================================

@pytest.mark.parametrize("coeffs, expected", [
    ((0, 1, 3, 4), 30),   # x2 a unit: (p + 1) p^(e - 1)
    ((0, 5, 3, 4), 6),    # p || x2
    ((0, 0, 3, 4), 1),    # x2 = 0
    ((1, 1, 3, 4), 0),    # x1 != 0
])
def test_b_prime_mod_25(coeffs, expected):
    assert b_prime(Form.of(coeffs, 25)) == expected


@pytest.mark.parametrize("e", [1, 2])
def test_i_value_at_zero(e):
    chi = unramified_cubic_character(5)
    t = tilde_at_p(chi, 5)
    v = i_value(0, chi, 5, e)
    assert abs(v.value - 5 ** (2.0 * e / 3.0) * t ** e) < 1e-9
    assert v.exact == ((-2 * e, Fraction(1)),)


# =============================================================================
# Residues
# =============================================================================

def test_residues_of_the_constant_function():
    res = residue_of_zeta(FiniteFunction.indicator(1, np.zeros(1, dtype=np.int64)))
    alpha, beta, gamma = residue_constants()
    for got, want in zip(res.at_one, alpha + beta):
        assert abs(got - want) < 1e-12
    for got, want in zip(res.at_five_sixths, gamma * zeta_one_third()):
        assert abs(got - want) < 1e-9


def test_residues_of_divisible_indicator():
    res = residue_of_zeta(divisible_indicator(5))
    mass = Fraction(1, 5) + Fraction(1, 25) - Fraction(1, 125)
    assert res.distributions.a == mass
    assert res.distributions.b == mass
    c = 1 / 5 + 5 ** (-4.0 / 3.0) - 5 ** (-7.0 / 3.0)
    assert abs(res.distributions.c - c) < 1e-12
    alpha, beta, gamma = residue_constants()
    for got, want in zip(res.at_one, (alpha + beta) * mass):
        assert abs(got - want) < 1e-12
    for got, want in zip(res.at_five_sixths, gamma * (c * zeta_one_third())):
        assert abs(got - want) < 1e-9


def test_quartic_character_has_no_residues():
    chi = characters_of_order(5, 4)[0]
    res = residue_of_zeta(divisible_indicator(5), chi)
    assert res.at_one == ResidueVector.zero()
    assert res.at_five_sixths == ResidueVector.zero()


@pytest.mark.parametrize("n", [5, 7])
def test_theta_residues_from_local_densities(n):
    expected, got = theta_residues(n), assembled_theta_residues(n)
    for e_vec, g_vec in zip(expected, got):
        for want, have in zip(e_vec, g_vec):
            assert abs(want - have) < 1e-9


def test_standard_l_residue_of_trivial_character():
    _, _, gamma = residue_constants()
    res = standard_l_residue(DirichletCharacter.trivial(1))
    for got, want in zip(res, gamma * zeta_one_third()):
        assert abs(got - want) < 1e-9


@pytest.mark.parametrize("order", [2, 3, 6])
def test_standard_l_density_mod_7(order):
    for chi in characters_of_order(7, order, primitive_only=True):
        assert abs(standard_l_density(chi) - assembled_standard_l_density(chi)) < 1e-9
        if order != 6:
            assert standard_l_residue(chi) == ResidueVector.zero()


def test_twisted_residue_closed_form():
    chi = characters_of_order(7, 3, primitive_only=True)[0]
    density = twisted_density(chi)
    assert abs(density - chi(4) * (6 / 7) * 7 ** (-4.0 / 3.0)) < 1e-12
    _, _, gamma = residue_constants()
    l_value = dirichlet_l(1.0 / 3.0, (chi ** 2).inverse())
    for got, want in zip(twisted_residue(chi), gamma * (density * l_value)):
        assert abs(got - want) < 1e-12


# =============================================================================
# Progressions
# =============================================================================

def test_progression_main_term():
    main, secondary = progression_prediction(5, 2, 1000, 1)
    assert abs(main - math.pi ** 2 * (1 - 1 / 25) / 45 * 1000) < 1e-9
    # K_1(5, a) < 0 pulls the count below the main term
    assert secondary < 0


def test_compare_progressions_is_informational():
    table = ClassNumberTable(1, 10, {1: Fraction(1, 3), 4: Fraction(1), 7: Fraction(2, 3), 8: Fraction(5)})
    report = compare_progressions(table, 5, [10])
    assert report.passed
    assert len(report.cells) == 4
    assert all(c.note.startswith("main ") for c in report.cells)
