#!/usr/bin/env python3
"""
Test characters of (Z/m)^x, exact cyclotomic sums and CRT on forms
"""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbital.cyclotomic import CyclotomicSum, sum_all
from orbital.errors import CRTError, DomainError
from orbital.residue_rings import (
    ONE,
    DirichletCharacter,
    PadicUnitClass,
    RootOfUnity,
    all_characters,
    characters_of_order,
    crt_combine,
    crt_split,
    euler_phi,
    gauss_sum,
    jacobi_sum,
    jacobi_sum_direct,
    lift_chi_p,
    mobius,
    p_valuation,
)
from orbital.types import Form


def test_arithmetic_functions():
    assert mobius(1) == 1
    assert mobius(30) == -1
    assert mobius(12) == 0
    assert euler_phi(36) == 12
    assert p_valuation(72, 2) == 3
    with pytest.raises(DomainError):
        p_valuation(0, 5)


# =============================================================================
# Roots of unity and cyclotomic sums
# =============================================================================

def test_root_of_unity_arithmetic():
    z = RootOfUnity(6, 1)
    assert z ** 6 == ONE
    assert (z * z.inverse()).is_one()
    assert RootOfUnity(4, 2) == RootOfUnity(2, 1)
    assert abs(complex(RootOfUnity(4, 1)) - 1j) < 1e-12


def test_cyclotomic_exact_identities():
    # 1 + z + z^2 = 0 for a primitive cube root z
    cube = sum_all(CyclotomicSum.root(k, 3) for k in range(3))
    assert cube.equals(0)
    assert (CyclotomicSum.root(1, 4) ** 2).equals(-1)
    half = CyclotomicSum.integer(Fraction(1, 2), 6) + CyclotomicSum.integer(Fraction(1, 3))
    assert half.is_rational()
    assert half.rational_value() == Fraction(5, 6)


def test_cyclotomic_conjugate_and_value():
    z = CyclotomicSum.root(1, 5) * 3 + 2
    assert abs((z * z.conjugate()).value - abs(z.value) ** 2) < 1e-9
    assert (z * z.conjugate()).conjugate().equals(z * z.conjugate())


def test_cyclotomic_dict_round_trip():
    z = CyclotomicSum(12, tuple(range(12)), 5)
    assert CyclotomicSum.from_dict(z.to_dict()).equals(z)


def test_cyclotomic_rejects_bad_shapes():
    with pytest.raises(DomainError):
        CyclotomicSum(3, (1, 2))
    with pytest.raises(DomainError):
        CyclotomicSum.root(1, 4).rational_value()


# =============================================================================
# Dirichlet characters
# =============================================================================

@pytest.mark.parametrize("m", [1, 5, 8, 9, 12, 15, 16])
def test_character_count(m):
    assert len(all_characters(m)) == euler_phi(m)


@pytest.mark.parametrize("m", [5, 8, 9, 12, 15])
def test_orthogonality(m):
    for chi in all_characters(m):
        total = sum(chi(t) for t in range(m))
        expected = euler_phi(m) if chi.is_trivial() else 0
        assert abs(total - expected) < 1e-9


@settings(max_examples=100, deadline=None)
@given(s=st.integers(min_value=1, max_value=62), t=st.integers(min_value=1, max_value=62),
       index=st.integers(min_value=0, max_value=35))
def test_characters_are_multiplicative(s, t, index):
    chi = all_characters(63)[index]
    if chi.exponent(s) is None or chi.exponent(t) is None:
        assert chi(s * t) == 0
        return
    diff = chi.exponent(s * t) - chi.exponent(s) - chi.exponent(t)
    assert diff.denominator == 1


def test_conductors_mod_9():
    cubic = characters_of_order(9, 3)
    quadratic = characters_of_order(9, 2)
    assert len(cubic) == 2 and all(chi.conductor == 9 for chi in cubic)
    assert len(quadratic) == 1 and quadratic[0].conductor == 3


def test_primitive_and_induce_agree_on_units():
    for chi in all_characters(20):
        prim = chi.primitive()
        assert prim.is_primitive()
        assert 20 % prim.modulus == 0
        back = prim.induce(20)
        for t in range(20):
            assert back.exponent(t) == chi.exponent(t)


def test_components_multiply_back():
    for chi in all_characters(21):
        for t in range(21):
            if chi.exponent(t) is None:
                continue
            product = chi.component(3)(t) * chi.component(7)(t)
            assert abs(product - chi(t)) < 1e-9


def test_character_group_operations():
    chi = characters_of_order(7, 6)[0]
    assert (chi ** 6).is_trivial()
    assert (chi * chi.inverse()).is_trivial()
    assert (chi ** 2).order == 3
    assert DirichletCharacter.from_dict(chi.to_dict()) == chi


def test_component_exponent_count_checked():
    with pytest.raises(DomainError):
        DirichletCharacter(15, ())


@pytest.mark.parametrize("m", [5, 7, 9, 13, 16])
def test_gauss_sum_absolute_value(m):
    for chi in all_characters(m):
        if chi.is_primitive() and not chi.is_trivial():
            assert abs(abs(gauss_sum(chi).value) ** 2 - m) < 1e-8


def test_gauss_sum_of_quadratic_character_mod_5():
    chi = characters_of_order(5, 2)[0]
    assert abs(gauss_sum(chi).value - 5 ** 0.5) < 1e-9


def test_jacobi_sums_agree(cubic_character_mod_7):
    assert abs(jacobi_sum(cubic_character_mod_7) - jacobi_sum_direct(cubic_character_mod_7)) < 1e-9
    assert abs(abs(jacobi_sum_direct(cubic_character_mod_7)) ** 2 - 7) < 1e-9


# =============================================================================
# p-adic lift
# =============================================================================

def test_lift_of_unit_is_local_value(cubic_character_mod_7):
    for u in range(1, 7):
        value = lift_chi_p(cubic_character_mod_7, 7, PadicUnitClass(7, 0, u))
        assert value == cubic_character_mod_7.value(u)


def test_lift_at_p_uses_prime_to_p_part():
    chi = characters_of_order(13, 3)[0] * characters_of_order(7, 3)[0]
    lifted = lift_chi_p(chi, 7, PadicUnitClass(7, 1, 1))
    expected = chi.prime_to(7).value(7).inverse()
    assert lifted == expected


def test_lift_needs_enough_precision():
    chi = characters_of_order(9, 3)[0]
    with pytest.raises(DomainError):
        lift_chi_p(chi, 3, PadicUnitClass(3, 0, 2, precision=1))


def test_unit_class_from_integer():
    t = PadicUnitClass.from_integer(-2 * 49, 7, precision=2)
    assert t.valuation == 2
    assert t.unit == 47


# =============================================================================
# CRT
# =============================================================================

def test_crt_round_trip():
    a = Form(4, 11, 0, 14, 15)
    parts = crt_split(a, [3, 5])
    assert [p.modulus for p in parts] == [3, 5]
    assert crt_combine(parts) == a


def test_crt_rejects_common_factors():
    with pytest.raises(CRTError):
        crt_split(Form(1, 2, 3, 4, 36), [6, 6])
    with pytest.raises(CRTError):
        crt_combine([Form(1, 0, 0, 0, 4), Form(1, 0, 0, 0, 6)])
