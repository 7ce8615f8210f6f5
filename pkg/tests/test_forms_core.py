#!/usr/bin/env python3
"""
Test the twisted action, the invariants and the Delone-Faddeev rings
"""

from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from orbital.errors import DomainError, InvalidGroupElementError, UnsupportedRingError
from orbital.forms_core import (
    act,
    act_dual,
    act_many,
    bilinear_V,
    cubic_ring_disc,
    decode_forms,
    delone_faddeev,
    disc,
    disc_many,
    dual_disc,
    encode_forms,
    hessian,
    iota,
    iota_inverse,
    is_associative,
    is_nonmaximal_at,
    pairing,
    ring_trace,
)
from orbital.linear_groups import alpha_slice
from orbital.types import DualForm, Form, GroupElement

residues_7 = st.integers(min_value=0, max_value=6)
small_ints = st.integers(min_value=-6, max_value=6)
coeffs_7 = st.tuples(residues_7, residues_7, residues_7, residues_7)
integral_coeffs = st.tuples(small_ints, small_ints, small_ints, small_ints)


def _unit_matrix(entries, n):
    a, b, c, d = entries
    assume(gcd(a * d - b * c, n) == 1)
    return GroupElement(a, b, c, d, n)


# =============================================================================
# Action
# =============================================================================

@settings(max_examples=100, deadline=None)
@given(g=coeffs_7, h=coeffs_7, x=coeffs_7)
def test_group_law_mod_7(g, h, x):
    g, h = _unit_matrix(g, 7), _unit_matrix(h, 7)
    form = Form.of(x, 7)
    assert act(g @ h, form) == act(g, act(h, form))


@settings(max_examples=100, deadline=None)
@given(g=coeffs_7, h=coeffs_7, y=coeffs_7)
def test_dual_group_law_mod_7(g, h, y):
    g, h = _unit_matrix(g, 7), _unit_matrix(h, 7)
    dual = DualForm.of(y, 7)
    assert act_dual(g @ h, dual) == act_dual(g, act_dual(h, dual))


@settings(max_examples=100, deadline=None)
@given(g=coeffs_7, x=coeffs_7, y=coeffs_7)
def test_pairing_adjunction(g, x, y):
    g = _unit_matrix(g, 7)
    form, dual = Form.of(x, 7), DualForm.of(y, 7)
    assert pairing(form, act_dual(g, dual)) == pairing(act(g.adjugate(), form), dual)


@settings(max_examples=100, deadline=None)
@given(g=coeffs_7, x=coeffs_7)
def test_discriminant_is_relative_invariant(g, x):
    g = _unit_matrix(g, 7)
    form = Form.of(x, 7)
    assert disc(act(g, form)) == g.det ** 2 * disc(form) % 7


@settings(max_examples=60, deadline=None)
@given(x=integral_coeffs, t=st.integers(min_value=1, max_value=6))
def test_scalars_act_by_multiplication(x, t):
    form = Form.of(x, 7)
    assert act(GroupElement.scalar(t, 7), form) == form.scaled(t)


def test_identity_acts_trivially():
    form = Form(3, -1, 4, 1)
    assert act(GroupElement.identity(), form) == form


def test_integral_unimodular_action_preserves_discriminant():
    form = Form(1, 2, -3, 5)
    g = GroupElement(2, 1, 1, 1)
    assert disc(act(g, form)) == disc(form)


def test_nonunimodular_integral_action_must_divide():
    with pytest.raises(InvalidGroupElementError):
        act(GroupElement(2, 0, 0, 1), Form(1, 1, 1, 1))


def test_nonunit_determinant_rejected():
    with pytest.raises(InvalidGroupElementError):
        GroupElement(2, 0, 0, 3, 6)


def test_act_many_matches_act(rng):
    n = 9
    chunk = alpha_slice(n, 4)
    x = (2, 7, 1, 5)
    images = act_many(chunk.alpha, chunk.beta, chunk.gamma, chunk.delta, chunk.det_inv, x, n)
    for i in rng.integers(0, len(chunk), size=25):
        assert tuple(images[i]) == act(chunk.element(int(i)), Form.of(x, n)).coeffs


# =============================================================================
# Invariants
# =============================================================================

def test_discriminant_of_split_form():
    # u(u - v)(u + v): roots 0, 1, -1
    assert disc(Form(1, 0, -1, 0)) == 4


def test_disc_many_matches_disc(rng):
    forms = rng.integers(0, 25, size=(200, 4))
    got = disc_many(forms, 25)
    for row, d in zip(forms.tolist(), got.tolist()):
        assert d == disc(Form.of(row, 25))


def test_hessian_discriminant():
    for coeffs in [(1, 0, -1, 0), (1, 0, 0, 2), (2, -3, 1, 7)]:
        x = Form.of(coeffs)
        a, b, c = hessian(x)
        assert b * b - 4 * a * c == -3 * disc(x)


@settings(max_examples=80, deadline=None)
@given(y=integral_coeffs)
def test_iota_scales_discriminant(y):
    dual = DualForm.of(y)
    assert disc(iota(dual)) == 27 * dual_disc(dual)
    assert iota_inverse(iota(dual)) == dual


def test_iota_inverse_mod_prime_to_3():
    y = DualForm(1, 4, 6, 2, 7)
    assert iota_inverse(iota(y)) == y
    with pytest.raises(UnsupportedRingError):
        iota_inverse(Form(1, 1, 1, 1, 9))


def test_iota_inverse_outside_image():
    with pytest.raises(DomainError):
        iota_inverse(Form(1, 1, 0, 0))


@settings(max_examples=80, deadline=None)
@given(g=st.tuples(*[st.integers(0, 24)] * 4), x=st.tuples(*[st.integers(0, 24)] * 4),
       xp=st.tuples(*[st.integers(0, 24)] * 4))
def test_alternating_form_twists_by_det(g, x, xp):
    g = _unit_matrix(g, 25)
    a, b = Form.of(x, 25), Form.of(xp, 25)
    assert bilinear_V(act(g, a), act(g, b)) == g.det * bilinear_V(a, b) % 25
    assert bilinear_V(a, a) == 0


def test_alternating_form_over_z_has_thirds():
    assert bilinear_V(Form(0, 1, 0, 0), Form(0, 0, 1, 0)) == Fraction(1, 3)
    with pytest.raises(UnsupportedRingError):
        bilinear_V(Form(0, 1, 0, 0, 6), Form(0, 0, 1, 0, 6))


def test_pairing_rejects_mixed_rings():
    with pytest.raises(DomainError):
        pairing(Form(1, 0, 0, 0, 5), DualForm(1, 0, 0, 0, 7))


# =============================================================================
# Cubic rings
# =============================================================================

@pytest.mark.parametrize("coeffs", [(1, 0, -1, 0), (1, 0, 0, 2), (2, -3, 1, 7), (3, 1, -4, 2)])
def test_ring_discriminant_matches_form(coeffs):
    x = Form.of(coeffs)
    ring = delone_faddeev(x)
    assert is_associative(ring)
    assert cubic_ring_disc(ring) == disc(x)
    assert ring_trace(ring, (1, 0, 0)) == 3


def test_maximality_oracle():
    assert is_nonmaximal_at(delone_faddeev(Form(5, 0, 0, 5)), 5)
    # Z[x]/(x^3 - x) has index 2 in Z^3
    assert is_nonmaximal_at(delone_faddeev(Form(1, 0, -1, 0)), 2)
    # Z[2^(1/3)] is the full ring of integers
    assert not is_nonmaximal_at(delone_faddeev(Form(1, 0, 0, 2)), 2)
    assert not is_nonmaximal_at(delone_faddeev(Form(1, 0, 0, 2)), 3)


def test_delone_faddeev_needs_integral_form():
    with pytest.raises(DomainError):
        delone_faddeev(Form(1, 0, 0, 1, 5))


def test_flat_codes_round_trip():
    codes = np.arange(0, 7 ** 4, 37)
    assert np.array_equal(encode_forms(decode_forms(codes, 7), 7), codes)
