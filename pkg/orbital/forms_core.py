"""
Algebra of binary cubic forms

Key functions:
- act / act_dual: twisted GL2 action on V and its dual action on V*
- disc / dual_disc / hessian: relative invariants and the quadratic covariant
- pairing / bilinear_V / iota / iota_inverse: the V x V* pairing and the
  embedding of V* into V
- act_many: vectorized twisted action used by every group scan
- delone_faddeev and the cubic-ring helpers (multiplication, trace form
  discriminant, associativity, automorphisms, p-maximality oracle)

Integral inputs use Python integers throughout, so discriminants never
overflow; modular inputs are reduced into [0, N).
"""

from __future__ import annotations

import itertools
import logging
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from orbital.errors import DomainError, InvalidGroupElementError, UnsupportedRingError
from orbital.types import CubicRing, DualForm, Form, GroupElement

logger = logging.getLogger(__name__)

RingValue = Union[int, Fraction]


# =============================================================================
# Group actions
# =============================================================================

def _aligned(g: GroupElement, modulus: Optional[int]) -> GroupElement:
    if g.modulus == modulus:
        return g
    if g.modulus is None and modulus is not None:
        return g.reduce(modulus)
    raise DomainError(f"group element mod {g.modulus} cannot act on coefficients mod {modulus}")


def action_numerators(alpha: int, beta: int, gamma: int, delta: int) -> List[List[int]]:
    """Rows of det(g) times the 4x4 matrix of the twisted action."""
    a, b, c, d = alpha, beta, gamma, delta
    return [
        [a ** 3, a * a * b, a * b * b, b ** 3],
        [3 * a * a * c, a * a * d + 2 * a * b * c, b * b * c + 2 * a * b * d, 3 * b * b * d],
        [3 * a * c * c, b * c * c + 2 * a * c * d, a * d * d + 2 * b * c * d, 3 * b * d * d],
        [c ** 3, c * c * d, c * d * d, d ** 3],
    ]


def _divide(values: Sequence[int], det: int, modulus: Optional[int], what: str) -> Tuple[int, ...]:
    if modulus is not None:
        inv = pow(det, -1, modulus)
        return tuple((v * inv) % modulus for v in values)
    if any(v % det for v in values):
        raise InvalidGroupElementError(f"{what}: determinant {det} does not divide {tuple(values)}")
    return tuple(v // det for v in values)


def act(g: GroupElement, x: Form) -> Form:
    """Twisted action (g.x)(u, v) = det(g)^-1 x(alpha u + gamma v, beta u + delta v)."""
    g = _aligned(g, x.modulus)
    rows = action_numerators(*g.entries)
    nums = [sum(r * c for r, c in zip(row, x.coeffs)) for row in rows]
    return Form.of(_divide(nums, g.det, x.modulus, "act"), x.modulus)


def act_dual(g: GroupElement, y: DualForm) -> DualForm:
    """Left action on V*, the transpose of the action of (det g) g^-1."""
    g = _aligned(g, y.modulus)
    adj = g.adjugate()
    rows = action_numerators(*adj.entries)
    nums = [sum(rows[i][j] * y.coeffs[i] for i in range(4)) for j in range(4)]
    return DualForm.of(_divide(nums, adj.det, y.modulus, "act_dual"), y.modulus)


def act_many(
    alpha: np.ndarray,
    beta: np.ndarray,
    gamma: np.ndarray,
    delta: np.ndarray,
    det_inv: np.ndarray,
    x: Sequence[int],
    modulus: int,
) -> np.ndarray:
    """Twisted action of a batch of matrices mod N on one form.

    All arrays are int64 of equal length with entries in [0, N); ``det_inv``
    holds the inverse determinants. Returns an (n, 4) array reduced mod N.
    """
    n = modulus
    x1, x2, x3, x4 = (int(c) % n for c in x)
    a, b, c, d = alpha, beta, gamma, delta
    aa, bb, cc, dd = a * a % n, b * b % n, c * c % n, d * d % n
    ab, ac, bc = a * b % n, a * c % n, b * c % n
    out = np.empty((len(a), 4), dtype=np.int64)
    out[:, 0] = (aa * a % n * x1 + aa * b % n * x2 + bb * a % n * x3 + bb * b % n * x4) % n
    out[:, 1] = (
        3 * aa * c % n * x1
        + (aa * d + 2 * ab * c) % n * x2
        + (bb * c + 2 * ab * d) % n * x3
        + 3 * bb * d % n * x4
    ) % n
    out[:, 2] = (
        3 * cc * a % n * x1
        + (cc * b + 2 * ac * d) % n * x2
        + (dd * a + 2 * bc * d) % n * x3
        + 3 * dd * b % n * x4
    ) % n
    out[:, 3] = (cc * c % n * x1 + cc * d % n * x2 + dd * c % n * x3 + dd * d % n * x4) % n
    return out * det_inv[:, None] % n


# =============================================================================
# Invariants and pairings
# =============================================================================

def _disc_value(x1: int, x2: int, x3: int, x4: int) -> int:
    return (
        x2 * x2 * x3 * x3
        + 18 * x1 * x2 * x3 * x4
        - 4 * x1 * x3 ** 3
        - 4 * x2 ** 3 * x4
        - 27 * x1 * x1 * x4 * x4
    )


def disc(x: Form) -> int:
    """Discriminant P(x); P(g.x) = det(g)^2 P(x)."""
    value = _disc_value(*x.coeffs)
    return value if x.modulus is None else value % x.modulus


def disc_many(coeffs: np.ndarray, modulus: Optional[int] = None) -> np.ndarray:
    """P on an (n, 4) int64 array, optionally reduced mod N."""
    x1, x2, x3, x4 = (coeffs[:, i].astype(np.int64) for i in range(4))
    if modulus is None:
        return _disc_value(x1, x2, x3, x4)
    n = modulus
    s = x2 * x2 % n * (x3 * x3 % n) % n
    s = (s + 18 * (x1 * x2 % n) % n * (x3 * x4 % n)) % n
    s = (s - 4 * x1 * (x3 * x3 % n) % n * x3) % n
    s = (s - 4 * x4 * (x2 * x2 % n) % n * x2) % n
    s = (s - 27 * (x1 * x1 % n) % n * (x4 * x4 % n)) % n
    return s % n


def dual_disc(y: DualForm) -> int:
    """P*(y) = 3y2^2y3^2 + 6y1y2y3y4 - 4y1y3^3 - 4y2^3y4 - y1^2y4^2."""
    y1, y2, y3, y4 = y.coeffs
    value = (
        3 * y2 * y2 * y3 * y3
        + 6 * y1 * y2 * y3 * y4
        - 4 * y1 * y3 ** 3
        - 4 * y2 ** 3 * y4
        - y1 * y1 * y4 * y4
    )
    return value if y.modulus is None else value % y.modulus


def hessian(x: Form) -> Tuple[int, int, int]:
    """Quadratic covariant (x2^2 - 3x1x3, x2x3 - 9x1x4, x3^2 - 3x2x4)."""
    x1, x2, x3, x4 = x.coeffs
    return (x2 * x2 - 3 * x1 * x3, x2 * x3 - 9 * x1 * x4, x3 * x3 - 3 * x2 * x4)


def pairing(x: Form, y: DualForm) -> int:
    """Canonical pairing [x, y] = x1y1 + x2y2 + x3y3 + x4y4."""
    if x.modulus != y.modulus:
        raise DomainError(f"pairing of mod {x.modulus} with mod {y.modulus}")
    value = sum(a * b for a, b in zip(x.coeffs, y.coeffs))
    return value if x.modulus is None else value % x.modulus


def bilinear_V(x: Form, xp: Form) -> RingValue:
    """Alternating form x4x1' - x3x2'/3 + x2x3'/3 - x1x4' on V.

    Over Z the result is a Fraction with denominator dividing 3; mod N it
    requires gcd(N, 3) = 1.
    """
    if x.modulus != xp.modulus:
        raise DomainError("bilinear_V on forms over different rings")
    x1, x2, x3, x4 = x.coeffs
    y1, y2, y3, y4 = xp.coeffs
    if x.modulus is None:
        return Fraction(x4 * y1 - x1 * y4) + Fraction(x2 * y3 - x3 * y2, 3)
    if x.modulus % 3 == 0:
        raise UnsupportedRingError(f"3 is not invertible mod {x.modulus}")
    third = pow(3, -1, x.modulus)
    return (x4 * y1 - x1 * y4 + third * (x2 * y3 - x3 * y2)) % x.modulus


def iota(y: DualForm) -> Form:
    """Embedding of V* into V: (y1, y2, y3, y4) -> (y4, -3y3, 3y2, -y1)."""
    y1, y2, y3, y4 = y.coeffs
    return Form.of((y4, -3 * y3, 3 * y2, -y1), y.modulus)


def in_iota_image(x: Form) -> bool:
    """Integral forms in iota(V*) are exactly those with 3 | x2 and 3 | x3."""
    return x.x2 % 3 == 0 and x.x3 % 3 == 0


def iota_inverse(x: Form) -> DualForm:
    """Inverse of iota on its image (over Z) or on all of V (mod N prime to 3)."""
    x1, x2, x3, x4 = x.coeffs
    if x.modulus is None:
        if not in_iota_image(x):
            raise DomainError(f"{x} is not in the image of iota")
        return DualForm.of((-x4, x3 // 3, -x2 // 3, x1))
    if x.modulus % 3 == 0:
        raise UnsupportedRingError(f"iota is not invertible mod {x.modulus}")
    third = pow(3, -1, x.modulus)
    return DualForm.of((-x4, x3 * third, -x2 * third, x1), x.modulus)


# =============================================================================
# Delone-Faddeev cubic rings
# =============================================================================

Element = Tuple[int, int, int]


def delone_faddeev(x: Form) -> CubicRing:
    """Cubic ring of an integral form.

    omega^2 = -x1x3 - x2 omega + x1 theta, theta^2 = -x2x4 - x4 omega + x3 theta,
    omega theta = -x1x4.
    """
    if x.modulus is not None:
        raise DomainError("delone_faddeev needs an integral form")
    x1, x2, x3, x4 = x.coeffs
    return CubicRing(
        omega_sq=(-x1 * x3, -x2, x1),
        theta_sq=(-x2 * x4, -x4, x3),
        omega_theta=-x1 * x4,
        source=x,
    )


def ring_multiply(ring: CubicRing, r: Sequence[int], s: Sequence[int]) -> Element:
    """Product of r = r0 + r1 omega + r2 theta and s in the ring."""
    r0, r1, r2 = r
    s0, s1, s2 = s
    w = r1 * s1
    t = r2 * s2
    m = r1 * s2 + r2 * s1
    c0, c1, c2 = ring.omega_sq
    d0, d1, d2 = ring.theta_sq
    return (
        r0 * s0 + w * c0 + t * d0 + m * ring.omega_theta,
        r0 * s1 + r1 * s0 + w * c1 + t * d1,
        r0 * s2 + r2 * s0 + w * c2 + t * d2,
    )


_BASIS: Tuple[Element, Element, Element] = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def multiplication_matrix(ring: CubicRing, r: Sequence[int]) -> sympy.Matrix:
    """Matrix of s -> r*s in the basis (1, omega, theta), columns are images."""
    cols = [ring_multiply(ring, r, e) for e in _BASIS]
    return sympy.Matrix(3, 3, lambda i, j: cols[j][i])


def ring_trace(ring: CubicRing, r: Sequence[int]) -> int:
    return int(multiplication_matrix(ring, r).trace())


def cubic_ring_disc(ring: CubicRing) -> int:
    """Determinant of the trace form Tr(e_i e_j)."""
    gram = sympy.Matrix(3, 3, lambda i, j: ring_trace(ring, ring_multiply(ring, _BASIS[i], _BASIS[j])))
    return int(gram.det())


def characteristic_polynomial(ring: CubicRing, r: Sequence[int]) -> List[int]:
    """Coefficients (leading first) of the characteristic polynomial of r."""
    lam = sympy.Symbol("lam")
    poly = multiplication_matrix(ring, r).charpoly(lam)
    return [int(c) for c in poly.all_coeffs()]


def is_associative(ring: CubicRing) -> bool:
    """(e_i e_j) e_k == e_i (e_j e_k) on all basis triples."""
    for ei, ej, ek in itertools.product(_BASIS, repeat=3):
        left = ring_multiply(ring, ring_multiply(ring, ei, ej), ek)
        right = ring_multiply(ring, ei, ring_multiply(ring, ej, ek))
        if left != right:
            return False
    return True


def _apply(phi: Sequence[Element], r: Sequence[int]) -> Element:
    # phi = images of (1, omega, theta)
    return tuple(sum(r[k] * phi[k][i] for k in range(3)) for i in range(3))


def _is_ring_map(ring: CubicRing, phi: Sequence[Element]) -> bool:
    for ei, ej in itertools.combinations_with_replacement(_BASIS, 2):
        if _apply(phi, ring_multiply(ring, ei, ej)) != ring_multiply(ring, _apply(phi, ei), _apply(phi, ej)):
            return False
    return True


def automorphism_from_stabilizer(ring: CubicRing, g: GroupElement) -> Optional[Tuple[Element, Element, Element]]:
    """Ring automorphism induced by an integral stabilizer element of the source form.

    The linear part on R/Z is one of +-g, +-g^T, +-g^-1, +-g^-T depending on
    conventions; the constant terms are fixed by trace preservation. Returns the
    images of (1, omega, theta), or None when no candidate is multiplicative.
    """
    if g.modulus is not None or not g.is_unimodular:
        raise DomainError("automorphisms come from unimodular integral matrices")
    tr_w = ring_trace(ring, (0, 1, 0))
    tr_t = ring_trace(ring, (0, 0, 1))
    inv = g.inverse()
    for base in (g, g.transpose(), inv, inv.transpose()):
        for sign in (1, -1):
            a, b, c, d = (sign * e for e in base.entries)
            images = []
            for s, t, tr in ((a, b, tr_w), (c, d, tr_t)):
                num = tr - s * tr_w - t * tr_t
                if num % 3:
                    break
                images.append((num // 3, s, t))
            if len(images) < 2:
                continue
            phi = ((1, 0, 0), images[0], images[1])
            if _is_ring_map(ring, phi):
                return phi
    return None


def automorphism_order(ring: CubicRing, phi: Sequence[Element]) -> int:
    """Order of a ring automorphism given by basis images (capped at 6)."""
    current = tuple(_BASIS)
    for k in range(1, 7):
        current = tuple(_apply(phi, e) for e in current)
        if current == _BASIS:
            return k
    return 0


def _power(ring: CubicRing, r: Element, k: int, p: int) -> Element:
    result: Element = (1, 0, 0)
    base = tuple(c % p for c in r)
    while k:
        if k & 1:
            result = tuple(c % p for c in ring_multiply(ring, result, base))
        base = tuple(c % p for c in ring_multiply(ring, base, base))
        k >>= 1
    return result


def is_nonmaximal_at(ring: CubicRing, p: int) -> bool:
    """True when the ring is not maximal at the prime p.

    Uses the multiplier ring of the p-radical I: R is p-maximal iff no
    r in R \\ pR satisfies r*I inside p*I. Only meaningful for rings of
    nonzero discriminant.
    """
    d = cubic_ring_disc(ring)
    if d == 0:
        raise DomainError("maximality is undefined for degenerate rings")
    if d % (p * p):
        return False
    k = 1
    while p ** k < 3:
        k += 1
    radical = [
        r for r in itertools.product(range(p), repeat=3)
        if _power(ring, r, p ** k, p) == (0, 0, 0)
    ]
    radical_set = set(radical)
    basis = _span_basis(radical, p)
    for r in radical:
        if r == (0, 0, 0):
            continue
        ok = True
        for j in basis:
            prod = ring_multiply(ring, r, j)
            if any(c % p for c in prod):
                ok = False
                break
            if tuple((c // p) % p for c in prod) not in radical_set:
                ok = False
                break
        if ok:
            return True
    return False


def _span_basis(vectors: List[Element], p: int) -> List[Element]:
    basis: List[Element] = []
    span = {(0, 0, 0)}
    for v in vectors:
        if v in span:
            continue
        basis.append(v)
        span = {tuple((s[i] + t * v[i]) % p for i in range(3)) for s in span for t in range(p)}
    return basis


def content(coeffs: Sequence[int]) -> int:
    g = 0
    for c in coeffs:
        g = gcd(g, int(c))
    return g


def act_on_array(g: GroupElement, coeffs: np.ndarray, modulus: int) -> np.ndarray:
    """One matrix mod N acting on an (n, 4) array of forms mod N."""
    g = _aligned(g, modulus)
    numer = np.array(action_numerators(*g.entries), dtype=np.int64) % modulus
    inv = pow(g.det, -1, modulus)
    return (coeffs.astype(np.int64) @ numer.T) % modulus * inv % modulus


# =============================================================================
# Flat coding of V_N
# =============================================================================
# x <-> x1 + N x2 + N^2 x3 + N^3 x4; the same coding is used for V*_N.

def encode_forms(coeffs: np.ndarray, modulus: int) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.int64) % modulus
    n = modulus
    return ((c[:, 3] * n + c[:, 2]) * n + c[:, 1]) * n + c[:, 0]


def decode_forms(codes: np.ndarray, modulus: int) -> np.ndarray:
    out = np.empty((len(codes), 4), dtype=np.int64)
    rest = np.asarray(codes, dtype=np.int64)
    for i in range(4):
        out[:, i] = rest % modulus
        rest = rest // modulus
    return out


def forms_slice(modulus: int, x1: int) -> np.ndarray:
    """All forms mod N with first coefficient x1, as an (N^3, 4) array."""
    n = modulus
    rest = np.arange(n ** 3, dtype=np.int64)
    out = np.empty((n ** 3, 4), dtype=np.int64)
    out[:, 0] = x1
    out[:, 1] = rest % n
    out[:, 2] = rest // n % n
    out[:, 3] = rest // (n * n)
    return out
