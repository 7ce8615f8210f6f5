"""
Local densities and residues of orbital zeta functions

Key functions:
- b_prime / i_value: the pointwise local integrands at level p^e
- b_density / c_density: their averages, by the W'-path (default) or by a
  full G_{p^e} scan; the two paths must agree wherever both apply
- distributions / residue_of_zeta: A_N(f), B_N(f), C_N(f, chi) and the
  residues of xi(s, f) at s = 1 and s = 5/6
- tilde_c: the normalized density of a maximal form at a ramified prime
- gamma_matrices / identity_check: the gamma-factor matrices of the
  functional equation
- bias_constant_k1 / standard_l_residue / twisted_residue /
  progression_prediction: constants for L-functions of cubic rings and
  their progression counts
- verify_* drivers producing VerificationReports

Values involving p^(1/3) are complex doubles. Where a density is a Laurent
polynomial in x = chi~_p(p) p^(-1/3), the exact polynomial travels with the
value as a LocalDensityValue.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
import sympy

from orbital import config
from orbital.errors import DomainError, UnsupportedRingError
from orbital.forms_core import act, act_many, decode_forms, delone_faddeev, disc, disc_many, is_nonmaximal_at
from orbital.gauss_fourier import FiniteFunction, divisible_indicator
from orbital.linear_groups import group_order, inverse_table, random_element, random_form, scan_group
from orbital.orbit_atlas import (
    NONMAXIMAL,
    NONMAXIMAL_OR_TOTALLY_RAMIFIED,
    NONSINGULAR,
    TypeSymbol,
    level_p_orbits,
    orbit_decomposition,
    orbit_split,
    representative_mod_p,
    representative_mod_p2,
    split_representatives,
    type_mod_p2,
)
from orbital.residue_rings import (
    DirichletCharacter,
    PadicUnitClass,
    all_characters,
    characters_of_order,
    euler_phi,
    gauss_sum,
    lift_chi_p,
    mobius,
    p_valuation,
)
from orbital.shintani_counts import ClassNumberTable, progression_partial_sums
from orbital.types import Form
from utils.report import VerificationReport

logger = logging.getLogger(__name__)

Scalar = Union[Fraction, complex]
XPolynomial = Tuple[Tuple[int, Fraction], ...]

SQRT3 = math.sqrt(3.0)


# =============================================================================
# Value types
# =============================================================================

def _as_complex(value: Union[int, Fraction, complex, float]) -> complex:
    if isinstance(value, Fraction):
        return complex(float(value))
    return complex(value)


def evaluate_x_polynomial(terms: XPolynomial, x: complex) -> complex:
    return sum((complex(float(coef)) * x ** power for power, coef in terms), 0j)


def x_polynomial(coefficients: Dict[int, Union[int, Fraction]]) -> XPolynomial:
    """Normalize {power: coefficient} into a sorted tuple without zero terms."""
    return tuple((k, Fraction(v)) for k, v in sorted(coefficients.items()) if v)


@dataclass(frozen=True)
class LocalDensityValue:
    """A local density as a complex double, optionally with its exact x-polynomial.

    Attributes:
        value: The numeric value
        exact: ((power, coefficient), ...) with value = sum coefficient * x^power
        x: The point x = chi~_p(p) p^(-1/3) the exact form is evaluated at
    """
    value: complex
    exact: Optional[XPolynomial] = None
    x: Optional[complex] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", complex(self.value))
        if self.exact is not None:
            if self.x is None:
                raise DomainError("an exact x-polynomial needs the point x")
            got = evaluate_x_polynomial(self.exact, self.x)
            if abs(got - self.value) > config.EXACT_FORM_TOLERANCE * max(1.0, abs(self.value)):
                raise DomainError(f"exact form evaluates to {got}, value is {self.value}")

    @classmethod
    def from_polynomial(cls, coefficients: Dict[int, Union[int, Fraction]], x: complex) -> "LocalDensityValue":
        terms = x_polynomial(coefficients)
        return cls(evaluate_x_polynomial(terms, x), terms, x)

    def __complex__(self) -> complex:
        return self.value

    def scaled(self, factor: Union[int, Fraction, complex]) -> "LocalDensityValue":
        if isinstance(factor, (int, Fraction)) and self.exact is not None:
            terms = tuple((k, c * Fraction(factor)) for k, c in self.exact)
            return LocalDensityValue(self.value * _as_complex(factor), terms, self.x)
        return LocalDensityValue(self.value * _as_complex(factor))

    def to_dict(self) -> Dict:
        out = {"value": [self.value.real, self.value.imag]}
        if self.exact is not None:
            out["exact"] = {str(k): f"{c.numerator}/{c.denominator}" for k, c in self.exact}
        return out


@dataclass(frozen=True)
class ResidueVector:
    """Residue of the (+, -) pair of zeta functions at one pole."""
    plus: complex
    minus: complex

    @classmethod
    def zero(cls) -> "ResidueVector":
        return cls(0j, 0j)

    def __add__(self, other: "ResidueVector") -> "ResidueVector":
        return ResidueVector(self.plus + other.plus, self.minus + other.minus)

    def __mul__(self, factor: Union[int, Fraction, complex, float]) -> "ResidueVector":
        c = _as_complex(factor)
        return ResidueVector(self.plus * c, self.minus * c)

    __rmul__ = __mul__

    def __iter__(self) -> Iterator[complex]:
        return iter((self.plus, self.minus))

    def is_finite(self) -> bool:
        return all(cmath.isfinite(z) for z in self)

    def to_list(self) -> List[List[float]]:
        return [[z.real, z.imag] for z in self]


# =============================================================================
# Special constants
# =============================================================================

@lru_cache(maxsize=None)
def _special_values() -> Tuple[complex, complex]:
    with mpmath.workdps(config.MPMATH_DPS):
        return complex(mpmath.zeta(mpmath.mpf(1) / 3)), complex(mpmath.gamma(mpmath.mpf(2) / 3))


def zeta_one_third() -> complex:
    return _special_values()[0]


def gamma_two_thirds() -> complex:
    return _special_values()[1]


@lru_cache(maxsize=None)
def residue_constants() -> Tuple[ResidueVector, ResidueVector, ResidueVector]:
    """(alpha, beta, gamma) as (+, -) vectors."""
    pi2 = math.pi ** 2
    alpha = ResidueVector(pi2 / 36, pi2 / 12)
    beta = ResidueVector(pi2 / 12, pi2 / 12)
    g = 2 * pi2 / (9 * gamma_two_thirds().real ** 3)
    gamma = ResidueVector(g, g * SQRT3)
    return alpha, beta, gamma


def dirichlet_l(s: Union[float, complex], chi: DirichletCharacter) -> complex:
    """L(s, chi) for the primitive character inducing chi, through Hurwitz zeta values."""
    prim = chi.primitive()
    m = prim.modulus
    with mpmath.workdps(config.MPMATH_DPS):
        s = mpmath.mpmathify(s)
        if m == 1:
            return complex(mpmath.zeta(s))
        total = mpmath.mpc(0)
        for t in range(1, m):
            value = prim.value(t)
            if value is None:
                continue
            total += mpmath.mpmathify(value.to_complex()) * mpmath.zeta(s, mpmath.mpf(t) / m)
        return complex(total * mpmath.power(m, -s))


# =============================================================================
# Character data at p
# =============================================================================

def _prime_power(n: Optional[int]) -> Tuple[int, int]:
    if n is None or n < 2:
        raise DomainError(f"local densities need a prime-power modulus, got {n}")
    factors = sympy.factorint(n)
    if len(factors) != 1:
        raise DomainError(f"{n} is not a prime power")
    ((p, e),) = factors.items()
    return int(p), int(e)


def conductor_exponent(chi: DirichletCharacter, p: int) -> int:
    """c with p^c exactly dividing the conductor of chi."""
    return p_valuation(chi.primitive().component(p).modulus, p)


def tilde_at_p(chi: DirichletCharacter, p: int) -> complex:
    """chi~_p(p) = chi'_p(p)^-1."""
    return lift_chi_p(chi, p, PadicUnitClass(p, 1, 1, max(conductor_exponent(chi, p), 1))).to_complex()


def chi_tilde(chi: DirichletCharacter, p: int, t: int) -> complex:
    """chi~_p(t) for a nonzero integer t."""
    precision = max(conductor_exponent(chi, p), 1)
    return lift_chi_p(chi, p, PadicUnitClass.from_integer(t, p, precision)).to_complex()


def x_value(chi: DirichletCharacter, p: int) -> complex:
    """x = chi~_p(p) p^(-1/3)."""
    return tilde_at_p(chi, p) * p ** (-1.0 / 3.0)


def _unit_values(chi: DirichletCharacter, p: int) -> Tuple[np.ndarray, int]:
    """chi_p on Z/p^c as a complex table (0 off units), and c."""
    local = chi.primitive().component(p)
    c = p_valuation(local.modulus, p)
    if c == 0:
        return np.ones(1, dtype=complex), 0
    table = local.exponent_table()
    values = np.exp(2j * np.pi * table / local.order)
    values[table < 0] = 0
    return values, c


# =============================================================================
# Pointwise integrands
# =============================================================================

@lru_cache(maxsize=None)
def _ord_table(p: int, e: int) -> np.ndarray:
    """ord_p(y) for y in Z/p^e, with ord(0) = e."""
    q = p ** e
    out = np.zeros(q, dtype=np.int64)
    for j in range(1, e + 1):
        out[::p ** j] += 1
    return out


def _b_weight(second: np.ndarray, p: int, e: int) -> np.ndarray:
    """p^e (1 + 1/p) |t|_p for t != 0 and 1 for t = 0, as integers."""
    k = _ord_table(p, e)[second]
    return np.where(second == 0, 1, (p + 1) * p ** np.maximum(e - 1 - k, 0))


def b_prime(a: Form) -> Fraction:
    p, e = _prime_power(a.modulus)
    if a.x1:
        return Fraction(0)
    return Fraction(int(_b_weight(np.array([a.x2]), p, e)[0]))


@lru_cache(maxsize=64)
def _i_table(chi: DirichletCharacter, p: int, e: int) -> np.ndarray:
    """I_{p^e}(y, chi) for every y in Z/p^e."""
    c = conductor_exponent(chi, p)
    if e < c:
        raise DomainError(f"level {p}^{e} is below the conductor exponent {c} of chi at {p}")
    q = p ** e
    t = tilde_at_p(chi, p)
    k = _ord_table(p, e)
    growth = np.power(t, k) * np.power(float(p), 2.0 * k / 3.0)
    if c == 0:
        out = (1 - t * p ** (-1.0 / 3.0)) / (1 - 1.0 / p) * growth
        out[0] = p ** (2.0 * e / 3.0) * t ** e
        return out
    units, _ = _unit_values(chi, p)
    y = np.arange(q)
    unit_part = units[(y // p ** k) % p ** c]
    out = np.where(k <= e - c, unit_part * growth / (1 - 1.0 / p), 0)
    out[0] = 0
    return out.astype(complex)


def i_value(y: int, chi: DirichletCharacter, p: int, e: int) -> LocalDensityValue:
    """I_{p^e}(y, chi); at y = 0 with chi^3 trivial and unramified the value is x^(-2e)."""
    q = p ** e
    y %= q
    value = _i_table(chi, p, e)[y]
    prim = chi.primitive()
    if y == 0 and not conductor_exponent(prim, p) and (prim ** 3).is_trivial():
        return LocalDensityValue(value, x_polynomial({-2 * e: 1}), x_value(prim, p))
    return LocalDensityValue(value)


# =============================================================================
# W'_{p^e} tables
# =============================================================================

@lru_cache(maxsize=16)
def _w_prime_tables(p: int, e: int) -> Tuple[np.ndarray, np.ndarray]:
    """Monomial rows and lambda rows over W'_{p^e} = {(u, v) : u or v a unit}.

    values[j] . a = a(u_j, v_j); slope[j] . a = lambda_j, the second
    coefficient of g.a for any g with first row (u_j, v_j) when a(u_j, v_j) = 0.
    """
    q = p ** e
    u, v = np.meshgrid(np.arange(q, dtype=np.int64), np.arange(q, dtype=np.int64), indexing="ij")
    u, v = u.ravel(), v.ravel()
    keep = (u % p != 0) | (v % p != 0)
    u, v = u[keep], v[keep]
    uu, uv, vv = u * u % q, u * v % q, v * v % q
    values = np.stack([uu * u % q, uu * v % q, uv * v % q, vv * v % q], axis=1)
    inv = inverse_table(q)
    zero = np.zeros_like(u)
    from_u = np.stack([zero, uu, 2 * uv % q, 3 * vv % q], axis=1) * inv[u][:, None] % q
    from_v = (q - np.stack([3 * uu % q, 2 * uv % q, vv, zero], axis=1) * inv[v][:, None] % q) % q
    slope = np.where((u % p != 0)[:, None], from_u, from_v)
    return values, slope


def w_prime_size(p: int, e: int) -> int:
    return p ** (2 * e) - p ** (2 * e - 2)


def _blocks(count: int, width: int) -> Iterator[slice]:
    step = max(1, config.DENSITY_BLOCK_PAIRS // max(width, 1))
    for start in range(0, count, step):
        yield slice(start, start + step)


def b_numerators(points: np.ndarray, p: int, e: int) -> np.ndarray:
    """|W'| * B_{p^e}(a) for each row of ``points``."""
    q = p ** e
    values, slope = _w_prime_tables(p, e)
    points = np.asarray(points, dtype=np.int64).reshape(-1, 4) % q
    out = np.empty(len(points), dtype=np.int64)
    for block in _blocks(len(points), len(values)):
        pts = points[block]
        vanish = pts @ values.T % q == 0
        weight = _b_weight(pts @ slope.T % q, p, e)
        out[block] = np.where(vanish, weight, 0).sum(axis=1)
    return out


def c_values(points: np.ndarray, chi: DirichletCharacter, p: int, e: int) -> np.ndarray:
    """C_{p^e}(a, chi) for each row of ``points`` by the W'-average of I."""
    q = p ** e
    table = _i_table(chi, p, e)
    values, _ = _w_prime_tables(p, e)
    points = np.asarray(points, dtype=np.int64).reshape(-1, 4) % q
    out = np.empty(len(points), dtype=complex)
    for block in _blocks(len(points), len(values)):
        out[block] = table[points[block] @ values.T % q].mean(axis=1)
    return out


# =============================================================================
# Averages over G_{p^e} or W'_{p^e}
# =============================================================================

def _b_group_sum(a: Form, p: int, e: int, threads: int) -> int:
    q = p ** e

    def worker(chunk):
        images = act_many(chunk.alpha, chunk.beta, chunk.gamma, chunk.delta, chunk.det_inv, a.coeffs, q)
        weight = _b_weight(images[:, 1], p, e)
        return int(np.where(images[:, 0] == 0, weight, 0).sum())

    return sum(scan_group(q, worker, threads, description=f"B over G_{q} for {a}"))


def _c_group_sum(a: Form, table: np.ndarray, p: int, e: int, threads: int) -> complex:
    q = p ** e

    def worker(chunk):
        images = act_many(chunk.alpha, chunk.beta, chunk.gamma, chunk.delta, chunk.det_inv, a.coeffs, q)
        return complex(table[images[:, 0]].sum())

    return sum(scan_group(q, worker, threads, description=f"C over G_{q} for {a}"), 0j)


def b_density(a: Form, method: str = "w", threads: int = 1) -> Fraction:
    """B_{p^e}(a): "w" averages over W'_{p^e}, "g" over the whole group."""
    p, e = _prime_power(a.modulus)
    if method == "w":
        return Fraction(int(b_numerators(np.array([a.coeffs]), p, e)[0]), w_prime_size(p, e))
    if method == "g":
        return Fraction(_b_group_sum(a, p, e, threads), group_order(p ** e))
    raise DomainError(f"unknown density method {method!r}")


def c_density(a: Form, chi: DirichletCharacter, method: str = "cw", threads: int = 1) -> LocalDensityValue:
    """C_{p^e}(a, chi): "cw" averages I(a(u, v)) over W'; "cg" averages I((g.a)_1) over G (unramified chi only)."""
    p, e = _prime_power(a.modulus)
    if method == "cw":
        return LocalDensityValue(c_values(np.array([a.coeffs]), chi, p, e)[0])
    if method == "cg":
        if conductor_exponent(chi, p):
            raise DomainError(f"the group-average formula needs chi unramified at {p}")
        table = _i_table(chi, p, e)
        return LocalDensityValue(_c_group_sum(a, table, p, e, threads) / group_order(p ** e))
    raise DomainError(f"unknown density method {method!r}")


# =============================================================================
# Distributions and residues
# =============================================================================

class Distributions(NamedTuple):
    """A_N(f), B_N(f), C_N(f, chi); A and B are exact for rational f."""
    a: Scalar
    b: Scalar
    c: complex


def _character_for(f: FiniteFunction, chi: Optional[DirichletCharacter]) -> DirichletCharacter:
    prim = (chi or DirichletCharacter.trivial(1)).primitive()
    if f.modulus % prim.modulus:
        raise DomainError(f"conductor {prim.modulus} does not divide the level {f.modulus}")
    return prim


def distributions(f: FiniteFunction, chi: Optional[DirichletCharacter] = None) -> Distributions:
    """f-weighted averages of 1, B_N and C_N(., chi) over V_N."""
    n = f.modulus
    prim = _character_for(f, chi)
    pts = f.points()
    n4 = n ** 4
    b_num = np.ones(len(pts), dtype=object)
    b_den = 1
    c = np.ones(len(pts), dtype=complex)
    for p, e in sorted(sympy.factorint(n).items()):
        local = pts % p ** e
        b_num = b_num * b_numerators(local, p, e).astype(object)
        b_den *= w_prime_size(p, e)
        c = c * c_values(local, prim, p, e)
    values = f.complex_values()
    c_total = complex((values * c).sum()) / n4
    if f.root_order == 1:
        nums = f.counts[:, 0].astype(object)
        a_total = Fraction(int(nums.sum()), f.denominator * n4)
        b_total = Fraction(int((nums * b_num).sum()), f.denominator * b_den * n4)
        return Distributions(a_total, b_total, c_total)
    b_float = np.array([float(Fraction(int(v), b_den)) for v in b_num])
    return Distributions(complex(values.sum()) / n4, complex((values * b_float).sum()) / n4, c_total)


@lru_cache(maxsize=8)
def _orbits(p: int, e: int, threads: int = 1) -> Tuple[Tuple[Form, int], ...]:
    return tuple(orbit_decomposition(p, e, threads))


def orbit_distributions(
    p: int,
    e: int,
    weight: Callable[[Form], Union[int, Fraction]],
    chi: Optional[DirichletCharacter] = None,
    threads: int = 1,
) -> Distributions:
    """distributions() for a G-invariant rational weight, summed orbit by orbit.

    ``chi`` must be unramified at p so that C is constant on orbits.
    """
    prim = (chi or DirichletCharacter.trivial(1)).primitive()
    if conductor_exponent(prim, p):
        raise DomainError("orbit sums of C need chi unramified at p")
    orbits = _orbits(p, e, threads)
    reps = np.array([rep.coeffs for rep, _ in orbits], dtype=np.int64)
    sizes = [size for _, size in orbits]
    weights = [Fraction(weight(rep)) for rep, _ in orbits]
    b_num = b_numerators(reps, p, e)
    c = c_values(reps, prim, p, e)
    q4 = p ** (4 * e)
    a_total = sum((w * s for w, s in zip(weights, sizes)), Fraction(0)) / q4
    b_total = sum((w * s * int(bn) for w, s, bn in zip(weights, sizes, b_num)), Fraction(0)) / (w_prime_size(p, e) * q4)
    c_total = sum((float(w) * s * cv for w, s, cv in zip(weights, sizes, c)), 0j) / q4
    return Distributions(a_total, b_total, c_total)


@dataclass(frozen=True)
class ZetaResidues:
    """Residues of xi(s, f) at s = 1 and s = 5/6."""
    at_one: ResidueVector
    at_five_sixths: ResidueVector
    l_value: complex
    distributions: Distributions

    def to_dict(self) -> Dict:
        def pair(z: Scalar) -> List[float]:
            z = _as_complex(z)
            return [z.real, z.imag]

        return {
            "s1": self.at_one.to_list(),
            "s56": self.at_five_sixths.to_list(),
            "l_one_third": pair(self.l_value),
            "A": pair(self.distributions.a),
            "B": pair(self.distributions.b),
            "C": pair(self.distributions.c),
        }


def residue_of_zeta(
    f: FiniteFunction,
    chi: Optional[DirichletCharacter] = None,
    rng: Optional[np.random.Generator] = None,
) -> ZetaResidues:
    """Residues of xi(s, f) for f in C(V_N, chi).

    With ``rng`` the relative invariance of f is sampled first.
    """
    prim = _character_for(f, chi)
    if rng is not None:
        f.check_relative_invariance(prim, rng)
    dist = distributions(f, prim)
    alpha, beta, gamma = residue_constants()
    at_one = alpha * dist.a + beta * dist.b if prim.is_trivial() else ResidueVector.zero()
    if (prim ** 3).is_trivial():
        l_value = dirichlet_l(1.0 / 3.0, prim.inverse())
        at_five_sixths = gamma * (dist.c * l_value)
    else:
        l_value, at_five_sixths = 0j, ResidueVector.zero()
    return ZetaResidues(at_one, at_five_sixths, l_value, dist)


def theta_residues(modulus: int) -> Tuple[ResidueVector, ResidueVector]:
    """Closed-form residues of theta_N = sum over m | N of mu(m) m xi_m, N squarefree."""
    if mobius(modulus) == 0:
        raise DomainError(f"theta residues are tabulated for squarefree N, got {modulus}")
    alpha, beta, gamma = residue_constants()
    scale = mobius(modulus) * euler_phi(modulus)
    return (
        (alpha + beta) * (scale / modulus ** 2),
        gamma * (scale * modulus ** (-4.0 / 3.0) * zeta_one_third()),
    )


def assembled_theta_residues(modulus: int) -> Tuple[ResidueVector, ResidueVector]:
    """theta_N residues assembled from the local densities of f_m for m | N."""
    at_one, at_56 = ResidueVector.zero(), ResidueVector.zero()
    for m in sympy.divisors(modulus):
        mu = mobius(m)
        if not mu:
            continue
        res = residue_of_zeta(divisible_indicator(m)) if m > 1 else residue_of_zeta(_constant_one())
        at_one = at_one + res.at_one * (mu * m)
        at_56 = at_56 + res.at_five_sixths * (mu * m)
    return at_one, at_56


def _constant_one() -> FiniteFunction:
    return FiniteFunction.indicator(1, np.zeros(1, dtype=np.int64))


# =============================================================================
# Residue tables
# =============================================================================

LEVEL_P_B: Dict[TypeSymbol, Callable[[int], Fraction]] = {
    TypeSymbol.THREE: lambda p: Fraction(0),
    TypeSymbol.TWO_ONE: lambda p: Fraction(1),
    TypeSymbol.ONE_ONE_ONE: lambda p: Fraction(3),
    TypeSymbol.DOUBLE: lambda p: Fraction(p + 2, p + 1),
    TypeSymbol.TRIPLE: lambda p: Fraction(1, p + 1),
    TypeSymbol.ZERO: lambda p: Fraction(1),
}

# (1 - p^-2) C as Laurent polynomials in x, for unramified cubic (or trivial) chi
LEVEL_P_C: Dict[TypeSymbol, Dict[int, int]] = {
    TypeSymbol.THREE: {0: 1, 1: -1, 3: 1, 4: -1},
    TypeSymbol.TWO_ONE: {0: 1, 4: -1},
    TypeSymbol.ONE_ONE_ONE: {0: 1, 1: 2, 3: -2, 4: -1},
    TypeSymbol.DOUBLE: {0: 1, 1: 1, 3: -1, 4: -1},
    TypeSymbol.TRIPLE: {0: 1, 4: -1},
    TypeSymbol.ZERO: {-2: 1, 4: -1},
}

MAXIMAL_B: Dict[TypeSymbol, Callable[[int], Fraction]] = {
    TypeSymbol.THREE: LEVEL_P_B[TypeSymbol.THREE],
    TypeSymbol.TWO_ONE: LEVEL_P_B[TypeSymbol.TWO_ONE],
    TypeSymbol.ONE_ONE_ONE: LEVEL_P_B[TypeSymbol.ONE_ONE_ONE],
    TypeSymbol.DOUBLE_MAX: lambda p: Fraction(1),
    TypeSymbol.TRIPLE_MAX: lambda p: Fraction(0),
}

MAXIMAL_C: Dict[TypeSymbol, Dict[int, int]] = {
    TypeSymbol.THREE: LEVEL_P_C[TypeSymbol.THREE],
    TypeSymbol.TWO_ONE: LEVEL_P_C[TypeSymbol.TWO_ONE],
    TypeSymbol.ONE_ONE_ONE: LEVEL_P_C[TypeSymbol.ONE_ONE_ONE],
    TypeSymbol.DOUBLE_MAX: {0: 1, 1: 1, 2: -1, 3: -1},
    TypeSymbol.TRIPLE_MAX: {0: 1, 2: -1},
}

NONMAXIMAL_B: Dict[TypeSymbol, Callable[[int], Fraction]] = {
    TypeSymbol.DOUBLE_STAR: lambda p: Fraction(2 * p + 1, p + 1),
    TypeSymbol.TRIPLE_STAR: lambda p: Fraction(1),
    TypeSymbol.TRIPLE_STAR2: lambda p: Fraction(1, p + 1),
}

NONMAXIMAL_C: Dict[TypeSymbol, Dict[int, int]] = {
    TypeSymbol.DOUBLE_STAR: {-1: 1, 0: 1, 2: -1, 3: -1},
    TypeSymbol.TRIPLE_STAR: {-1: 1, 0: 1, 1: -1, 2: -1},
    TypeSymbol.TRIPLE_STAR2: {-1: 1, 0: 1, 1: -1, 2: -1},
}

# B at p = 2 for the two 1^2 1_* representatives mod 4
DYADIC_B = {(0, 1, 0, 0): Fraction(4, 3), (0, 1, 2, 0): Fraction(5, 3)}


def expected_table_value(
    table: Dict[TypeSymbol, Dict[int, int]], symbol: TypeSymbol, chi: DirichletCharacter, p: int
) -> LocalDensityValue:
    return LocalDensityValue.from_polynomial(table[symbol], x_value(chi, p))


def ramified_level_p_value(a: Form, chi: DirichletCharacter, symbol: TypeSymbol) -> complex:
    """(1 - p^-2) C_p(a, chi) for chi_p cubic of conductor p, p = 1 mod 3."""
    p = a.modulus
    local = chi.primitive().component(p)
    tau = gauss_sum(local).value
    if symbol in (TypeSymbol.THREE, TypeSymbol.ONE_ONE_ONE, TypeSymbol.TWO_ONE):
        sign = -1 if symbol is TypeSymbol.TWO_ONE else 1
        return sign * tau ** 3 * local(disc(a)) / p ** 2
    if symbol is TypeSymbol.TRIPLE:
        value = next(a.value(u, v) for u in range(p) for v in range(p) if a.value(u, v))
        return local(value)
    return 0j


def ramified_nonmaximal_value(a: Form, chi: DirichletCharacter, symbol: TypeSymbol) -> complex:
    """(1 - p^-2) C_{p^2}(a, chi) for nonmaximal a = (1, a2, a3, 0) or 1^2 1_*."""
    p = _prime_power(a.modulus)[0]
    if symbol is TypeSymbol.DOUBLE_STAR:
        return 0j
    if p % 3 == 1:
        return 1 + 0j
    local = chi.primitive().component(p)
    return (1 + local(1 + a.x2 + a.x3) + local(1 - a.x2 + a.x3)) / 3


def tilde_c(a: Form, chi: DirichletCharacter, p: int, e: Optional[int] = None) -> LocalDensityValue:
    """(1 - p^-2) C_{p^e}(a, chi) / chi~_p(unit part of P(a)) for a maximal at p.

    ``a`` is an integral form (or a form mod p^e, read through its lift).
    """
    if a.modulus is not None:
        q = a.modulus
        lp, e = _prime_power(q)
        if lp != p:
            raise DomainError(f"form mod {q} at p = {p}")
    a = a.lift()
    discriminant = disc(a)
    if discriminant == 0:
        raise DomainError(f"{a} is singular")
    if is_nonmaximal_at(delone_faddeev(a), p):
        raise DomainError(f"{a} is not maximal at {p}")
    k = p_valuation(discriminant, p)
    if e is None:
        # tabulated level: the conductor exponent, one more when p divides P(a)
        e = max(conductor_exponent(chi, p), 1) + (1 if k else 0)
    unit = discriminant // p ** k
    density = c_values(np.array([a.coeffs]), chi, p, e)[0]
    return LocalDensityValue((1 - p ** -2.0) * density / chi_tilde(chi, p, unit))


def expected_tilde_c(a: Form, chi: DirichletCharacter, p: int, symbol: Optional[TypeSymbol] = None) -> complex:
    """The normalized density of a maximal representative from the closed-form tables."""
    prim = chi.primitive()
    local = prim.component(p)
    rest = prim.prime_to(p)
    rest_p2 = rest(p) ** 2 if rest.modulus > 1 else 1 + 0j
    x1, x2, x3, x4 = a.lift().coeffs
    if p % 3 == 1:
        tau3 = gauss_sum(local).value ** 3 / p ** 2
        if symbol in (TypeSymbol.THREE, TypeSymbol.ONE_ONE_ONE):
            return tau3
        if symbol is TypeSymbol.TWO_ONE:
            return -tau3
        if (x1, x2, x3) == (0, 1, 0) and x4 % p == 0:
            return local(2) * rest_p2 * p ** (-1.0 / 3.0)
        if (x1, x2, x3) == (1, 0, 0) and x4 % p == 0:
            alpha = local(x4 // p)
            return alpha + alpha ** 2 * rest_p2 * p ** (-1.0 / 3.0)
    if p == 3:
        if symbol in NONSINGULAR:
            return local(2) / p
        third = p ** (-1.0 / 3.0)
        if (x1, x2, x3) == (0, 1, 0) and abs(x4) == 3:
            sign = 1 if x4 > 0 else -1
            return sign * (1 - local(4)) * rest_p2 * p ** (-4.0 / 3.0)
        if (x1, x2, x3, x4) == (1, 0, 3, 3):
            return (local(2) - 1) / p
        if (x1, x2, x3, x4) == (1, 0, 6, 3):
            return (2 * local(2) + 1) / p
        if (x1, x2, x3, x4) == (1, 3, 0, 3):
            return local(4) * rest_p2 * third
        if (x1, x2, x3) == (1, -3, 0) and x4 % 3 == 0:
            return local(x4 // 3) ** 2 + rest_p2 * third
        if (x1, x2, x3) == (1, 0, 0) and x4 % 3 == 0:
            return local(x4 // 3) ** 2 * rest_p2 * third
    raise DomainError(f"no tabulated value for {a} at p = {p}")


def tilde_c_representatives(p: int) -> List[Tuple[Form, Optional[TypeSymbol], int]]:
    """(integral representative, symbol for nonsingular types, level) covering the tables."""
    out: List[Tuple[Form, Optional[TypeSymbol], int]] = []
    if p % 3 == 1:
        for symbol in NONSINGULAR:
            out.append((representative_mod_p(p, symbol).lift(), symbol, 1))
        g = int(sympy.primitive_root(p))
        for alpha in (1, g):
            out.append((Form(0, 1, 0, p * alpha), None, 2))
        for alpha in (1, g, g * g % p):
            out.append((Form(1, 0, 0, p * alpha), None, 2))
        return out
    if p == 3:
        for symbol in NONSINGULAR:
            out.append((representative_mod_p(3, symbol).lift(), symbol, 2))
        reps = [(0, 1, 0, 3), (0, 1, 0, -3), (1, 0, 3, 3), (1, 0, 6, 3), (1, 3, 0, 3)]
        reps += [(1, -3, 0, 3 * alpha) for alpha in (1, 4, 7)]
        reps += [(1, 0, 0, 3 * alpha) for alpha in (1, 4, 7)]
        out.extend((Form.of(r), None, 3) for r in reps)
        return out
    raise UnsupportedRingError(f"ramified cubic characters need p = 3 or p = 1 mod 3, got {p}")


# =============================================================================
# Characters used by the checks
# =============================================================================

def unramified_cubic_character(p: int) -> DirichletCharacter:
    """A primitive cubic character of prime conductor q != p, with chi(p) != 1 when possible."""
    fallback = None
    for q in sympy.primerange(7, 400):
        if q % 3 != 1 or q == p:
            continue
        for chi in characters_of_order(q, 3, primitive_only=True):
            if fallback is None:
                fallback = chi
            if not chi.value(p).is_one():
                return chi
    return fallback


def ramified_cubic_characters(p: int, cofactor: bool = False) -> List[DirichletCharacter]:
    """Primitive cubic characters of p-conductor p (or 9 at p = 3), optionally times a cubic character elsewhere."""
    modulus = 9 if p == 3 else p
    if p != 3 and p % 3 != 1:
        raise UnsupportedRingError(f"no cubic characters of conductor {p}")
    chars = characters_of_order(modulus, 3, primitive_only=True)
    if cofactor:
        other = unramified_cubic_character(p)
        chars = [chi * other for chi in chars]
    return chars


# =============================================================================
# Gamma matrices
# =============================================================================

T_MATRIX = np.array([[SQRT3, 1.0], [SQRT3, -1.0]])
A_INVERSE = np.array([[0.0, 1.0 / 3.0], [1.0, 0.0]])


def _gamma_arguments(s: complex) -> List[complex]:
    out = [s, s - 1 / 6, s + 1 / 6]
    for z in (s, 1 - s):
        half = z / 2
        out += [half, half + 1 / 2, half - 1 / 12, half + 1 / 12, half + 5 / 12, half + 7 / 12]
    return out


def near_gamma_pole(s: complex, radius: float = 1e-6) -> bool:
    for z in _gamma_arguments(complex(s)):
        if z.real <= radius and abs(z.imag) < radius and abs(z.real - round(z.real)) < radius:
            return True
    return False


def _delta(s, shifts: Tuple[float, float]):
    half = s / 2
    base = mpmath.power(mpmath.mpf(2) ** 4 * 3 ** 3 / mpmath.pi ** 4, half)
    return (
        base
        * mpmath.gamma(half)
        * mpmath.gamma(half + mpmath.mpf(1) / 2)
        * mpmath.gamma(half + shifts[0])
        * mpmath.gamma(half + shifts[1])
    )


_PLUS_SHIFTS = (-mpmath.mpf(1) / 12, mpmath.mpf(1) / 12)
_MINUS_SHIFTS = (mpmath.mpf(5) / 12, mpmath.mpf(7) / 12)


def gamma_matrices(s: complex) -> Tuple[np.ndarray, complex, complex]:
    """(M(s), Delta_+(s), Delta_-(s)) as complex doubles."""
    if near_gamma_pole(s):
        logger.warning(f"s = {s} is close to a gamma pole; values are ill-conditioned")
    with mpmath.workdps(config.MPMATH_DPS):
        z = mpmath.mpc(complex(s))
        sixth = mpmath.mpf(1) / 6
        scale = (
            mpmath.power(3, 3 * z - 2)
            / (2 * mpmath.power(mpmath.pi, 4 * z))
            * mpmath.gamma(z) ** 2
            * mpmath.gamma(z - sixth)
            * mpmath.gamma(z + sixth)
        )
        s1, s2 = mpmath.sin(mpmath.pi * z), mpmath.sin(2 * mpmath.pi * z)
        m = np.array([[complex(scale * s2), complex(scale * s1)], [complex(3 * scale * s1), complex(scale * s2)]])
        return m, complex(_delta(z, _PLUS_SHIFTS)), complex(_delta(z, _MINUS_SHIFTS))


def functional_equation_gap(s: complex) -> float:
    """Relative size of Delta(1 - s) T M(s) - Delta(s) T A^-1."""
    m, d_plus, d_minus = gamma_matrices(s)
    _, r_plus, r_minus = gamma_matrices(1 - complex(s))
    lhs = np.diag([r_plus, r_minus]) @ T_MATRIX @ m
    rhs = np.diag([d_plus, d_minus]) @ T_MATRIX @ A_INVERSE
    return float(np.abs(lhs - rhs).max() / max(np.abs(rhs).max(), 1e-300))


def identity_check(s: complex, tolerance: float = config.GAMMA_TOLERANCE) -> bool:
    return functional_equation_gap(s) <= tolerance


# =============================================================================
# L-functions of cubic rings twisted by characters
# =============================================================================

def has_bias_pole(chi: DirichletCharacter) -> bool:
    """Every chi_p is sextic (p != 3) and chi_3 cubic; the trivial character qualifies."""
    prim = chi.primitive()
    if prim.modulus % 2 == 0:
        return False
    for p in sympy.primefactors(prim.modulus):
        want = 3 if p == 3 else 6
        if prim.component(p).order != want:
            return False
    return True


def _euler_factor(m: int) -> float:
    out = 1.0
    for p in sympy.primefactors(m):
        out *= 1 - 1 / p
    return out


def standard_l_density(chi: DirichletCharacter) -> complex:
    """Closed form of C_m(h, chi^2) for h(a) = chi(P(a)) on V_m."""
    prim = chi.primitive()
    if not has_bias_pole(prim):
        return 0j
    m = prim.modulus
    return _euler_factor(m) * gauss_sum(prim ** 2).value ** 3 / m ** 2


def assembled_standard_l_density(chi: DirichletCharacter) -> complex:
    """C_m(h, chi^2) as the product over p of local sums of chi_p(P(a)) C_{p^c}(a, chi^2)."""
    prim = chi.primitive()
    square = prim ** 2
    total = 1 + 0j
    for p in sympy.primefactors(prim.modulus):
        local = prim.component(p)
        q = local.modulus
        _, c = _prime_power(q)
        points = decode_forms(np.arange(q ** 4, dtype=np.int64), q)
        units, _ = _unit_values(prim, p)
        h = units[disc_many(points, q) % q]
        keep = h != 0
        total *= complex((h[keep] * c_values(points[keep], square, p, c)).sum()) / q ** 4
    return total


def standard_l_residue(chi: DirichletCharacter) -> ResidueVector:
    """Residue at s = 5/6 of the L-function of cubic rings twisted by chi."""
    prim = chi.primitive()
    density = standard_l_density(prim)
    if density == 0:
        return ResidueVector.zero()
    _, _, gamma = residue_constants()
    return gamma * (density * dirichlet_l(1.0 / 3.0, (prim ** 2).inverse()))


def twisted_density(chi: DirichletCharacter) -> complex:
    """Closed form of C_{p^2}(h, chi^2) for the r = m = p twist: chi(4)(1 - 1/p) p^(-4/3) for cubic chi."""
    prim = chi.primitive()
    p = prim.modulus
    if not (prim ** 3).is_trivial():
        return 0j
    return prim(4) * (1 - 1 / p) * p ** (-4.0 / 3.0)


@lru_cache(maxsize=8)
def _double_max_orbits(p: int, threads: int = 1):
    return tuple(orbit_split(p, TypeSymbol.DOUBLE_MAX, threads))


def assembled_twisted_density(chi: DirichletCharacter, threads: int = 1) -> complex:
    """C_{p^2}(h, chi^2) summed over the 1^2 1_max orbits, the support of the r = p weight."""
    prim = chi.primitive()
    p = prim.modulus
    if not sympy.isprime(p) or p <= 3:
        raise DomainError(f"the r = m twist is built for primes m > 3, got {p}")
    square = prim ** 2
    q = p * p
    total = 0j
    for orbit in _double_max_orbits(p, threads):
        rep = orbit.representative
        h = prim((disc(rep.lift()) % q) // p)
        total += orbit.cardinality * h * c_values(np.array([rep.coeffs]), square, p, 2)[0]
    return total / q ** 4


def twisted_residue(chi: DirichletCharacter) -> ResidueVector:
    prim = chi.primitive()
    _, _, gamma = residue_constants()
    return gamma * (twisted_density(prim) * dirichlet_l(1.0 / 3.0, (prim ** 2).inverse()))


def bias_characters(modulus: int) -> List[DirichletCharacter]:
    """Primitive characters of conductor dividing N that contribute to K_1."""
    out = []
    for d in sympy.divisors(modulus):
        out.extend(chi for chi in all_characters(d) if chi.is_primitive() and has_bias_pole(chi))
    return out


def bias_constant_k1(modulus: int, residue: int) -> complex:
    """K_1(N, a), the secondary-term constant for discriminants = a mod N."""
    if modulus % 2 == 0:
        raise UnsupportedRingError(f"K_1 is defined for odd N, got {modulus}")
    if math.gcd(residue, modulus) != 1:
        raise DomainError(f"residue {residue} is not prime to {modulus}")
    total = 0j
    for chi in bias_characters(modulus):
        m = chi.modulus
        term = chi(residue).conjugate() * gauss_sum(chi ** 2).value ** 3 * dirichlet_l(1.0 / 3.0, (chi ** 2).inverse())
        term /= m ** 2
        for p in sympy.primefactors(modulus):
            if m % p:
                term *= 1 - chi(p).conjugate() ** 2 * p ** (-4.0 / 3.0)
        total += term
    return total


def progression_prediction(modulus: int, residue: int, bound: float, sign: int) -> Tuple[float, float]:
    """(main, secondary) terms of the count of classes with |disc| <= X and |disc| = a mod N."""
    c_main = 1.0 if sign > 0 else 1.5
    k_sign = 1.0 if sign > 0 else SQRT3
    euler = 1.0
    for p in sympy.primefactors(modulus):
        euler *= 1 - p ** -2.0
    main = c_main * math.pi ** 2 * euler / (9 * modulus) * bound
    k1 = bias_constant_k1(modulus, residue)
    secondary = k1.real * 2 * k_sign * math.pi ** 2 / (9 * gamma_two_thirds().real ** 3 * modulus)
    return main, secondary * bound ** (5 / 6) / (5 / 6)


def compare_progressions(
    table: ClassNumberTable,
    modulus: int,
    checkpoints: Sequence[int],
) -> VerificationReport:
    """Observed progression counts against main + secondary terms (informational, never failing)."""
    sign = table.sign
    report = VerificationReport(f"progressions_N{modulus}_{'+' if sign > 0 else '-'}")
    for residue in range(1, modulus):
        if math.gcd(residue, modulus) != 1:
            continue
        sums = progression_partial_sums(table, modulus, residue, checkpoints)
        for bound, observed in sums.items():
            main, secondary = progression_prediction(modulus, residue, bound, sign)
            report.add(
                f"a={residue} X={bound}",
                main + secondary,
                float(observed),
                passed=True,
                note=f"main {main:.6g}, secondary {secondary:.6g}",
            )
    return report.finish()


# =============================================================================
# Verification drivers
# =============================================================================

def _add_value(report: VerificationReport, location: str, expected, got, tolerance: float = config.TABLE_TOLERANCE) -> None:
    report.add(location, _as_complex(expected), _as_complex(got), tolerance)


def _check_paths(report: VerificationReport, location: str, a: Form, chi: DirichletCharacter, threads: int) -> None:
    """The W'-path and the group path agree for B and for unramified C."""
    report.add(f"{location} B w=g", b_density(a, "g", threads), b_density(a, "w"))
    if not conductor_exponent(chi, _prime_power(a.modulus)[0]):
        _add_value(report, f"{location} C cw=cg", c_density(a, chi, "cg", threads).value, c_density(a, chi).value)


def verify_unramified_level_p(p: int, chi: Optional[DirichletCharacter] = None, threads: int = 1) -> VerificationReport:
    """B and C at level p for every type, chi unramified at p."""
    chi = chi or unramified_cubic_character(p)
    report = VerificationReport(f"ur1_p{p}", workers=threads)
    for orbit in level_p_orbits(p):
        rep, symbol = orbit.representative, orbit.symbol
        location = f"p={p} {symbol}"
        report.add(f"{location} B", LEVEL_P_B[symbol](p), b_density(rep))
        expected = expected_table_value(LEVEL_P_C, symbol, chi, p)
        _add_value(report, f"{location} (1-p^-2)C", expected, (1 - p ** -2.0) * c_density(rep, chi).value)
        _check_paths(report, location, rep, chi, threads)
    return report.finish()


def _maximal_representatives(p: int) -> List[Tuple[TypeSymbol, Form]]:
    out = [(symbol, representative_mod_p2(p, symbol)) for symbol in NONSINGULAR]
    for symbol in (TypeSymbol.DOUBLE_MAX, TypeSymbol.TRIPLE_MAX):
        if p >= 5:
            out.extend((symbol, rep) for rep in split_representatives(p, symbol))
        else:
            out.append((symbol, representative_mod_p2(p, symbol)))
    return out


def verify_unramified_maximal(p: int, chi: Optional[DirichletCharacter] = None, threads: int = 1) -> VerificationReport:
    """B and C of maximal orbits at level p^2, and their stability under lifting to p^3."""
    chi = chi or unramified_cubic_character(p)
    report = VerificationReport(f"urmax_p{p}", workers=threads)
    for symbol, rep in _maximal_representatives(p):
        location = f"p={p} {symbol} {rep.coeffs}"
        report.add(f"{location} B", MAXIMAL_B[symbol](p), b_density(rep))
        expected = expected_table_value(MAXIMAL_C, symbol, chi, p)
        _add_value(report, f"{location} (1-p^-2)C", expected, (1 - p ** -2.0) * c_density(rep, chi).value)
        lifted = Form.of(rep.coeffs, p ** 3)
        report.add(f"{location} B lift", b_density(rep), b_density(lifted))
        _add_value(report, f"{location} C lift", c_density(rep, chi).value, c_density(lifted, chi).value)
        _check_paths(report, location, rep, chi, threads)
    return report.finish()


def verify_unramified_nonmaximal(p: int, chi: Optional[DirichletCharacter] = None, threads: int = 1) -> VerificationReport:
    """B and C of the nonmaximal p^2-types (and the two dyadic B values at p = 2)."""
    report = VerificationReport(f"urnm_p{p}", workers=threads)
    if p == 2:
        for coeffs, expected in DYADIC_B.items():
            rep = Form.of(coeffs, 4)
            report.add(f"p=2 {coeffs} B", expected, b_density(rep))
            report.add(f"p=2 {coeffs} B w=g", b_density(rep, "g", threads), b_density(rep))
        return report.finish()
    chi = chi or unramified_cubic_character(p)
    for symbol in NONMAXIMAL_B:
        rep = representative_mod_p2(p, symbol)
        location = f"p={p} {symbol} {rep.coeffs}"
        report.add(f"{location} B", NONMAXIMAL_B[symbol](p), b_density(rep))
        expected = expected_table_value(NONMAXIMAL_C, symbol, chi, p)
        _add_value(report, f"{location} (1-p^-2)C", expected, (1 - p ** -2.0) * c_density(rep, chi).value)
        _check_paths(report, location, rep, chi, threads)
    return report.finish()


def verify_ramified_level_p(p: int, rng: np.random.Generator, samples: int = 3) -> VerificationReport:
    """(1 - p^-2) C_p for cubic chi of conductor p, on representatives and random translates."""
    report = VerificationReport(f"rm1_p{p}")
    for chi in ramified_cubic_characters(p) + ramified_cubic_characters(p, cofactor=True):
        for orbit in level_p_orbits(p):
            forms = [orbit.representative]
            forms += [act(random_element(p, rng), orbit.representative) for _ in range(samples)]
            for a in forms:
                got = (1 - p ** -2.0) * c_density(a, chi).value
                expected = ramified_level_p_value(a, chi, orbit.symbol)
                _add_value(report, f"p={p} chi mod {chi.modulus} {orbit.symbol} {a.coeffs}", expected, got)
    return report.finish()


def _ramified_nonmaximal_forms(p: int) -> List[Tuple[TypeSymbol, Form]]:
    q = p * p
    out = [(TypeSymbol.DOUBLE_STAR, Form(0, 1, 0, 0, q))]
    if p == 3:
        for a2 in (0, 3, 6):
            for a3 in (0, 3, 6):
                symbol = TypeSymbol.TRIPLE_STAR2 if a3 == 0 else TypeSymbol.TRIPLE_STAR
                out.append((symbol, Form(1, a2, a3, 0, q)))
        return out
    out.append((TypeSymbol.TRIPLE_STAR, Form(1, 0, p, 0, q)))
    out.append((TypeSymbol.TRIPLE_STAR2, Form(1, p, 0, 0, q)))
    return out


def verify_ramified_nonmaximal(p: int) -> VerificationReport:
    report = VerificationReport(f"rmnm_p{p}")
    for chi in ramified_cubic_characters(p):
        for symbol, a in _ramified_nonmaximal_forms(p):
            got = (1 - p ** -2.0) * c_density(a, chi).value
            _add_value(report, f"p={p} chi mod {chi.modulus} {symbol} {a.coeffs}", ramified_nonmaximal_value(a, chi, symbol), got)
    return report.finish()


def verify_ramified_maximal(p: int) -> VerificationReport:
    """Normalized densities of maximal forms; at p = 3 both conjugate characters are checked."""
    report = VerificationReport(f"rmmax_p{p}")
    for chi in ramified_cubic_characters(p) + ramified_cubic_characters(p, cofactor=True):
        for a, symbol, e in tilde_c_representatives(p):
            got = tilde_c(a, chi, p, e).value
            expected = expected_tilde_c(a, chi, p, symbol)
            _add_value(report, f"p={p} chi mod {chi.modulus} e={e} {a.coeffs}", expected, got)
            if w_prime_size(p, e + 1) <= config.MAX_LIFT_CHECK:
                again = tilde_c(a, chi, p, e + 1).value
                _add_value(report, f"p={p} chi mod {chi.modulus} e={e + 1} {a.coeffs}", got, again)
    return report.finish()


def verify_corollaries(p: int, threads: int = 1) -> VerificationReport:
    """Distributions of f_p, Phi_p and Phi'_p against their closed forms."""
    chi = unramified_cubic_character(p)
    x = x_value(chi, p)
    tol = config.COROLLARY_TOLERANCE
    report = VerificationReport(f"corollaries_p{p}", workers=threads)

    dist = distributions(divisible_indicator(p), chi)
    level_p = Fraction(1, p) + Fraction(1, p ** 2) - Fraction(1, p ** 3)
    report.add(f"p={p} A(f_p)", level_p, dist.a)
    report.add(f"p={p} B(f_p)", level_p, dist.b)
    _add_value(report, f"p={p} C(f_p)", evaluate_x_polynomial(x_polynomial({3: 1, 4: 1, 7: -1}), x), dist.c, tol)

    nm = orbit_distributions(p, 2, lambda a: int(type_mod_p2(a, p) in NONMAXIMAL), chi, threads)
    nm_tr = orbit_distributions(p, 2, lambda a: int(type_mod_p2(a, p) in NONMAXIMAL_OR_TOTALLY_RAMIFIED), chi, threads)
    report.add(f"p={p} A(Phi)", Fraction(1, p ** 2) + Fraction(1, p ** 3) - Fraction(1, p ** 5), nm.a)
    report.add(f"p={p} A(Phi')", Fraction(2, p ** 2) - Fraction(1, p ** 4), nm_tr.a)
    report.add(f"p={p} B(Phi)", Fraction(2, p ** 2) - Fraction(1, p ** 4), nm.b)
    report.add(f"p={p} B(Phi')", Fraction(2, p ** 2) - Fraction(1, p ** 4), nm_tr.b)
    _add_value(report, f"p={p} C(Phi)", evaluate_x_polynomial(x_polynomial({5: 1, 6: 1, 11: -1}), x), nm.c, tol)
    _add_value(report, f"p={p} C(Phi')", evaluate_x_polynomial(x_polynomial({5: 1, 6: 2, 8: -1, 9: -1}), x), nm_tr.c, tol)
    return report.finish()


def verify_density_properties(p: int, rng: np.random.Generator, samples: int = 5, threads: int = 1) -> VerificationReport:
    """Mass, invariance, scaling and level-stability properties of B and C."""
    report = VerificationReport(f"density_properties_p{p}", workers=threads)
    unramified = unramified_cubic_character(p)
    ramified = ramified_cubic_characters(p)[0] if p == 3 or p % 3 == 1 else None

    points = decode_forms(np.arange(p ** 4, dtype=np.int64), p)
    report.add(f"p={p} e=1 mass B", Fraction(1), Fraction(int(b_numerators(points, p, 1).sum()), w_prime_size(p, 1) * p ** 4))
    _add_value(report, f"p={p} e=1 mass C", 1, c_values(points, unramified, p, 1).sum() / p ** 4)
    if p >= 5:
        mass = orbit_distributions(p, 2, lambda a: 1, unramified, threads)
        report.add(f"p={p} e=2 mass B", Fraction(1), mass.b)
        _add_value(report, f"p={p} e=2 mass C", 1, mass.c)

    for chi in filter(None, (unramified, ramified)):
        e = max(conductor_exponent(chi, p), 1) + 1
        q = p ** e
        local = chi.primitive().component(p)
        for _ in range(samples):
            a, g = random_form(q, rng), random_element(q, rng)
            ga = act(g, a)
            report.add(f"p={p} B({ga.coeffs}) = B({a.coeffs})", b_density(a), b_density(ga))
            _add_value(
                report,
                f"p={p} chi mod {chi.modulus} C({ga.coeffs})",
                local(g.det).conjugate() * c_density(a, chi).value,
                c_density(ga, chi).value,
            )
            b = random_form(p ** (e - 1), rng)
            scaled = Form.of((p * v for v in b.coeffs), q)
            report.add(f"p={p} B(p*{b.coeffs})", b_density(b), b_density(scaled))
            _add_value(
                report,
                f"p={p} chi mod {chi.modulus} C(p*{b.coeffs})",
                tilde_at_p(chi, p) * p ** (2.0 / 3.0) * c_density(b, chi).value,
                c_density(scaled, chi).value,
            )
    return report.finish()


def verify_gamma(rng: np.random.Generator, samples: int = 6) -> VerificationReport:
    """The gamma-matrix identity at fixed and random points of the critical strip."""
    report = VerificationReport("gamma")
    m_half, _, _ = gamma_matrices(0.5)
    _add_value(report, "M(1/2)[0][1]", A_INVERSE[0][1], m_half[0][1], config.GAMMA_TOLERANCE)
    _add_value(report, "M(1/2)[1][0]", A_INVERSE[1][0], m_half[1][0], config.GAMMA_TOLERANCE)
    points = [0.7 + 0.3j, 0.5 + 0j, 0.25 + 2j]
    points += [complex(rng.uniform(0.2, 0.8), rng.uniform(-5, 5)) for _ in range(samples)]
    for s in points:
        gap = functional_equation_gap(s)
        report.add(f"s={s:.6g}", 0.0, gap, passed=gap <= config.GAMMA_TOLERANCE)
    return report.finish()


def verify_l_residues(threads: int = 1) -> VerificationReport:
    """Character-twisted residues: local assembly against closed forms."""
    report = VerificationReport("l_residues", workers=threads)
    for m in (7, 9, 13):
        for chi in all_characters(m):
            # the s = 5/6 pole needs chi^6 trivial
            if not chi.is_primitive() or chi.order not in (2, 3, 6):
                continue
            _add_value(report, f"standard chi mod {m} order {chi.order}", standard_l_density(chi), assembled_standard_l_density(chi))
    for chi in characters_of_order(7, 3, primitive_only=True):
        _add_value(report, f"twisted r=m=7 {chi}", twisted_density(chi), assembled_twisted_density(chi, threads))
    for n in (5, 7, 15):
        expected, got = theta_residues(n), assembled_theta_residues(n)
        for name, e_vec, g_vec in (("s=1", expected[0], got[0]), ("s=5/6", expected[1], got[1])):
            _add_value(report, f"theta N={n} {name} +", e_vec.plus, g_vec.plus)
            _add_value(report, f"theta N={n} {name} -", e_vec.minus, g_vec.minus)
    return report.finish()


SUITES = ("ur1", "urmax", "urnm", "rm1", "rmnm", "rmmax", "corollaries", "gamma", "properties", "l_residues")


def verify_residue_tables(
    suite: str,
    primes: Optional[Sequence[int]] = None,
    rng: Optional[np.random.Generator] = None,
    threads: int = 1,
) -> List[VerificationReport]:
    """Run one density suite over its default (or given) primes."""
    rng = rng or np.random.default_rng(0)
    if suite not in SUITES:
        raise DomainError(f"unknown density suite {suite!r}; choose from {', '.join(SUITES)}")
    if suite == "gamma":
        return [verify_gamma(rng)]
    if suite == "l_residues":
        return [verify_l_residues(threads)]
    if primes is None:
        if suite.startswith("ur"):
            primes = config.primes_for_suite("unramified")
        elif suite in ("rm1",):
            primes = config.primes_for_suite("ramified")
        elif suite in ("rmnm", "rmmax"):
            primes = (3,) + config.primes_for_suite("ramified")
        else:
            primes = config.primes_for_suite("corollaries")
    runners = {
        "ur1": lambda p: verify_unramified_level_p(p, threads=threads),
        "urmax": lambda p: verify_unramified_maximal(p, threads=threads),
        "urnm": lambda p: verify_unramified_nonmaximal(p, threads=threads),
        "rm1": lambda p: verify_ramified_level_p(p, rng),
        "rmnm": verify_ramified_nonmaximal,
        "rmmax": verify_ramified_maximal,
        "corollaries": lambda p: verify_corollaries(p, threads),
        "properties": lambda p: verify_density_properties(p, rng, threads=threads),
    }
    reports = []
    for p in primes:
        logger.info(f"density suite {suite} at p = {p}")
        reports.append(runners[suite](p))
    return reports
