"""
Arithmetic of Z/NZ and its characters

Key pieces:
- RootOfUnity: exact exp(2 pi i k / d)
- DirichletCharacter: generator-exponent representation on each cyclic
  factor of (Z/p^c)^x, with order, conductor, primitive core, prime
  components and induction
- all_characters / characters_of_order
- gauss_sum (exact CyclotomicSum), jacobi_sum
- PadicUnitClass and lift_chi_p for the p-adic character lift
- crt_split / crt_combine for forms mod N
"""

from __future__ import annotations

import cmath
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy.ntheory.modular import crt

from orbital.cyclotomic import CyclotomicSum
from orbital.errors import CRTError, DomainError
from orbital.types import Form

logger = logging.getLogger(__name__)


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def mobius(n: int) -> int:
    factors = sympy.factorint(n)
    if any(e > 1 for e in factors.values()):
        return 0
    return -1 if len(factors) % 2 else 1


def euler_phi(n: int) -> int:
    return int(sympy.totient(n))


def p_valuation(n: int, p: int) -> int:
    if n == 0:
        raise DomainError("valuation of 0")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


# =============================================================================
# Roots of unity
# =============================================================================

@dataclass(frozen=True, eq=False)
class RootOfUnity:
    """exp(2 pi i k / order) with 0 <= k < order."""

    order: int
    k: int = 0

    def __post_init__(self) -> None:
        if self.order < 1:
            raise DomainError(f"root of unity order must be positive, got {self.order}")
        object.__setattr__(self, "k", self.k % self.order)

    @classmethod
    def from_fraction(cls, f: Fraction) -> "RootOfUnity":
        f = f - (f.numerator // f.denominator)
        return cls(f.denominator, f.numerator)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.k, self.order)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RootOfUnity) and self.fraction == other.fraction

    def __hash__(self) -> int:
        return hash(self.fraction)

    def __mul__(self, other: "RootOfUnity") -> "RootOfUnity":
        return RootOfUnity.from_fraction(self.fraction + other.fraction)

    def __pow__(self, n: int) -> "RootOfUnity":
        return RootOfUnity.from_fraction(self.fraction * n)

    def inverse(self) -> "RootOfUnity":
        return RootOfUnity.from_fraction(-self.fraction)

    def is_one(self) -> bool:
        return self.k == 0

    def to_complex(self) -> complex:
        return cmath.exp(2j * cmath.pi * self.k / self.order)

    def __complex__(self) -> complex:
        return self.to_complex()

    def to_dict(self) -> Dict:
        f = self.fraction
        return {"order": f.denominator, "k": f.numerator}


ONE = RootOfUnity(1, 0)


# =============================================================================
# Unit groups
# =============================================================================

@lru_cache(maxsize=None)
def unit_generators(p: int, c: int) -> Tuple[Tuple[int, int], ...]:
    """(generator, order) for each cyclic factor of (Z/p^c)^x.

    Odd p uses the least primitive root mod p^2, which generates every level;
    2^c uses -1 and 5.
    """
    q = p ** c
    if p == 2:
        if c == 1:
            return ()
        if c == 2:
            return ((3, 2),)
        return ((q - 1, 2), (5, 2 ** (c - 2)))
    g = int(sympy.primitive_root(p * p)) % q
    return ((g, (p - 1) * p ** (c - 1)),)


@lru_cache(maxsize=None)
def discrete_log_table(p: int, c: int) -> Dict[int, Tuple[int, ...]]:
    """Residue mod p^c -> exponent vector over unit_generators(p, c)."""
    q = p ** c
    gens = unit_generators(p, c)
    table: Dict[int, Tuple[int, ...]] = {}
    for logs in itertools.product(*(range(o) for _, o in gens)):
        t = 1
        for (g, _), l in zip(gens, logs):
            t = t * pow(g, l, q) % q
        table[t] = tuple(logs)
    if not gens:
        table[1 % q] = ()
    return table


# =============================================================================
# Dirichlet characters
# =============================================================================

@dataclass(frozen=True)
class CharacterComponent:
    """Character of (Z/p^c)^x given by exponents on the unit generators.

    chi(g_j) = exp(2 pi i exponents[j] / orders[j]).
    """

    p: int
    c: int
    exponents: Tuple[int, ...]

    def __post_init__(self) -> None:
        orders = self.orders
        if len(orders) != len(self.exponents):
            raise DomainError(f"component mod {self.p}^{self.c} needs {len(orders)} exponents")
        object.__setattr__(self, "exponents", tuple(int(k) % o for k, o in zip(self.exponents, orders)))

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(o for _, o in unit_generators(self.p, self.c))

    @property
    def modulus(self) -> int:
        return self.p ** self.c

    @property
    def order(self) -> int:
        result = 1
        for k, o in zip(self.exponents, self.orders):
            result = _lcm(result, o // gcd(k, o))
        return result

    def exponent(self, t: int) -> Fraction:
        logs = discrete_log_table(self.p, self.c)[t % self.modulus]
        return sum((Fraction(k * l, o) for k, l, o in zip(self.exponents, logs, self.orders)), Fraction(0))

    @property
    def conductor_exponent(self) -> int:
        if not any(self.exponents):
            return 0
        if self.p != 2:
            k = self.exponents[0]
            return self.c - min(p_valuation(k, self.p), self.c - 1)
        if self.c == 2:
            return 2
        ka, kb = self.exponents
        if kb == 0:
            return 2
        return self.c - p_valuation(kb, 2)

    def restrict_to(self, f: int) -> Optional["CharacterComponent"]:
        """The same character read mod p^f (f at least the conductor exponent)."""
        if f == 0:
            return None
        if self.p != 2:
            return CharacterComponent(self.p, f, (self.exponents[0] // self.p ** (self.c - f),))
        if f == 1:
            return CharacterComponent(2, 1, ())
        if f == 2:
            return CharacterComponent(2, 2, (self.exponents[0] if self.exponents else 0,))
        ka, kb = self.exponents
        return CharacterComponent(2, f, (ka, kb // 2 ** (self.c - f)))

    def extend_to(self, c: int) -> "CharacterComponent":
        """The same character read mod p^c for c >= self.c."""
        if c == self.c:
            return self
        if self.p != 2:
            k = self.exponents[0] if self.exponents else 0
            return CharacterComponent(self.p, c, (k * self.p ** (c - self.c),))
        if c == 2:
            return CharacterComponent(2, 2, (0,))
        ka = self.exponents[0] if self.c >= 2 else 0
        kb = self.exponents[1] * 2 ** (c - self.c) if self.c >= 3 else 0
        return CharacterComponent(2, c, (ka, kb))


@dataclass(frozen=True)
class DirichletCharacter:
    """Character of (Z/mZ)^x as a product of prime-power components.

    Attributes
    ----------
    modulus:
        m >= 1.
    components:
        One CharacterComponent per prime power exactly dividing m, sorted by prime.
    """

    modulus: int
    components: Tuple[CharacterComponent, ...] = ()

    def __post_init__(self) -> None:
        expected = sorted(sympy.factorint(self.modulus).items())
        got = sorted((comp.p, comp.c) for comp in self.components)
        if [tuple(e) for e in expected] != got:
            raise DomainError(f"components {got} do not factor modulus {self.modulus}")
        object.__setattr__(self, "components", tuple(sorted(self.components, key=lambda comp: comp.p)))

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def trivial(cls, modulus: int = 1) -> "DirichletCharacter":
        comps = [
            CharacterComponent(p, c, (0,) * len(unit_generators(p, c)))
            for p, c in sorted(sympy.factorint(modulus).items())
        ]
        return cls(modulus, tuple(comps))

    # ------------------------------------------------------------------
    # values
    # ------------------------------------------------------------------

    def exponent(self, t: int) -> Optional[Fraction]:
        """chi(t) = exp(2 pi i * exponent); None when gcd(t, m) > 1."""
        if gcd(t, self.modulus) != 1:
            return None
        total = Fraction(0)
        for comp in self.components:
            total += comp.exponent(t)
        return total - (total.numerator // total.denominator)

    def value(self, t: int) -> Optional[RootOfUnity]:
        e = self.exponent(t)
        return None if e is None else RootOfUnity.from_fraction(e)

    def __call__(self, t: int) -> complex:
        v = self.value(t)
        return 0j if v is None else v.to_complex()

    @property
    def order(self) -> int:
        result = 1
        for comp in self.components:
            result = _lcm(result, comp.order)
        return result

    @property
    def conductor(self) -> int:
        result = 1
        for comp in self.components:
            result *= comp.p ** comp.conductor_exponent
        return result

    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def is_trivial(self) -> bool:
        return self.order == 1

    def exponent_table(self) -> np.ndarray:
        """e[t] with chi(t) = zeta_order^e[t]; -1 marks non-units."""
        m, o = self.modulus, self.order
        table = np.full(m, -1, dtype=np.int64)
        for t in range(m):
            e = self.exponent(t)
            if e is not None:
                table[t] = int(e * o)
        return table

    # ------------------------------------------------------------------
    # structure
    # ------------------------------------------------------------------

    def primitive(self) -> "DirichletCharacter":
        """Primitive character inducing this one."""
        comps = []
        for comp in self.components:
            restricted = comp.restrict_to(comp.conductor_exponent)
            if restricted is not None:
                comps.append(restricted)
        return DirichletCharacter(self.conductor, tuple(comps))

    def induce(self, modulus: int) -> "DirichletCharacter":
        """The character mod a multiple of m with the same values on units."""
        if modulus % self.modulus:
            raise DomainError(f"{modulus} is not a multiple of {self.modulus}")
        mine = {comp.p: comp for comp in self.components}
        comps = []
        for p, c in sorted(sympy.factorint(modulus).items()):
            if p in mine:
                comps.append(mine[p].extend_to(c))
            else:
                comps.append(CharacterComponent(p, c, (0,) * len(unit_generators(p, c))))
        return DirichletCharacter(modulus, tuple(comps))

    def component(self, p: int) -> "DirichletCharacter":
        """chi_p as a character mod p^c (trivial mod 1 when p does not divide m)."""
        for comp in self.components:
            if comp.p == p:
                return DirichletCharacter(comp.modulus, (comp,))
        return DirichletCharacter.trivial(1)

    def prime_to(self, p: int) -> "DirichletCharacter":
        """chi'_p, the product of the components at primes other than p."""
        comps = tuple(comp for comp in self.components if comp.p != p)
        m = 1
        for comp in comps:
            m *= comp.modulus
        return DirichletCharacter(m, comps)

    def _aligned(self, other: "DirichletCharacter") -> Tuple["DirichletCharacter", "DirichletCharacter"]:
        m = _lcm(self.modulus, other.modulus)
        return self.induce(m), other.induce(m)

    def __mul__(self, other: "DirichletCharacter") -> "DirichletCharacter":
        a, b = self._aligned(other)
        comps = tuple(
            CharacterComponent(x.p, x.c, tuple(k + l for k, l in zip(x.exponents, y.exponents)))
            for x, y in zip(a.components, b.components)
        )
        return DirichletCharacter(a.modulus, comps)

    def __pow__(self, n: int) -> "DirichletCharacter":
        comps = tuple(CharacterComponent(c.p, c.c, tuple(k * n for k in c.exponents)) for c in self.components)
        return DirichletCharacter(self.modulus, comps)

    def inverse(self) -> "DirichletCharacter":
        return self ** -1

    def to_dict(self) -> Dict:
        return {
            "modulus": self.modulus,
            "components": [{"p": c.p, "c": c.c, "exponents": list(c.exponents)} for c in self.components],
            "order": self.order,
            "conductor": self.conductor,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "DirichletCharacter":
        comps = tuple(CharacterComponent(c["p"], c["c"], tuple(c["exponents"])) for c in data["components"])
        return cls(data["modulus"], comps)

    def __str__(self) -> str:
        exps = ",".join(f"{c.p}^{c.c}:{list(c.exponents)}" for c in self.components)
        return f"chi mod {self.modulus} [{exps}] (order {self.order}, conductor {self.conductor})"


def all_characters(m: int) -> List[DirichletCharacter]:
    """All phi(m) characters mod m in a deterministic order."""
    factors = sorted(sympy.factorint(m).items())
    per_prime = []
    for p, c in factors:
        orders = [o for _, o in unit_generators(p, c)]
        per_prime.append([CharacterComponent(p, c, exps) for exps in itertools.product(*(range(o) for o in orders))])
    return [DirichletCharacter(m, tuple(combo)) for combo in itertools.product(*per_prime)]


def characters_of_order(m: int, order: int, primitive_only: bool = False) -> List[DirichletCharacter]:
    return [
        chi for chi in all_characters(m)
        if chi.order == order and (not primitive_only or chi.is_primitive())
    ]


# =============================================================================
# Gauss and Jacobi sums
# =============================================================================

def gauss_sum(chi: DirichletCharacter) -> CyclotomicSum:
    """tau(chi) = sum over units t of chi(t) exp(2 pi i t / m), exactly."""
    m, o = chi.modulus, chi.order
    big = _lcm(m, o)
    counts = [0] * big
    table = chi.exponent_table()
    for t in range(m):
        if table[t] >= 0:
            counts[(t * (big // m) + int(table[t]) * (big // o)) % big] += 1
    return CyclotomicSum(big, tuple(counts))


def jacobi_sum(chi: DirichletCharacter) -> complex:
    """J(chi, chi) = tau(chi)^2 / tau(chi^2) for chi primitive mod a prime."""
    if not sympy.isprime(chi.modulus) or not chi.is_primitive():
        raise DomainError(f"jacobi_sum needs a primitive character mod a prime, got {chi}")
    square = chi ** 2
    if square.is_trivial():
        raise DomainError("jacobi_sum needs chi^2 nontrivial")
    return gauss_sum(chi).value ** 2 / gauss_sum(square).value


def jacobi_sum_direct(chi: DirichletCharacter) -> complex:
    """sum_{t != 0, 1} chi(t) chi(1 - t)."""
    p = chi.modulus
    return sum(chi(t) * chi(1 - t) for t in range(2, p))


# =============================================================================
# p-adic lift of characters
# =============================================================================

@dataclass(frozen=True)
class PadicUnitClass:
    """t = p^valuation * u in Q_p^x, with u known mod p^precision.

    Attributes
    ----------
    p:
        The prime.
    valuation:
        ord_p(t).
    unit:
        Residue of u mod p^precision, prime to p.
    precision:
        Number of p-adic digits of u that are known.
    """

    p: int
    valuation: int
    unit: int
    precision: int = 1

    def __post_init__(self) -> None:
        if self.precision < 0:
            raise DomainError("precision must be nonnegative")
        q = self.p ** self.precision
        object.__setattr__(self, "unit", self.unit % q if q > 1 else 0)
        if q > 1 and self.unit % self.p == 0:
            raise DomainError(f"unit part {self.unit} is divisible by {self.p}")

    @classmethod
    def from_integer(cls, t: int, p: int, precision: int = 1) -> "PadicUnitClass":
        if t == 0:
            raise DomainError("0 has no unit class")
        k = p_valuation(t, p)
        return cls(p, k, t // p ** k, precision)


def lift_chi_p(chi: DirichletCharacter, p: int, t: PadicUnitClass) -> RootOfUnity:
    """chi~_p(t) = chi_p(unit part) * (chi'_p(p)^-1)^valuation for primitive chi."""
    prim = chi.primitive()
    local = prim.component(p)
    c = p_valuation(local.modulus, p) if local.modulus > 1 else 0
    if c > t.precision:
        raise DomainError(f"unit known mod {p}^{t.precision}, conductor needs {p}^{c}")
    unit_part = local.value(t.unit) if c else ONE
    if t.valuation == 0:
        return unit_part
    at_p = prim.prime_to(p).value(p)
    return unit_part * at_p.inverse() ** t.valuation


# =============================================================================
# Chinese remainder theorem on forms
# =============================================================================

def _check_coprime(moduli: Sequence[int]) -> None:
    for a, b in itertools.combinations(moduli, 2):
        if gcd(a, b) != 1:
            raise CRTError(f"moduli {a} and {b} are not coprime")


def crt_split(a: Form, moduli: Sequence[int]) -> List[Form]:
    """Components of a form mod N = prod(moduli)."""
    _check_coprime(moduli)
    n = 1
    for m in moduli:
        n *= m
    if a.modulus != n:
        raise CRTError(f"form is mod {a.modulus}, factors multiply to {n}")
    return [a.reduce(m) for m in moduli]


def crt_combine(parts: Sequence[Form]) -> Form:
    """Inverse of crt_split."""
    moduli = [part.modulus for part in parts]
    if any(m is None for m in moduli):
        raise CRTError("crt_combine needs modular forms")
    _check_coprime(moduli)
    coeffs = []
    for i in range(4):
        value, n = crt(moduli, [part.coeffs[i] for part in parts])
        coeffs.append(int(value))
    n = 1
    for m in moduli:
        n *= m
    return Form.of(coeffs, n)
