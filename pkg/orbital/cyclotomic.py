"""
Exact sums of roots of unity

A CyclotomicSum stores integer counts c_0..c_{M-1} and a positive
denominator D; its value is (sum_k c_k zeta_M^k) / D with
zeta_M = exp(2 pi i / M). Equality is decided by reducing modulo the M-th
cyclotomic polynomial, never by floating comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from orbital.errors import DomainError

_X = sympy.Symbol("x")


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


@dataclass(frozen=True)
class CyclotomicSum:
    """Element of Q(zeta_M) as an exponent-count vector.

    Attributes
    ----------
    modulus:
        M, the order of the root of unity the counts refer to.
    counts:
        c_0..c_{M-1}; arbitrary-precision integers.
    denominator:
        Positive integer dividing the whole sum.
    """

    modulus: int
    counts: Tuple[int, ...]
    denominator: int = 1

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise DomainError(f"CyclotomicSum modulus must be positive, got {self.modulus}")
        if len(self.counts) != self.modulus:
            raise DomainError(f"expected {self.modulus} counts, got {len(self.counts)}")
        if self.denominator < 1:
            raise DomainError("denominator must be positive")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def zero(cls, modulus: int = 1) -> "CyclotomicSum":
        return cls(modulus, (0,) * modulus)

    @classmethod
    def integer(cls, value: Union[int, Fraction], modulus: int = 1) -> "CyclotomicSum":
        value = Fraction(value)
        counts = [0] * modulus
        counts[0] = value.numerator
        return cls(modulus, tuple(counts), value.denominator)

    @classmethod
    def root(cls, k: int, modulus: int) -> "CyclotomicSum":
        counts = [0] * modulus
        counts[k % modulus] = 1
        return cls(modulus, tuple(counts))

    @classmethod
    def from_histogram(cls, hist: Sequence[int], denominator: int = 1) -> "CyclotomicSum":
        return cls(len(hist), tuple(int(c) for c in hist), denominator)

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------

    def lift(self, modulus: int) -> "CyclotomicSum":
        """Same value written over zeta_modulus (modulus a multiple of M)."""
        if modulus % self.modulus:
            raise DomainError(f"cannot lift from {self.modulus} to {modulus}")
        step = modulus // self.modulus
        counts = [0] * modulus
        for k, c in enumerate(self.counts):
            counts[k * step] = c
        return CyclotomicSum(modulus, tuple(counts), self.denominator)

    def _common(self, other: "CyclotomicSum") -> Tuple["CyclotomicSum", "CyclotomicSum"]:
        m = _lcm(self.modulus, other.modulus)
        return self.lift(m), other.lift(m)

    def __add__(self, other: Union["CyclotomicSum", int, Fraction]) -> "CyclotomicSum":
        if not isinstance(other, CyclotomicSum):
            other = CyclotomicSum.integer(other, self.modulus)
        a, b = self._common(other)
        den = _lcm(a.denominator, b.denominator)
        fa, fb = den // a.denominator, den // b.denominator
        counts = tuple(x * fa + y * fb for x, y in zip(a.counts, b.counts))
        return CyclotomicSum(a.modulus, counts, den).normalized()

    __radd__ = __add__

    def __neg__(self) -> "CyclotomicSum":
        return CyclotomicSum(self.modulus, tuple(-c for c in self.counts), self.denominator)

    def __sub__(self, other: Union["CyclotomicSum", int, Fraction]) -> "CyclotomicSum":
        if not isinstance(other, CyclotomicSum):
            other = CyclotomicSum.integer(other, self.modulus)
        return self + (-other)

    def __mul__(self, other: Union["CyclotomicSum", int, Fraction]) -> "CyclotomicSum":
        if not isinstance(other, CyclotomicSum):
            f = Fraction(other)
            return CyclotomicSum(
                self.modulus, tuple(c * f.numerator for c in self.counts), self.denominator * f.denominator
            ).normalized()
        a, b = self._common(other)
        m = a.modulus
        counts = [0] * m
        nz = [(k, c) for k, c in enumerate(b.counts) if c]
        for i, x in enumerate(a.counts):
            if x:
                for k, y in nz:
                    counts[(i + k) % m] += x * y
        return CyclotomicSum(m, tuple(counts), a.denominator * b.denominator).normalized()

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "CyclotomicSum":
        result = CyclotomicSum.integer(1, self.modulus)
        for _ in range(k):
            result = result * self
        return result

    def rotate(self, k: int) -> "CyclotomicSum":
        """Multiply by zeta_M^k."""
        m = self.modulus
        counts = [0] * m
        for i, c in enumerate(self.counts):
            counts[(i + k) % m] = c
        return CyclotomicSum(m, tuple(counts), self.denominator)

    def conjugate(self) -> "CyclotomicSum":
        m = self.modulus
        counts = [0] * m
        for i, c in enumerate(self.counts):
            counts[(-i) % m] = c
        return CyclotomicSum(m, tuple(counts), self.denominator)

    def normalized(self) -> "CyclotomicSum":
        g = self.denominator
        for c in self.counts:
            g = gcd(g, c)
            if g == 1:
                return self
        if g <= 1:
            return self
        return CyclotomicSum(self.modulus, tuple(c // g for c in self.counts), self.denominator // g)

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    @cached_property
    def reduced(self) -> Tuple[Fraction, ...]:
        """Coefficients of the representative of degree < phi(M), constant term first."""
        if self.modulus == 1:
            return (Fraction(sum(self.counts), self.denominator),)
        poly = sympy.Poly(list(reversed(self.counts)), _X)
        rem = poly.rem(sympy.cyclotomic_poly(self.modulus, _X, polys=True))
        coeffs = [Fraction(int(c)) for c in reversed(rem.all_coeffs())]
        return tuple(c / self.denominator for c in coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.reduced[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise DomainError("cyclotomic sum is not rational")
        return self.reduced[0]

    def equals(self, other: Union["CyclotomicSum", int, Fraction]) -> bool:
        """Exact equality in Q(zeta)."""
        diff = self - other
        return all(c == 0 for c in diff.reduced)

    @cached_property
    def value(self) -> complex:
        m = self.modulus
        arr = np.asarray(self.counts, dtype=float)
        roots = np.exp(2j * np.pi * np.arange(m) / m)
        return complex(arr @ roots) / self.denominator

    def __complex__(self) -> complex:
        return self.value

    def to_dict(self) -> Dict:
        nz = {str(k): c for k, c in enumerate(self.counts) if c}
        return {"modulus": self.modulus, "counts": nz, "denominator": self.denominator}

    @classmethod
    def from_dict(cls, data: Dict) -> "CyclotomicSum":
        counts = [0] * data["modulus"]
        for k, c in data["counts"].items():
            counts[int(k)] = c
        return cls(data["modulus"], tuple(counts), data.get("denominator", 1))

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.rational_value())
        v = self.value
        return f"{v.real:.12g}{v.imag:+.12g}i"


def sum_all(values: Iterable[CyclotomicSum]) -> CyclotomicSum:
    total: Optional[CyclotomicSum] = None
    for v in values:
        total = v if total is None else total + v
    return total if total is not None else CyclotomicSum.zero()
