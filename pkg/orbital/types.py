"""Value types shared by the orbital modules: forms, dual forms, matrices and cubic rings."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Dict, Iterator, Optional, Tuple

from orbital.errors import DomainError, InvalidGroupElementError


def _reduce(value: int, modulus: Optional[int]) -> int:
    return int(value) if modulus is None else int(value) % modulus


def _check_modulus(modulus: Optional[int]) -> None:
    if modulus is not None and modulus < 1:
        raise DomainError(f"modulus must be >= 1 or None, got {modulus}")


@dataclass(frozen=True)
class Form:
    """Binary cubic form x1*u^3 + x2*u^2*v + x3*u*v^2 + x4*v^3.

    Attributes
    ----------
    x1, x2, x3, x4:
        Coefficients. Reduced into [0, N) when ``modulus`` is set.
    modulus:
        N for forms over Z/NZ, or None for integral forms.
    """

    x1: int
    x2: int
    x3: int
    x4: int
    modulus: Optional[int] = None

    def __post_init__(self) -> None:
        _check_modulus(self.modulus)
        for name in ("x1", "x2", "x3", "x4"):
            object.__setattr__(self, name, _reduce(getattr(self, name), self.modulus))

    @property
    def coeffs(self) -> Tuple[int, int, int, int]:
        return (self.x1, self.x2, self.x3, self.x4)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coeffs)

    @classmethod
    def of(cls, coeffs, modulus: Optional[int] = None) -> "Form":
        c = tuple(coeffs)
        if len(c) != 4:
            raise DomainError(f"a form needs 4 coefficients, got {len(c)}")
        return cls(c[0], c[1], c[2], c[3], modulus)

    def reduce(self, modulus: int) -> "Form":
        """Image in Z/modulus. Allowed when modulus divides the current modulus."""
        if self.modulus is not None and self.modulus % modulus:
            raise DomainError(f"cannot reduce mod {modulus} from mod {self.modulus}")
        return Form.of(self.coeffs, modulus)

    def lift(self) -> "Form":
        """Integral form with the canonical representatives in [0, N)."""
        return Form.of(self.coeffs, None)

    def scaled(self, t: int) -> "Form":
        return Form.of((t * c for c in self.coeffs), self.modulus)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def height(self) -> int:
        return max(abs(c) for c in self.coeffs)

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        return g if self.modulus is None else gcd(g, self.modulus)

    def value(self, u: int, v: int) -> int:
        """Evaluate x(u, v) in the coefficient ring."""
        x1, x2, x3, x4 = self.coeffs
        return _reduce(x1 * u ** 3 + x2 * u * u * v + x3 * u * v * v + x4 * v ** 3, self.modulus)

    def to_dict(self) -> Dict:
        return {"coeffs": list(self.coeffs), "modulus": self.modulus}

    @classmethod
    def from_dict(cls, data: Dict) -> "Form":
        return cls.of(data["coeffs"], data.get("modulus"))

    def __str__(self) -> str:
        suffix = "" if self.modulus is None else f" mod {self.modulus}"
        return f"({self.x1},{self.x2},{self.x3},{self.x4}){suffix}"


@dataclass(frozen=True)
class DualForm:
    """Element y = (y1, y2, y3, y4) of the dual space V*, paired with V coordinatewise.

    Same reduction rule as Form.
    """

    y1: int
    y2: int
    y3: int
    y4: int
    modulus: Optional[int] = None

    def __post_init__(self) -> None:
        _check_modulus(self.modulus)
        for name in ("y1", "y2", "y3", "y4"):
            object.__setattr__(self, name, _reduce(getattr(self, name), self.modulus))

    @property
    def coeffs(self) -> Tuple[int, int, int, int]:
        return (self.y1, self.y2, self.y3, self.y4)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coeffs)

    @classmethod
    def of(cls, coeffs, modulus: Optional[int] = None) -> "DualForm":
        c = tuple(coeffs)
        if len(c) != 4:
            raise DomainError(f"a dual form needs 4 coordinates, got {len(c)}")
        return cls(c[0], c[1], c[2], c[3], modulus)

    def reduce(self, modulus: int) -> "DualForm":
        if self.modulus is not None and self.modulus % modulus:
            raise DomainError(f"cannot reduce mod {modulus} from mod {self.modulus}")
        return DualForm.of(self.coeffs, modulus)

    def negated(self) -> "DualForm":
        return DualForm.of((-c for c in self.coeffs), self.modulus)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_dict(self) -> Dict:
        return {"coeffs": list(self.coeffs), "modulus": self.modulus}

    @classmethod
    def from_dict(cls, data: Dict) -> "DualForm":
        return cls.of(data["coeffs"], data.get("modulus"))


@dataclass(frozen=True)
class GroupElement:
    """2x2 matrix (alpha, beta; gamma, delta) over Z or Z/NZ.

    Attributes
    ----------
    alpha, beta, gamma, delta:
        Matrix entries, reduced into [0, N) in the modular case.
    modulus:
        N, or None for integer matrices.
    det:
        Cached determinant (reduced mod N). Must be a unit mod N. Over Z any
        nonzero determinant is accepted; the action then divides exactly or
        raises.
    """

    alpha: int
    beta: int
    gamma: int
    delta: int
    modulus: Optional[int] = None
    det: int = field(init=False, compare=False)

    def __post_init__(self) -> None:
        _check_modulus(self.modulus)
        for name in ("alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, _reduce(getattr(self, name), self.modulus))
        d = _reduce(self.alpha * self.delta - self.beta * self.gamma, self.modulus)
        if self.modulus is None:
            if d == 0:
                raise InvalidGroupElementError(f"singular integer matrix {self.entries}")
        elif gcd(d, self.modulus) != 1:
            raise InvalidGroupElementError(
                f"determinant {d} is not a unit mod {self.modulus} for {self.entries}"
            )
        object.__setattr__(self, "det", d)

    @property
    def entries(self) -> Tuple[int, int, int, int]:
        return (self.alpha, self.beta, self.gamma, self.delta)

    @classmethod
    def identity(cls, modulus: Optional[int] = None) -> "GroupElement":
        return cls(1, 0, 0, 1, modulus)

    @classmethod
    def scalar(cls, t: int, modulus: Optional[int] = None) -> "GroupElement":
        return cls(t, 0, 0, t, modulus)

    @property
    def is_unimodular(self) -> bool:
        """det = +-1 over Z; always true over Z/NZ."""
        return self.modulus is not None or self.det in (1, -1)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if self.modulus != other.modulus:
            raise DomainError("matrices over different rings")
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return GroupElement(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h, self.modulus)

    def adjugate(self) -> "GroupElement":
        """(det g) * g^-1 = (delta, -beta; -gamma, alpha)."""
        return GroupElement(self.delta, -self.beta, -self.gamma, self.alpha, self.modulus)

    def transpose(self) -> "GroupElement":
        return GroupElement(self.alpha, self.gamma, self.beta, self.delta, self.modulus)

    def inverse(self) -> "GroupElement":
        if self.modulus is None:
            if not self.is_unimodular:
                raise InvalidGroupElementError(f"{self.entries} is not invertible over Z")
            t = self.det
        else:
            t = pow(self.det, -1, self.modulus)
        d, mb, mc, a = self.adjugate().entries
        return GroupElement(t * d, t * mb, t * mc, t * a, self.modulus)

    def reduce(self, modulus: int) -> "GroupElement":
        return GroupElement(*self.entries, modulus=modulus)

    def to_dict(self) -> Dict:
        return {"entries": list(self.entries), "modulus": self.modulus}

    @classmethod
    def from_dict(cls, data: Dict) -> "GroupElement":
        return cls(*data["entries"], modulus=data.get("modulus"))


@dataclass(frozen=True)
class CubicRing:
    """Rank-3 ring Z*1 + Z*omega + Z*theta given by structure constants.

    Attributes
    ----------
    omega_sq:
        (c0, c1, c2) with omega^2 = c0 + c1*omega + c2*theta.
    theta_sq:
        (d0, d1, d2) with theta^2 = d0 + d1*omega + d2*theta.
    omega_theta:
        Integer n with omega*theta = n.
    source:
        Form the ring was built from, if any.
    """

    omega_sq: Tuple[int, int, int]
    theta_sq: Tuple[int, int, int]
    omega_theta: int
    source: Optional[Form] = None

    def __post_init__(self) -> None:
        if len(self.omega_sq) != 3 or len(self.theta_sq) != 3:
            raise ValueError("omega_sq and theta_sq need three structure constants each")

    @property
    def constants(self) -> Tuple[int, ...]:
        return tuple(self.omega_sq) + tuple(self.theta_sq) + (self.omega_theta,)

    def to_dict(self) -> Dict:
        return {
            "omega_sq": list(self.omega_sq),
            "theta_sq": list(self.theta_sq),
            "omega_theta": self.omega_theta,
            "source": self.source.to_dict() if self.source else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "CubicRing":
        source = data.get("source")
        return cls(
            omega_sq=tuple(data["omega_sq"]),
            theta_sq=tuple(data["theta_sq"]),
            omega_theta=data["omega_theta"],
            source=Form.from_dict(source) if source else None,
        )
