"""
Orbital Gauss sums and finite Fourier transforms

Key functions:
- orbital_gauss_sums: exact W(chi, a, b) for many b from one scan of G_N
- FiniteFunction: exact functions on V_N / V*_N, including f_{chi,a},
  f_N, Phi_p and Phi'_p
- fourier_value / fourier_transform / fourier_inverse: exact transforms;
  fourier_transform_numeric is the dense FFT cross-check
- verify_mori_table / verify_singular_table / verify_phi_transforms /
  verify_divisible_fourier / check_identities: report-producing drivers

Gauss sums are exponent histograms: a scan over G_N counts, for every b,
how many g give [ga, b] = k mod N and chi(det g) = zeta^e, and the
histogram becomes a CyclotomicSum over zeta_lcm(N, ord chi).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from orbital import config
from orbital.cyclotomic import CyclotomicSum, sum_all
from orbital.errors import ContractViolationError, DomainError, ResourceCapError, UnsupportedRingError
from orbital.forms_core import (
    act,
    act_dual,
    act_many,
    decode_forms,
    disc_many,
    dual_disc,
    encode_forms,
    forms_slice,
    iota_inverse,
)
from orbital.linear_groups import group_order, random_element, random_form, random_dual_form, scan_group
from orbital.orbit_atlas import (
    LEVEL_P,
    NONMAXIMAL,
    NONMAXIMAL_OR_TOTALLY_RAMIFIED,
    NONSINGULAR,
    SINGULAR_P2,
    TypeSymbol,
    orbit_codes,
    orbit_decomposition,
    orbit_split,
    representative_mod_p,
    representative_mod_p2,
    split_representatives,
    stabilizer_order,
    type_codes_mod_p,
    type_codes_mod_p2,
)
from orbital.residue_rings import DirichletCharacter, RootOfUnity
from orbital.types import DualForm, Form
from utils.report import VerificationReport

logger = logging.getLogger(__name__)

Point = Union[Form, DualForm]


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _root(r: RootOfUnity) -> CyclotomicSum:
    return CyclotomicSum.root(r.k, r.order)


def _character_table(chi: DirichletCharacter, n: int) -> Tuple[np.ndarray, int]:
    if n % chi.modulus:
        raise DomainError(f"character mod {chi.modulus} does not live on Z/{n}")
    chi_n = chi if chi.modulus == n else chi.induce(n)
    return chi_n.exponent_table(), chi_n.order


# =============================================================================
# Orbital Gauss sums
# =============================================================================

def orbital_gauss_sums(
    chi: DirichletCharacter,
    a: Form,
    bs: Sequence[DualForm],
    threads: int = 1,
) -> List[CyclotomicSum]:
    """W(chi, a, b) = sum_g chi(det g) exp(2 pi i [ga, b] / N) for every b in ``bs``."""
    n = a.modulus
    if n is None or any(b.modulus != n for b in bs):
        raise DomainError("orbital Gauss sums need a and every b mod the same N")
    table, order = _character_table(chi, n)
    big = _lcm(n, order)
    step_pair, step_chi = big // n, big // order
    bmat = np.array([b.coeffs for b in bs], dtype=np.int64).reshape(-1, 4)
    nb = len(bmat)
    offsets = np.arange(nb, dtype=np.int64) * big

    def worker(chunk):
        images = act_many(chunk.alpha, chunk.beta, chunk.gamma, chunk.delta, chunk.det_inv, a.coeffs, n)
        pairs = images @ bmat.T % n
        idx = (pairs * step_pair + (table[chunk.det] * step_chi)[:, None]) % big + offsets
        return np.bincount(idx.ravel(), minlength=nb * big).reshape(nb, big)

    total = sum(scan_group(n, worker, threads, description=f"W(chi, {a}, {nb} b)"))
    return [CyclotomicSum(big, tuple(row)) for row in np.asarray(total).tolist()]


def orbital_gauss_sum(chi: DirichletCharacter, a: Form, b: DualForm, threads: int = 1) -> CyclotomicSum:
    """Single orbital Gauss sum W(chi, a, b)."""
    return orbital_gauss_sums(chi, a, [b], threads)[0]


def character_trivial_on_stabilizer(chi: DirichletCharacter, a: Form, threads: int = 1) -> bool:
    """Whether chi o det is trivial on G_{N,a}."""
    _, elements = stabilizer_order(a, threads, with_elements=True)
    chi_n = chi if chi.modulus == a.modulus else chi.induce(a.modulus)
    return all(chi_n.value(g.det).is_one() for g in elements)


# =============================================================================
# Finite functions
# =============================================================================

@dataclass(frozen=True, eq=False)
class FiniteFunction:
    """Exact function on V_N (or V*_N when ``dual``).

    The value at support[i] is sum_k counts[i, k] zeta_M^k / denominator with
    M = root_order; points outside the support map to 0.

    Attributes:
        modulus: N
        support: Sorted flat codes (x1 + N x2 + N^2 x3 + N^3 x4)
        counts: (len(support), M) int64 array
        root_order: M
        denominator: Common positive denominator
        dual: True for functions on V*_N
    """
    modulus: int
    support: np.ndarray
    counts: np.ndarray
    root_order: int = 1
    denominator: int = 1
    dual: bool = False

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64).reshape(len(self.support), self.root_order)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "support", np.asarray(self.support, dtype=np.int64))
        if len(self.support) > 1 and (np.diff(self.support) <= 0).any():
            raise DomainError("FiniteFunction support must be strictly increasing")
        if self.denominator < 1:
            raise DomainError("denominator must be positive")

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def from_values(
        cls,
        modulus: int,
        codes: Sequence[int],
        values: Sequence[Union[int, Fraction]],
        dual: bool = False,
    ) -> "FiniteFunction":
        """Rational-valued function from (code, value) pairs; duplicate codes add."""
        fracs = [Fraction(v) for v in values]
        den = 1
        for f in fracs:
            den = _lcm(den, f.denominator)
        codes = np.asarray(codes, dtype=np.int64)
        nums = np.array([int(f * den) for f in fracs], dtype=np.int64)
        support, inverse = np.unique(codes, return_inverse=True)
        summed = np.zeros(len(support), dtype=np.int64)
        np.add.at(summed, inverse, nums)
        keep = summed != 0
        return cls(modulus, support[keep], summed[keep].reshape(-1, 1), 1, den, dual)

    @classmethod
    def indicator(cls, modulus: int, codes: np.ndarray, dual: bool = False) -> "FiniteFunction":
        support = np.unique(np.asarray(codes, dtype=np.int64))
        return cls(modulus, support, np.ones((len(support), 1), dtype=np.int64), 1, 1, dual)

    @classmethod
    def from_points(cls, points: Sequence[Point], values: Sequence[Union[int, Fraction]]) -> "FiniteFunction":
        n = points[0].modulus
        dual = isinstance(points[0], DualForm)
        codes = encode_forms(np.array([pt.coeffs for pt in points], dtype=np.int64), n)
        return cls.from_values(n, codes, values, dual)

    @classmethod
    def orbit_function(cls, chi: DirichletCharacter, a: Form, threads: int = 1) -> "FiniteFunction":
        """f_{chi,a}(ga) = |G_{N,a}| chi(det g), accumulated as sum over {g : ga = a'}."""
        n = a.modulus
        table, order = _character_table(chi, n)

        def worker(chunk):
            images = act_many(chunk.alpha, chunk.beta, chunk.gamma, chunk.delta, chunk.det_inv, a.coeffs, n)
            keys = encode_forms(images, n) * order + table[chunk.det]
            return np.unique(keys, return_counts=True)

        parts = scan_group(n, worker, threads, description=f"f_chi,a for {a}")
        keys = np.concatenate([k for k, _ in parts])
        weights = np.concatenate([c for _, c in parts])
        uniq, inverse = np.unique(keys, return_inverse=True)
        totals = np.bincount(inverse, weights=weights).astype(np.int64)
        support, row = np.unique(uniq // order, return_inverse=True)
        counts = np.zeros((len(support), order), dtype=np.int64)
        counts[row, uniq % order] = totals
        return cls(n, support, counts, order, 1)

    # ------------------------------------------------------------------
    # access
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.support)

    def _code(self, x: Union[Point, int]) -> int:
        if isinstance(x, (Form, DualForm)):
            if x.modulus != self.modulus:
                raise DomainError(f"point mod {x.modulus} for a function mod {self.modulus}")
            return int(encode_forms(np.array([x.coeffs]), self.modulus)[0])
        return int(x)

    def value(self, x: Union[Point, int]) -> CyclotomicSum:
        code = self._code(x)
        i = int(np.searchsorted(self.support, code))
        if i == len(self.support) or self.support[i] != code:
            return CyclotomicSum.zero(self.root_order)
        return CyclotomicSum(self.root_order, tuple(self.counts[i].tolist()), self.denominator).normalized()

    def __call__(self, x: Union[Point, int]) -> CyclotomicSum:
        return self.value(x)

    def points(self) -> np.ndarray:
        return decode_forms(self.support, self.modulus)

    def complex_values(self) -> np.ndarray:
        roots = np.exp(2j * np.pi * np.arange(self.root_order) / self.root_order)
        return (self.counts @ roots) / self.denominator

    def dense(self) -> np.ndarray:
        """All N^4 values as a complex array indexed by flat code."""
        n4 = self.modulus ** 4
        if n4 > config.MAX_DENSE_FOURIER:
            raise ResourceCapError(f"dense function on V_{self.modulus}", size=n4, cap=config.MAX_DENSE_FOURIER)
        out = np.zeros(n4, dtype=complex)
        out[self.support] = self.complex_values()
        return out

    def total(self) -> CyclotomicSum:
        col = self.counts.sum(axis=0)
        return CyclotomicSum(self.root_order, tuple(col.tolist()), self.denominator).normalized()

    def sum_of_squares(self) -> Fraction:
        """sum_a |f(a)|^2 for rational-valued f."""
        if self.root_order != 1:
            raise DomainError("sum_of_squares needs a rational-valued function")
        nums = self.counts[:, 0]
        return Fraction(int((nums.astype(object) ** 2).sum()), self.denominator ** 2)

    # ------------------------------------------------------------------
    # operations
    # ------------------------------------------------------------------

    def scaled_argument(self, t: int) -> "FiniteFunction":
        """f_t(a) = f(t a) for a unit t mod N."""
        n = self.modulus
        t_inv = pow(t, -1, n)
        moved = encode_forms(self.points() * t_inv % n, n)
        order = np.argsort(moved)
        return FiniteFunction(n, moved[order], self.counts[order], self.root_order, self.denominator, self.dual)

    def tensor(self, other: "FiniteFunction") -> "FiniteFunction":
        """(f x g)(a) = f(a mod N1) g(a mod N2) on V_{N1 N2}."""
        n1, n2 = self.modulus, other.modulus
        if gcd(n1, n2) != 1 or self.dual != other.dual:
            raise DomainError("tensor needs coprime moduli on the same side")
        n = n1 * n2
        e1 = n2 * pow(n2, -1, n1)
        e2 = n1 * pow(n1, -1, n2)
        p1, p2 = self.points(), other.points()
        coeffs = (p1[:, None, :] * e1 + p2[None, :, :] * e2) % n
        codes = encode_forms(coeffs.reshape(-1, 4), n)
        m = _lcm(self.root_order, other.root_order)
        c1 = _lift_counts(self.counts, self.root_order, m)
        c2 = _lift_counts(other.counts, other.root_order, m)
        counts = np.zeros((len(p1), len(p2), m), dtype=np.int64)
        for k in range(m):
            counts += c1[:, None, k, None] * np.roll(c2, k, axis=1)[None, :, :]
        order = np.argsort(codes)
        return FiniteFunction(
            n, codes[order], counts.reshape(-1, m)[order], m, self.denominator * other.denominator, self.dual
        )

    def check_relative_invariance(
        self, chi: DirichletCharacter, rng: np.random.Generator, samples: int = 50
    ) -> None:
        """Sample f(ga) = chi(det g) f(a); raise ContractViolationError with a witness on failure."""
        n = self.modulus
        chi_n = chi if chi.modulus == n else chi.induce(n)
        pts = self.points()
        for _ in range(samples):
            g = random_element(n, rng)
            if len(pts) and rng.random() < 0.5:
                a = Form.of(pts[int(rng.integers(len(pts)))].tolist(), n)
            else:
                a = random_form(n, rng)
            lhs = self.value(act(g, a))
            rhs = self.value(a) * _root(chi_n.value(g.det))
            if not lhs.equals(rhs):
                raise ContractViolationError(f"f(g a) != chi(det g) f(a) mod {n}", witness=(g, a))


def _lift_counts(counts: np.ndarray, m: int, big: int) -> np.ndarray:
    out = np.zeros((counts.shape[0], big), dtype=np.int64)
    out[:, np.arange(m) * (big // m)] = counts
    return out


def divisible_indicator(n: int) -> FiniteFunction:
    """f_N: indicator of P(a) = 0 mod N."""
    parts = []
    for x1 in range(n):
        forms = forms_slice(n, x1)
        parts.append(encode_forms(forms[disc_many(forms, n) == 0], n))
    return FiniteFunction.indicator(n, np.concatenate(parts))


def _type_indicator(p: int, symbols: frozenset) -> FiniteFunction:
    n = p * p
    codes = np.array([s.code for s in symbols])
    parts = []
    for x1 in range(n):
        forms = forms_slice(n, x1)
        types = type_codes_mod_p2(forms, p)
        parts.append(encode_forms(forms[np.isin(types, codes)], n))
    return FiniteFunction.indicator(n, np.concatenate(parts))


def phi(p: int) -> FiniteFunction:
    """Phi_p: indicator of V^nm_{p^2}."""
    return _type_indicator(p, NONMAXIMAL)


def phi_prime(p: int) -> FiniteFunction:
    """Phi'_p: Phi_p together with 1^3_max."""
    return _type_indicator(p, NONMAXIMAL_OR_TOTALLY_RAMIFIED)


# =============================================================================
# Fourier transforms
# =============================================================================

def _transform_rows(f: FiniteFunction, targets: np.ndarray, sign: int) -> Tuple[np.ndarray, int]:
    """Integer histograms of sum_a f(a) zeta_N^(sign [a, t]) for every target row."""
    n, m = f.modulus, f.root_order
    big = _lcm(n, m)
    src = f.points()
    k = len(targets)
    out = np.zeros((k, big), dtype=np.int64)
    if not len(src) or not k:
        return out, big
    block = max(1, config.FOURIER_BLOCK_PAIRS // len(src))
    for start in range(0, k, block):
        rows = targets[start:start + block]
        pairs = (rows @ src.T) % n
        offsets = (np.arange(len(rows), dtype=np.int64) * big)[:, None]
        acc = np.zeros(len(rows) * big)
        for e in range(m):
            w = f.counts[:, e]
            nz = np.flatnonzero(w)
            if not len(nz):
                continue
            idx = (sign * pairs[:, nz] * (big // n) + e * (big // m)) % big + offsets
            # float64 accumulation of integers is exact below 2**53
            acc += np.bincount(idx.ravel(), weights=np.broadcast_to(w[nz], idx.shape).ravel(), minlength=len(rows) * big)
        out[start:start + len(rows)] = np.rint(acc).astype(np.int64).reshape(len(rows), big)
    return out, big


def fourier_values(f: FiniteFunction, bs: Sequence[Point]) -> List[CyclotomicSum]:
    """Exact f^(b) = N^-4 sum_a f(a) <a, b> for each b."""
    n = f.modulus
    targets = np.array([b.coeffs for b in bs], dtype=np.int64).reshape(-1, 4)
    rows, big = _transform_rows(f, targets, 1)
    den = f.denominator * n ** 4
    return [CyclotomicSum(big, tuple(r), den).normalized() for r in rows.tolist()]


def fourier_value(f: FiniteFunction, b: Point) -> CyclotomicSum:
    return fourier_values(f, [b])[0]


def _all_targets(n: int) -> np.ndarray:
    return decode_forms(np.arange(n ** 4, dtype=np.int64), n)


def _check_work(f: FiniteFunction) -> None:
    work = f.modulus ** 4 * max(1, len(f))
    if work > config.MAX_FOURIER_WORK:
        raise ResourceCapError(f"exact transform on V_{f.modulus}", size=work, cap=config.MAX_FOURIER_WORK)


def fourier_transform(f: FiniteFunction) -> FiniteFunction:
    """Exact f^ on the whole dual space."""
    _check_work(f)
    n = f.modulus
    logger.info(f"exact transform on V_{n} from {len(f)} support points")
    rows, big = _transform_rows(f, _all_targets(n), 1)
    keep = np.flatnonzero(rows.any(axis=1))
    return FiniteFunction(n, keep, rows[keep], big, f.denominator * n ** 4, not f.dual)


def fourier_inverse(fhat: FiniteFunction) -> FiniteFunction:
    """f(a) = sum_b f^(b) <-a, b>."""
    _check_work(fhat)
    n = fhat.modulus
    rows, big = _transform_rows(fhat, _all_targets(n), -1)
    keep = np.flatnonzero(rows.any(axis=1))
    return FiniteFunction(n, keep, rows[keep], big, fhat.denominator, not fhat.dual)


def fourier_transform_numeric(f: FiniteFunction) -> np.ndarray:
    """Dense floating-point f^ via numpy's inverse FFT (which carries the N^-4)."""
    n = f.modulus
    return np.fft.ifftn(f.dense().reshape(n, n, n, n)).ravel()


def functions_equal(f: FiniteFunction, g: FiniteFunction) -> bool:
    """Exact pointwise equality."""
    if f.modulus != g.modulus:
        return False
    for code in np.union1d(f.support, g.support):
        if not f.value(int(code)).equals(g.value(int(code))):
            return False
    return True


# =============================================================================
# Dual classification
# =============================================================================

def _iota_array(coeffs: np.ndarray, n: int) -> np.ndarray:
    y = np.asarray(coeffs, dtype=np.int64)
    return np.stack([y[:, 3], -3 * y[:, 2], 3 * y[:, 1], -y[:, 0]], axis=1) % n


def dual_type_codes(coeffs: np.ndarray, p: int, e: int) -> np.ndarray:
    """Types of dual forms through iota (needs p != 3)."""
    if p == 3:
        raise UnsupportedRingError("iota does not identify V* with V at 3")
    n = p ** e
    forms = _iota_array(coeffs, n)
    return type_codes_mod_p(forms, p) if e == 1 else type_codes_mod_p2(forms, p)


def dual_type(b: DualForm, p: int) -> TypeSymbol:
    e = 1 if b.modulus == p else 2
    return TypeSymbol.from_code(int(dual_type_codes(np.array([b.coeffs]), p, e)[0]))


def dual_representatives(p: int, symbol: TypeSymbol) -> List[DualForm]:
    """One dual form per G_{p^2}-orbit of a level-p^2 type (via iota^-1)."""
    if symbol in SINGULAR_P2:
        forms = split_representatives(p, symbol)
    else:
        forms = [representative_mod_p2(p, symbol)]
    return [iota_inverse(x) for x in forms]


def _level_p_dual(p: int, symbol: TypeSymbol) -> DualForm:
    return iota_inverse(representative_mod_p(p, symbol))


# =============================================================================
# Expected tables
# =============================================================================

def mori_table(p: int) -> Dict[Tuple[TypeSymbol, TypeSymbol], int]:
    """W(1, a, b) for singular a mod p, keyed by (type of a, type of b)."""
    T = TypeSymbol
    gl = (p * p - p) * (p * p - 1)
    return {
        (T.TRIPLE, T.ZERO): gl,
        (T.TRIPLE, T.TRIPLE): -p * (p - 1),
        (T.TRIPLE, T.DOUBLE): p * (p - 1) ** 2,
        (T.TRIPLE, T.ONE_ONE_ONE): p * (p - 1) * (2 * p - 1),
        (T.TRIPLE, T.TWO_ONE): -p * (p - 1),
        (T.TRIPLE, T.THREE): -p * (p - 1) * (p + 1),
        (T.DOUBLE, T.ZERO): gl,
        (T.DOUBLE, T.TRIPLE): p * (p - 1) ** 2,
        (T.DOUBLE, T.DOUBLE): p * (p - 1) * (p - 2),
        (T.DOUBLE, T.ONE_ONE_ONE): -3 * p * (p - 1),
        (T.DOUBLE, T.TWO_ONE): -p * (p - 1),
        (T.DOUBLE, T.THREE): 0,
    }


SINGULAR_SOURCES = (
    TypeSymbol.TRIPLE_STAR2,
    TypeSymbol.TRIPLE_STAR,
    TypeSymbol.TRIPLE_MAX,
    TypeSymbol.DOUBLE_STAR,
)


def singular_table(p: int) -> Dict[Tuple[TypeSymbol, TypeSymbol], Optional[int]]:
    """W(1, a, b) for a in the nonmaximal-or-ramified types mod p^2; None marks average cells."""
    T = TypeSymbol
    q = p ** 5
    sq, lin = q * (p - 1) ** 2, -q * (p - 1)
    rows = {
        T.TRIPLE_STAR2: (sq, sq, lin, sq),
        T.TRIPLE_STAR: (sq, sq, lin, lin),
        T.TRIPLE_MAX: (lin, lin, None, 0),
        T.DOUBLE_STAR: (sq, lin, 0, 0),
        T.DOUBLE_MAX: (lin, None, 0, 0),
        T.ONE_ONE_ONE: (0, 0, 0, 0),
        T.TWO_ONE: (0, 0, 0, 0),
        T.THREE: (0, 0, 0, 0),
    }
    return {(a, b): row[i] for b, row in rows.items() for i, a in enumerate(SINGULAR_SOURCES)}


def average_cell_values(p: int, a_symbol: TypeSymbol) -> Tuple[int, ...]:
    """Individual values W takes in an average cell, per orbit of a."""
    q, q6 = p ** 5, p ** 6
    if a_symbol is TypeSymbol.TRIPLE_STAR:
        return (q - q6, q + q6)
    if p % 3 == 1:
        return (q - q6, q + 2 * q6)
    return (q,)


def phi_transform_table(p: int, prime: bool = False) -> Tuple[Dict[TypeSymbol, Fraction], Dict[TypeSymbol, Fraction]]:
    """Expected transforms of Phi_p (or Phi'_p): values on pV by the type of b/p, and off pV."""
    T = TypeSymbol
    f = lambda k: Fraction(1, p ** k)  # noqa: E731
    if not prime:
        on_pv = {
            T.ZERO: f(2) + f(3) - f(5),
            T.TRIPLE: f(3) - f(5),
            T.DOUBLE: f(3) - f(5),
            T.ONE_ONE_ONE: -f(5),
            T.TWO_ONE: -f(5),
            T.THREE: -f(5),
        }
        off_pv = {s: Fraction(0) for s in NONSINGULAR + SINGULAR_P2}
        off_pv.update({T.TRIPLE_STAR2: f(3) - f(5), T.TRIPLE_STAR: -f(5), T.TRIPLE_MAX: -f(5)})
        return on_pv, off_pv
    on_pv = {
        T.ZERO: 2 * f(2) - f(4),
        T.TRIPLE: f(3) - f(4),
        T.DOUBLE: 2 * f(3) - 2 * f(4),
        T.ONE_ONE_ONE: 2 * f(3) - 3 * f(4),
        T.TWO_ONE: -f(4),
        T.THREE: -f(3),
    }
    off_pv = {s: Fraction(0) for s in NONSINGULAR + SINGULAR_P2}
    off_pv.update({T.TRIPLE_STAR2: f(3) - f(4), T.TRIPLE_STAR: -f(4)})
    return on_pv, off_pv


def divisible_transform_value(p: int, b: DualForm) -> Fraction:
    """Expected f_p^(b): by whether b = 0, P*(b) = 0 or not."""
    if b.is_zero():
        return Fraction(1, p) + Fraction(1, p ** 2) - Fraction(1, p ** 3)
    if dual_disc(b) % p == 0:
        return Fraction(1, p ** 2) - Fraction(1, p ** 3)
    return -Fraction(1, p ** 3)


# =============================================================================
# Verification drivers
# =============================================================================

def verify_mori_table(p: int, threads: int = 1) -> VerificationReport:
    """All twelve cells of the singular Gauss sum table mod p."""
    if p < 5 or not sympy.isprime(p):
        raise DomainError(f"the mod-p table is checked for primes p >= 5, got {p}")
    report = VerificationReport(f"mori_p{p}", workers=threads)
    expected = mori_table(p)
    trivial = DirichletCharacter.trivial(p)
    b_types = [s for s in LEVEL_P]
    bs = [_level_p_dual(p, s) if s is not TypeSymbol.ZERO else DualForm(0, 0, 0, 0, p) for s in b_types]
    for a_symbol in (TypeSymbol.TRIPLE, TypeSymbol.DOUBLE):
        a = representative_mod_p(p, a_symbol)
        values = orbital_gauss_sums(trivial, a, bs, threads)
        for b_symbol, w in zip(b_types, values):
            report.add(f"p={p} a={a_symbol} b={b_symbol}", expected[(a_symbol, b_symbol)], w)
    return report.finish()


def verify_singular_table(p: int, threads: int = 1) -> VerificationReport:
    """Singular Gauss sums mod p^2 for every orbit of a and b, plus the two average cells."""
    if p < 5 or not sympy.isprime(p):
        raise DomainError(f"the mod-p^2 table is checked for primes p >= 5, got {p}")
    report = VerificationReport(f"singular_p{p}", workers=threads)
    n = p * p
    expected = singular_table(p)
    trivial = DirichletCharacter.trivial(n)
    b_types = [TypeSymbol.TRIPLE_STAR2, TypeSymbol.TRIPLE_STAR, TypeSymbol.TRIPLE_MAX,
               TypeSymbol.DOUBLE_STAR, TypeSymbol.DOUBLE_MAX] + list(NONSINGULAR)
    b_list: List[Tuple[TypeSymbol, DualForm]] = [(s, b) for s in b_types for b in dual_representatives(p, s)]
    bs = [b for _, b in b_list]

    averages: Dict[Tuple[TypeSymbol, int], List[Tuple[int, CyclotomicSum]]] = {}
    for a_symbol in SINGULAR_SOURCES:
        for cls in orbit_split(p, a_symbol, threads):
            values = orbital_gauss_sums(trivial, cls.representative, bs, threads)
            for j, ((b_symbol, b), w) in enumerate(zip(b_list, values)):
                cell = expected[(a_symbol, b_symbol)]
                where = f"p={p} a={a_symbol}{list(cls.representative.coeffs)} b={b_symbol}{list(b.coeffs)}"
                if cell is None:
                    averages.setdefault((a_symbol, j), []).append((cls.cardinality, w))
                    allowed = average_cell_values(p, a_symbol)
                    report.check(
                        f"{where} individual",
                        any(w.equals(v) for v in allowed),
                        note=f"value {w}, allowed {list(allowed)}",
                    )
                else:
                    report.add(where, cell, w)
    for (a_symbol, j), entries in sorted(averages.items(), key=lambda kv: (kv[0][0].code, kv[0][1])):
        b_symbol, b = b_list[j]
        size = sum(c for c, _ in entries)
        mean = sum_all([w * c for c, w in entries]) * Fraction(1, size)
        report.add(f"p={p} a={a_symbol} b={b_symbol}{list(b.coeffs)} average", p ** 5, mean)
    return report.finish()


def verify_phi_transforms(p: int, threads: int = 1) -> VerificationReport:
    """Transforms of Phi_p and Phi'_p on one b per dual orbit, on and off pV."""
    if p < 5 or not sympy.isprime(p):
        raise DomainError(f"the Phi_p transforms are checked for primes p >= 5, got {p}")
    n = p * p
    report = VerificationReport(f"fourier_p{p}", workers=threads)
    for name, func, prime in (("Phi", phi(p), False), ("Phi'", phi_prime(p), True)):
        on_pv, off_pv = phi_transform_table(p, prime)
        pv_points = []
        for s in LEVEL_P:
            b1 = DualForm(0, 0, 0, 0, p) if s is TypeSymbol.ZERO else _level_p_dual(p, s)
            pv_points.append((s, DualForm.of((p * v for v in b1.coeffs), n)))
        for (s, b), value in zip(pv_points, fourier_values(func, [b for _, b in pv_points])):
            report.add(f"{name}_{p}^ at p*b', b' of type {s}", on_pv[s], value)
        off_points = [(s, b) for s in NONSINGULAR + SINGULAR_P2 for b in dual_representatives(p, s)]
        for (s, b), value in zip(off_points, fourier_values(func, [b for _, b in off_points])):
            report.add(f"{name}_{p}^ at b={list(b.coeffs)} of type {s}", off_pv[s], value)
    return report.finish()


def parseval_check(p: int, threads: int = 1) -> VerificationReport:
    """sum_b |f^(b)|^2 = N^-4 sum_a |f(a)|^2 for Phi_p and Phi'_p, exact over dual orbits."""
    n = p * p
    report = VerificationReport(f"parseval_p{p}", workers=threads)
    orbits = orbit_decomposition(p, 2, threads)
    duals = [iota_inverse(rep) for rep, _ in orbits]
    sizes = [size for _, size in orbits]
    report.add(f"dual orbit sizes cover V*_{n}", n ** 4, sum(sizes))
    for name, func in (("Phi", phi(p)), ("Phi'", phi_prime(p))):
        values = fourier_values(func, duals)
        lhs = sum((Fraction(size) * v.rational_value() ** 2 for size, v in zip(sizes, values)), Fraction(0))
        rhs = func.sum_of_squares() / n ** 4
        report.add(f"Parseval for {name}_{p}", rhs, lhs)
    return report.finish()


def verify_divisible_fourier(p: int) -> VerificationReport:
    """f_p^ on every b in V*_p, grouped by b = 0, P*(b) = 0 and P*(b) != 0."""
    report = VerificationReport(f"divisible_fourier_p{p}")
    fhat = fourier_transform(divisible_indicator(p))
    groups: Dict[str, List[bool]] = {}
    for code in range(p ** 4):
        b = DualForm.of(decode_forms(np.array([code]), p)[0].tolist(), p)
        key = "b=0" if b.is_zero() else ("P*(b)=0" if dual_disc(b) % p == 0 else "P*(b)!=0")
        groups.setdefault(key, []).append(fhat.value(code).equals(divisible_transform_value(p, b)))
    for key in ("b=0", "P*(b)=0", "P*(b)!=0"):
        hits = groups.get(key, [])
        report.add(f"f_{p}^ on {key} ({len(hits)} points)", len(hits), sum(hits))
    return report.finish()


def verify_squarefree_divisible(n: int, samples: int, rng: np.random.Generator) -> VerificationReport:
    """f_N^(b) = prod_p f_p^(b mod p) for squarefree N, on sampled b."""
    if not sympy.factorint(n) or any(e > 1 for e in sympy.factorint(n).values()):
        raise DomainError(f"{n} is not squarefree")
    report = VerificationReport(f"squarefree_divisible_{n}")
    func = divisible_indicator(n)
    bs = [random_dual_form(n, rng) for _ in range(samples)] + [DualForm(0, 0, 0, 0, n)]
    for b, value in zip(bs, fourier_values(func, bs)):
        expected = Fraction(1)
        for p in sympy.primefactors(n):
            expected *= divisible_transform_value(p, b.reduce(p))
        report.add(f"f_{n}^ at {list(b.coeffs)}", expected, value)
    return report.finish()


# =============================================================================
# Identities
# =============================================================================

def check_reduction(chi: DirichletCharacter, n: int, m: int, rng: np.random.Generator, samples: int = 3) -> VerificationReport:
    """W_N(chi, m a, b) = |G_N| / |G_{N/m}| W_{N/m}(chi, a, b)."""
    report = VerificationReport(f"reduction_N{n}_m{m}")
    if n % m or (n // m) % chi.conductor:
        raise DomainError(f"need m | N and conductor | N/m (N={n}, m={m}, conductor {chi.conductor})")
    small = n // m
    chi_small = chi.primitive().induce(small)
    chi_big = chi.primitive().induce(n)
    ratio = group_order(n) // group_order(small)
    for _ in range(samples):
        a = random_form(small, rng)
        b = random_dual_form(n, rng)
        lifted = Form.of((m * v for v in a.coeffs), n)
        big = orbital_gauss_sum(chi_big, lifted, b)
        ref = orbital_gauss_sum(chi_small, a, b.reduce(small)) * ratio
        report.add(f"W_{n}(chi, {m}*{list(a.coeffs)}, {list(b.coeffs)})", ref, big)
    return report.finish()


def check_pv_reduction(p: int, rng: np.random.Generator, samples: int = 3) -> VerificationReport:
    """W_{p^2}(1, a, p b') = p^4 W_p(1, a mod p, b')."""
    report = VerificationReport(f"pv_reduction_p{p}")
    n = p * p
    for _ in range(samples):
        a = random_form(n, rng)
        b1 = random_dual_form(p, rng)
        lhs = orbital_gauss_sum(DirichletCharacter.trivial(n), a, DualForm.of((p * v for v in b1.coeffs), n))
        rhs = orbital_gauss_sum(DirichletCharacter.trivial(p), a.reduce(p), b1) * p ** 4
        report.add(f"W_{n}(a={list(a.coeffs)}, p*{list(b1.coeffs)})", rhs, lhs)
    return report.finish()


def check_decomposition(chi: DirichletCharacter, rng: np.random.Generator, samples: int = 3) -> VerificationReport:
    """W_N(chi, a, b) = prod_i chi_i(N/N_i)^2 W_{N_i}(chi_i, a_i, b_i)."""
    n = chi.modulus
    report = VerificationReport(f"decomposition_N{n}")
    factors = [p ** c for p, c in sorted(sympy.factorint(n).items())]
    for _ in range(samples):
        a = random_form(n, rng)
        b = random_dual_form(n, rng)
        whole = orbital_gauss_sum(chi, a, b)
        product = CyclotomicSum.integer(1)
        for q in factors:
            p = sympy.primefactors(q)[0]
            local = chi.component(p)
            product = product * (_root(local.value(n // q) ** 2) * orbital_gauss_sum(local, a.reduce(q), b.reduce(q)))
        report.add(f"W_{n}({list(a.coeffs)}, {list(b.coeffs)})", product, whole)
    return report.finish()


def _random_sparse(n: int, rng: np.random.Generator, size: int = 4) -> FiniteFunction:
    codes = rng.integers(0, n ** 4, size=size)
    values = [int(v) for v in rng.integers(-3, 4, size=size)]
    return FiniteFunction.from_values(n, codes, values)


def check_product_fourier(n1: int, n2: int, rng: np.random.Generator, samples: int = 5) -> VerificationReport:
    """(f1 x f2)^ = (f1_{N2})^ x (f2_{N1})^ on sampled b."""
    report = VerificationReport(f"product_fourier_{n1}x{n2}")
    f1, f2 = _random_sparse(n1, rng), _random_sparse(n2, rng)
    n = n1 * n2
    prod = f1.tensor(f2)
    s1, s2 = f1.scaled_argument(n2 % n1), f2.scaled_argument(n1 % n2)
    for _ in range(samples):
        b = random_dual_form(n, rng)
        lhs = fourier_value(prod, b)
        rhs = fourier_value(s1, b.reduce(n1)) * fourier_value(s2, b.reduce(n2))
        report.add(f"(f1 x f2)^({list(b.coeffs)})", rhs, lhs)
    return report.finish()


def check_fourier_inversion(n: int, rng: np.random.Generator) -> VerificationReport:
    """f = inverse(f^) exactly for a random sparse f."""
    report = VerificationReport(f"fourier_inversion_N{n}")
    f = _random_sparse(n, rng)
    back = fourier_inverse(fourier_transform(f))
    report.check(f"inverse transform reproduces f mod {n}", functions_equal(f, back))
    numeric = fourier_transform_numeric(f)
    exact = fourier_transform(f)
    dense_exact = np.zeros(n ** 4, dtype=complex)
    dense_exact[exact.support] = exact.complex_values()
    report.check(
        f"FFT agrees with exact transform mod {n}",
        bool(np.allclose(numeric, dense_exact, atol=config.TABLE_TOLERANCE)),
    )
    return report.finish()


def check_orbit_function_transform(chi: DirichletCharacter, a: Form, rng: np.random.Generator, samples: int = 4) -> VerificationReport:
    """f_{chi,a}^(b) = N^-4 W(chi, a, b)."""
    n = a.modulus
    report = VerificationReport(f"orbit_function_N{n}")
    f = FiniteFunction.orbit_function(chi, a)
    bs = [random_dual_form(n, rng) for _ in range(samples)]
    for b, w, v in zip(bs, orbital_gauss_sums(chi, a, bs), fourier_values(f, bs)):
        report.add(f"f_chi,a^({list(b.coeffs)})", w * Fraction(1, n ** 4), v)
    return report.finish()


def check_equivariance(chi: DirichletCharacter, n: int, rng: np.random.Generator, samples: int = 5) -> VerificationReport:
    """W(chi, g1 a, g2 b) = chi(det g1)^-1 chi(det g2)^-1 W(chi, a, b)."""
    report = VerificationReport(f"equivariance_N{n}")
    chi_n = chi if chi.modulus == n else chi.induce(n)
    for _ in range(samples):
        a, b = random_form(n, rng), random_dual_form(n, rng)
        g1, g2 = random_element(n, rng), random_element(n, rng)
        base = orbital_gauss_sum(chi_n, a, b)
        moved = orbital_gauss_sum(chi_n, act(g1, a), act_dual(g2, b))
        factor = (chi_n.value(g1.det) * chi_n.value(g2.det)).inverse()
        report.add(f"W(g1 a, g2 b) for a={list(a.coeffs)}", base * _root(factor), moved)
    return report.finish()


def check_stabilizer_vanishing(chi: DirichletCharacter, a: Form, rng: np.random.Generator, samples: int = 4) -> VerificationReport:
    """W(chi, a, b) = 0 for all b when chi o det is nontrivial on G_{N,a}."""
    n = a.modulus
    report = VerificationReport(f"stabilizer_vanishing_N{n}")
    chi_n = chi if chi.modulus == n else chi.induce(n)
    if character_trivial_on_stabilizer(chi_n, a):
        report.check(f"chi o det trivial on the stabilizer of {a}; nothing to test", True)
        return report.finish()
    bs = [random_dual_form(n, rng) for _ in range(samples)]
    for b, w in zip(bs, orbital_gauss_sums(chi_n, a, bs)):
        report.add(f"W(chi, {list(a.coeffs)}, {list(b.coeffs)})", 0, w)
    return report.finish()


def inversion_identity(chi: DirichletCharacter, a: Form, a_prime: Form, threads: int = 1) -> CyclotomicSum:
    """N^-4 sum over dual orbits of W(chi^-1, -a', b) W(chi, a, b) / (|G_b| |G_a|), summed over all b."""
    n = a.modulus
    chi_n = chi if chi.modulus == n else chi.induce(n)
    bs = [DualForm.of(row, n) for row in _all_targets(n).tolist()]
    w_a = orbital_gauss_sums(chi_n, a, bs, threads)
    w_ap = orbital_gauss_sums(chi_n.inverse(), a_prime.scaled(-1), bs, threads)
    total = sum_all([x * y for x, y in zip(w_a, w_ap)])
    stab = stabilizer_order(a, threads)
    return total * Fraction(1, n ** 4 * group_order(n) * stab)


def form_outside_orbit(a: Form, rng: np.random.Generator, attempts: int = 200) -> Form:
    """A random nonzero form outside G_N a, of the same level-p type as a when N is composite."""
    n = a.modulus
    orbit = orbit_codes(a)
    p = min(sympy.primefactors(n))
    want = int(type_codes_mod_p(np.array([a.coeffs]), p)[0])
    fallback = None
    for _ in range(attempts):
        b = random_form(n, rng)
        if b.is_zero():
            continue
        code = int(encode_forms(np.array([b.coeffs]), n)[0])
        if code in orbit:
            continue
        if sympy.isprime(n) or int(type_codes_mod_p(np.array([b.coeffs]), p)[0]) == want:
            return b
        fallback = fallback or b
    if fallback is None:
        raise DomainError(f"no nonzero form outside the orbit of {a} found in {attempts} draws")
    return fallback


def check_inversion(chi: DirichletCharacter, n: int, rng: np.random.Generator) -> VerificationReport:
    """The Gauss-sum inversion identity on a' = g a and on a' outside the orbit."""
    report = VerificationReport(f"inversion_N{n}")
    chi_n = chi if chi.modulus == n else chi.induce(n)
    for _ in range(20):
        a = random_form(n, rng)
        if character_trivial_on_stabilizer(chi_n, a):
            break
    else:
        report.check("no form with chi o det trivial on its stabilizer found", False)
        return report.finish()
    g = random_element(n, rng)
    inside = inversion_identity(chi_n, a, act(g, a))
    report.add(f"a'=g a for a={list(a.coeffs)}", _root(chi_n.value(g.det)), inside)
    outside = form_outside_orbit(a, rng)
    report.add(f"a'={list(outside.coeffs)} outside the orbit", 0, inversion_identity(chi_n, a, outside))
    return report.finish()


def check_identities(n: int, chi: DirichletCharacter, rng: np.random.Generator, samples: int = 3) -> VerificationReport:
    """Reduction, CRT decomposition, product-Fourier and inversion identities at N."""
    report = VerificationReport(f"identities_N{n}")
    factors = [p ** c for p, c in sorted(sympy.factorint(n).items())]
    if len(factors) >= 2:
        report.extend(check_decomposition(chi if chi.modulus == n else chi.induce(n), rng, samples))
        report.extend(check_product_fourier(factors[0], n // factors[0], rng, samples))
    for p in sympy.primefactors(n):
        if (n // p) % chi.conductor == 0:
            report.extend(check_reduction(chi, n, p, rng, samples))
    report.extend(check_inversion(chi, n, rng))
    return report.finish()
