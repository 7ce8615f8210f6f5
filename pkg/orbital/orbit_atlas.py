"""
Orbit atlas of V_p and V_{p^2}

Key functions:
- type_mod_p / type_mod_p2 (and vectorized *_codes variants): orbit types
- closure_table: orbit-closure classification of the singular part of
  V_{p^2}, used for p in {2, 3} and as a cross-check elsewhere
- is_nonmaximal / is_nm_or_totally_ramified: the Phi_p and Phi'_p indicators
- stabilizer_order / orbit_codes: direct scans over G_{p^e}
- census / expected_counts: exhaustive type counts against closed forms
- orbit_split: orbit decomposition of singular p^2-types
- g27_stabilizer_table: stabilizers of the 1^3_max representatives in G_27
- verify_census / verify_g27: the same checks as verification reports
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
import sympy
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from orbital import config
from orbital.errors import ClassificationError, DomainError, ResourceCapError, UnsupportedRingError
from orbital.forms_core import act_many, act_on_array, decode_forms, disc, disc_many, encode_forms, forms_slice
from orbital.linear_groups import group_order, scan_group
from orbital.residue_rings import p_valuation
from orbital.types import Form, GroupElement
from utils.report import VerificationReport

logger = logging.getLogger(__name__)


# =============================================================================
# Type symbols
# =============================================================================

class TypeSymbol(Enum):
    """Orbit types of V_p and V_{p^2}."""

    THREE = "(3)"
    TWO_ONE = "(21)"
    ONE_ONE_ONE = "(111)"
    DOUBLE = "(1^21)"
    TRIPLE = "(1^3)"
    ZERO = "(0)"
    DOUBLE_MAX = "(1^21_max)"
    DOUBLE_STAR = "(1^21_*)"
    TRIPLE_MAX = "(1^3_max)"
    TRIPLE_STAR = "(1^3_*)"
    TRIPLE_STAR2 = "(1^3_**)"
    DIVISIBLE = "pV"

    @property
    def code(self) -> int:
        return _CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "TypeSymbol":
        return _SYMBOLS[code]

    @property
    def reduction(self) -> "TypeSymbol":
        """Level-p symbol of the reduction mod p."""
        return _REDUCTION.get(self, self)

    @property
    def is_nonsingular(self) -> bool:
        return self in NONSINGULAR

    def __str__(self) -> str:
        return self.value


_SYMBOLS: Tuple[TypeSymbol, ...] = tuple(TypeSymbol)
_CODES = {s: i for i, s in enumerate(_SYMBOLS)}
_REDUCTION = {
    TypeSymbol.DOUBLE_MAX: TypeSymbol.DOUBLE,
    TypeSymbol.DOUBLE_STAR: TypeSymbol.DOUBLE,
    TypeSymbol.TRIPLE_MAX: TypeSymbol.TRIPLE,
    TypeSymbol.TRIPLE_STAR: TypeSymbol.TRIPLE,
    TypeSymbol.TRIPLE_STAR2: TypeSymbol.TRIPLE,
    TypeSymbol.DIVISIBLE: TypeSymbol.ZERO,
}

NONSINGULAR = (TypeSymbol.THREE, TypeSymbol.TWO_ONE, TypeSymbol.ONE_ONE_ONE)
LEVEL_P = NONSINGULAR + (TypeSymbol.DOUBLE, TypeSymbol.TRIPLE, TypeSymbol.ZERO)
SINGULAR_P2 = (
    TypeSymbol.DOUBLE_MAX,
    TypeSymbol.DOUBLE_STAR,
    TypeSymbol.TRIPLE_MAX,
    TypeSymbol.TRIPLE_STAR,
    TypeSymbol.TRIPLE_STAR2,
)
LEVEL_P2 = NONSINGULAR + SINGULAR_P2 + (TypeSymbol.DIVISIBLE,)

NONMAXIMAL = frozenset({TypeSymbol.DIVISIBLE, TypeSymbol.TRIPLE_STAR2, TypeSymbol.TRIPLE_STAR, TypeSymbol.DOUBLE_STAR})
NONMAXIMAL_OR_TOTALLY_RAMIFIED = NONMAXIMAL | {TypeSymbol.TRIPLE_MAX}


@dataclass(frozen=True)
class OrbitClass:
    """One G_{p^e}-orbit.

    Attributes:
        p: The prime
        e: Level exponent
        representative: Form mod p^e
        symbol: Orbit type
        cardinality: Orbit size
        stabilizer_order: |G_{p^e, a}|; cardinality * stabilizer_order = |G_{p^e}|
    """
    p: int
    e: int
    representative: Form
    symbol: TypeSymbol
    cardinality: int
    stabilizer_order: int

    def __post_init__(self) -> None:
        if self.cardinality * self.stabilizer_order != group_order(self.p ** self.e):
            raise ValueError(
                f"orbit of {self.representative}: {self.cardinality} * {self.stabilizer_order} "
                f"!= |G_{self.p ** self.e}|"
            )

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "e": self.e,
            "representative": self.representative.to_dict(),
            "symbol": str(self.symbol),
            "cardinality": self.cardinality,
            "stabilizer_order": self.stabilizer_order,
        }


# =============================================================================
# Classification mod p
# =============================================================================

def _root_counts(coeffs: np.ndarray, p: int) -> np.ndarray:
    x1, x2, x3, x4 = (coeffs[:, i] % p for i in range(4))
    count = (x1 == 0).astype(np.int64)
    for t in range(p):
        count += ((((x1 * t + x2) % p * t + x3) % p * t + x4) % p == 0)
    return count


def type_codes_mod_p(coeffs: np.ndarray, p: int) -> np.ndarray:
    """Level-p type codes for an (n, 4) array of forms (any lift)."""
    c = np.asarray(coeffs, dtype=np.int64) % p
    roots = _root_counts(c, p)
    singular = disc_many(c, p) == 0
    zero = ~c.any(axis=1)
    out = np.full(len(c), TypeSymbol.THREE.code, dtype=np.int64)
    out[~singular & (roots == 1)] = TypeSymbol.TWO_ONE.code
    out[~singular & (roots == 3)] = TypeSymbol.ONE_ONE_ONE.code
    out[singular & (roots == 1)] = TypeSymbol.TRIPLE.code
    out[singular & (roots == 2)] = TypeSymbol.DOUBLE.code
    out[zero] = TypeSymbol.ZERO.code
    return out


def type_mod_p(a: Form, p: Optional[int] = None) -> TypeSymbol:
    """Type of a mod p by counting roots in P^1(F_p)."""
    p = p or a.modulus
    if p is None or not sympy.isprime(p):
        raise DomainError(f"type_mod_p needs a prime modulus, got {p}")
    code = type_codes_mod_p(np.array([a.coeffs], dtype=np.int64), p)[0]
    return TypeSymbol.from_code(int(code))


# =============================================================================
# Classification mod p^2
# =============================================================================

def _padic_order_capped(values: np.ndarray, p: int, cap: int) -> np.ndarray:
    v = np.zeros(len(values), dtype=np.int64)
    q = 1
    for k in range(1, cap + 1):
        q *= p
        v += (values % q == 0)
    return v


def _d_set_members(p: int, symbol: TypeSymbol) -> np.ndarray:
    """All members of the D-set of a singular p^2-type, as an (n, 4) array mod p^2."""
    n = p * p
    everything = np.arange(n)
    units = everything[everything % p != 0]
    p_r = everything[everything % p == 0]
    p_units = p * np.arange(1, p)
    zero = np.array([0])
    slots = {
        TypeSymbol.DOUBLE_MAX: (zero, units, p_r, p_units),
        TypeSymbol.DOUBLE_STAR: (zero, units, p_r, zero),
        TypeSymbol.TRIPLE_MAX: (units, p_r, p_r, p_units),
        TypeSymbol.TRIPLE_STAR: (units, p_r, p_units, zero),
        TypeSymbol.TRIPLE_STAR2: (units, p_r, zero, zero),
    }[symbol]
    grid = np.meshgrid(*slots, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)


def _closure_generators(p: int) -> List[GroupElement]:
    n = p * p
    gens = [GroupElement(1, 1, 0, 1, n), GroupElement(1, 0, 1, 1, n)]
    u = 3 if p == 2 else int(sympy.primitive_root(n))
    gens.append(GroupElement(u, 0, 0, 1, n))
    return gens


@lru_cache(maxsize=None)
def closure_table(p: int) -> Tuple[np.ndarray, np.ndarray]:
    """Orbit-closure classification of the singular, non-divisible part of V_{p^2}.

    Returns (sorted flat codes, type codes). Each connected component of the
    generator graph is labelled by the single D-set it meets.
    """
    n = p * p
    if n ** 4 > config.MAX_CLOSURE_SIZE:
        raise ResourceCapError(f"closure table mod {n}", size=n ** 4, cap=config.MAX_CLOSURE_SIZE)
    parts = []
    for x1 in range(n):
        forms = forms_slice(n, x1)
        level_p = type_codes_mod_p(forms, p)
        keep = (level_p == TypeSymbol.DOUBLE.code) | (level_p == TypeSymbol.TRIPLE.code)
        parts.append(encode_forms(forms[keep], n))
    codes = np.sort(np.concatenate(parts))
    forms = decode_forms(codes, n)
    size = len(codes)
    logger.info(f"Building orbit closure mod {n}: {size} singular forms")

    rows, cols = [], []
    for g in _closure_generators(p):
        image = np.searchsorted(codes, encode_forms(act_on_array(g, forms, n), n))
        rows.append(np.arange(size))
        cols.append(image)
    graph = coo_matrix(
        (np.ones(sum(len(r) for r in rows), dtype=np.int8), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    )
    n_comp, labels = connected_components(graph, directed=True, connection="weak")

    component_type = np.full(n_comp, -1, dtype=np.int64)
    for symbol in SINGULAR_P2:
        members = np.searchsorted(codes, encode_forms(_d_set_members(p, symbol), n))
        for comp in np.unique(labels[members]):
            if component_type[comp] not in (-1, symbol.code):
                raise ClassificationError(
                    f"mod {n}: component {comp} meets {TypeSymbol.from_code(int(component_type[comp]))} and {symbol}"
                )
            component_type[comp] = symbol.code
    if (component_type < 0).any():
        raise ClassificationError(f"mod {n}: {(component_type < 0).sum()} singular components meet no D-set")
    return codes, component_type[labels]


def type_codes_mod_p2(coeffs: np.ndarray, p: int, method: str = "auto") -> np.ndarray:
    """Level-p^2 type codes for an (n, 4) array of forms mod p^2.

    method: "valuation" (p >= 5), "closure" (any p within caps) or "auto".
    """
    n = p * p
    c = np.asarray(coeffs, dtype=np.int64) % n
    out = type_codes_mod_p(c, p)
    divisible = ~(c % p).any(axis=1)
    out[divisible] = TypeSymbol.DIVISIBLE.code
    singular = ((out == TypeSymbol.DOUBLE.code) | (out == TypeSymbol.TRIPLE.code))
    if not singular.any():
        return out
    if method == "auto":
        method = "valuation" if p >= 5 else "closure"
    if method == "closure":
        codes, types = closure_table(p)
        idx = np.searchsorted(codes, encode_forms(c[singular], n))
        out[singular] = types[idx]
        return out
    if p < 5:
        raise UnsupportedRingError(f"valuation criteria need p >= 5, got {p}")
    ords = _padic_order_capped(disc_many(c[singular]), p, 4)
    level = out[singular]
    refined = np.empty_like(level)
    double = level == TypeSymbol.DOUBLE.code
    refined[double & (ords == 1)] = TypeSymbol.DOUBLE_MAX.code
    refined[double & (ords >= 2)] = TypeSymbol.DOUBLE_STAR.code
    triple = ~double
    refined[triple & (ords == 2)] = TypeSymbol.TRIPLE_MAX.code
    refined[triple & (ords == 3)] = TypeSymbol.TRIPLE_STAR.code
    refined[triple & (ords >= 4)] = TypeSymbol.TRIPLE_STAR2.code
    bad = (double & (ords < 1)) | (triple & (ords < 2))
    if bad.any():
        raise ClassificationError(f"singular forms mod {p} with unexpected valuation of P mod {n}")
    out[singular] = refined
    return out


def type_mod_p2(a: Form, p: Optional[int] = None, method: str = "auto") -> TypeSymbol:
    """Type of a form mod p^2."""
    if p is None:
        if a.modulus is None:
            raise DomainError("type_mod_p2 needs a modulus")
        p = int(sympy.integer_nthroot(a.modulus, 2)[0])
    if not sympy.isprime(p):
        raise DomainError(f"{p} is not prime")
    code = type_codes_mod_p2(np.array([a.coeffs], dtype=np.int64), p, method)[0]
    return TypeSymbol.from_code(int(code))


def is_nonmaximal(a: Form, p: Optional[int] = None) -> bool:
    """Phi_p: a mod p^2 lies in pV, 1^3_**, 1^3_* or 1^21_*."""
    return type_mod_p2(a, p) in NONMAXIMAL


def is_nm_or_totally_ramified(a: Form, p: Optional[int] = None) -> bool:
    """Phi'_p: Phi_p together with 1^3_max."""
    return type_mod_p2(a, p) in NONMAXIMAL_OR_TOTALLY_RAMIFIED


# =============================================================================
# Stabilizers and orbits
# =============================================================================

def _target(a: Form) -> Tuple[int, Tuple[int, int, int, int]]:
    if a.modulus is None:
        raise DomainError("orbit scans need a form mod N")
    return a.modulus, a.coeffs


def stabilizer_order(a: Form, threads: int = 1, with_elements: bool = False):
    """|{g in G_N : g.a = a}| by direct scan; optionally the elements themselves."""
    n, x = _target(a)
    if n > config.STABILIZER_FULL_SCAN_MODULUS:
        raise ResourceCapError(f"stabilizer scan mod {n}", size=n, cap=config.STABILIZER_FULL_SCAN_MODULUS)
    target = np.array(x, dtype=np.int64)

    def worker(chunk):
        images = act_many(chunk.alpha, chunk.beta, chunk.gamma, chunk.delta, chunk.det_inv, x, n)
        hit = np.flatnonzero((images == target).all(axis=1))
        return len(hit), [chunk.element(int(i)) for i in hit] if with_elements else []

    results = scan_group(n, worker, threads, description=f"stabilizer of {a}")
    total = sum(r[0] for r in results)
    if with_elements:
        elements = [g for r in results for g in r[1]]
        return total, elements
    return total


def orbit_codes(a: Form, threads: int = 1) -> np.ndarray:
    """Sorted flat codes of the G_N-orbit of a."""
    n, x = _target(a)

    def worker(chunk):
        images = act_many(chunk.alpha, chunk.beta, chunk.gamma, chunk.delta, chunk.det_inv, x, n)
        return np.unique(encode_forms(images, n))

    return np.unique(np.concatenate(scan_group(n, worker, threads, description=f"orbit of {a}")))


def orbit_forms(a: Form, threads: int = 1) -> List[Form]:
    n = a.modulus
    return [Form.of(row, n) for row in decode_forms(orbit_codes(a, threads), n).tolist()]


# =============================================================================
# Census
# =============================================================================

def expected_counts(p: int, e: int) -> Dict[TypeSymbol, int]:
    """Closed-form orbit-type cardinalities at level p (e = 1) or p^2 (e = 2)."""
    gl = (p * p - 1) * (p * p - p)
    level_p = {
        TypeSymbol.THREE: gl // 3,
        TypeSymbol.TWO_ONE: gl // 2,
        TypeSymbol.ONE_ONE_ONE: gl // 6,
        TypeSymbol.DOUBLE: (p * p - 1) * p,
        TypeSymbol.TRIPLE: p * p - 1,
        TypeSymbol.ZERO: 1,
    }
    if e == 1:
        return level_p
    if e != 2:
        raise DomainError(f"closed forms exist for e in (1, 2), got {e}")
    p4 = p ** 4
    return {
        TypeSymbol.THREE: p4 * level_p[TypeSymbol.THREE],
        TypeSymbol.TWO_ONE: p4 * level_p[TypeSymbol.TWO_ONE],
        TypeSymbol.ONE_ONE_ONE: p4 * level_p[TypeSymbol.ONE_ONE_ONE],
        TypeSymbol.DOUBLE_MAX: p ** 3 * gl,
        TypeSymbol.DOUBLE_STAR: p4 * (p * p - 1),
        TypeSymbol.TRIPLE_MAX: p * p * gl,
        TypeSymbol.TRIPLE_STAR: p * gl,
        TypeSymbol.TRIPLE_STAR2: p * p * (p * p - 1),
        TypeSymbol.DIVISIBLE: p4,
    }


def census(p: int, e: int, method: str = "auto", threads: int = 1) -> Dict[TypeSymbol, int]:
    """Exhaustive classification counts of V_{p^e} for e in (1, 2)."""
    n = p ** e
    if n ** 4 > config.MAX_CENSUS_SIZE:
        raise ResourceCapError(f"census of V_{n}", size=n ** 4, cap=config.MAX_CENSUS_SIZE)
    symbols = LEVEL_P if e == 1 else LEVEL_P2
    counts = np.zeros(len(_SYMBOLS), dtype=np.int64)
    for x1 in range(n):
        forms = forms_slice(n, x1)
        codes = type_codes_mod_p(forms, p) if e == 1 else type_codes_mod_p2(forms, p, method)
        counts += np.bincount(codes, minlength=len(_SYMBOLS))
    logger.debug(f"census p={p} e={e}: {counts.tolist()}")
    return {s: int(counts[s.code]) for s in symbols}


def nonmaximal_count(p: int) -> int:
    """|V^nm_{p^2}| = p^6 + p^5 - p^3."""
    return p ** 6 + p ** 5 - p ** 3


# =============================================================================
# Orbit splitting
# =============================================================================

def _nonresidue(p: int) -> int:
    return next(u for u in range(2, p) if pow(u, (p - 1) // 2, p) == p - 1)


def split_representatives(p: int, symbol: TypeSymbol) -> List[Form]:
    """Orbit representatives of a singular p^2-type."""
    n = p * p
    if symbol in (TypeSymbol.DOUBLE_MAX, TypeSymbol.DOUBLE_STAR) and p == 2:
        raise UnsupportedRingError("orbit splitting of 1^21 types excludes p = 2")
    if symbol in (TypeSymbol.TRIPLE_MAX, TypeSymbol.TRIPLE_STAR, TypeSymbol.TRIPLE_STAR2) and p == 3:
        raise UnsupportedRingError("orbit splitting of 1^3 types excludes p = 3")
    if symbol is TypeSymbol.DOUBLE_STAR:
        return [Form(0, 1, 0, 0, n)]
    if symbol is TypeSymbol.TRIPLE_STAR2:
        return [Form(1, 0, 0, 0, n)]
    if symbol is TypeSymbol.DOUBLE_MAX:
        return [Form(0, 1, 0, p * u, n) for u in (1, _nonresidue(p))]
    if symbol is TypeSymbol.TRIPLE_STAR:
        if p < 5:
            raise UnsupportedRingError("1^3_* splitting needs p >= 5")
        return [Form(1, 0, p * u, 0, n) for u in (1, _nonresidue(p))]
    if symbol is TypeSymbol.TRIPLE_MAX:
        if p % 3 == 1:
            g = int(sympy.primitive_root(p))
            return [Form(1, 0, 0, p * u % n, n) for u in (1, g, g * g % p)]
        return [Form(1, 0, 0, p, n)]
    raise DomainError(f"{symbol} is not a singular p^2-type")


def orbit_split(p: int, symbol: TypeSymbol, threads: int = 1) -> List[OrbitClass]:
    """Orbit decomposition of a singular p^2-type with scanned stabilizers."""
    n = p * p
    order = group_order(n)
    classes = []
    for rep in split_representatives(p, symbol):
        stab = stabilizer_order(rep, threads)
        classes.append(OrbitClass(p, 2, rep, symbol, order // stab, stab))
    return classes


def level_p_orbits(p: int) -> List[OrbitClass]:
    """One representative per level-p type (each type is a single G_p-orbit)."""
    reps = {
        TypeSymbol.ZERO: (0, 0, 0, 0),
        TypeSymbol.TRIPLE: (1, 0, 0, 0),
        TypeSymbol.DOUBLE: (0, 1, 0, 0),
        TypeSymbol.ONE_ONE_ONE: (0, 1, 1, 0),
    }
    counts = expected_counts(p, 1)
    order = group_order(p)
    classes = []
    for symbol in LEVEL_P:
        rep = Form.of(reps[symbol], p) if symbol in reps else representative_mod_p(p, symbol)
        classes.append(OrbitClass(p, 1, rep, symbol, counts[symbol], order // counts[symbol]))
    return classes


@lru_cache(maxsize=None)
def _first_of_type(p: int, code: int) -> Tuple[int, int, int, int]:
    for x1 in range(p):
        forms = forms_slice(p, x1)
        hits = np.flatnonzero(type_codes_mod_p(forms, p) == code)
        if len(hits):
            return tuple(int(v) for v in forms[hits[0]])
    raise DomainError(f"no form of type {TypeSymbol.from_code(code)} mod {p}")


def representative_mod_p(p: int, symbol: TypeSymbol) -> Form:
    """Lexicographically first form mod p of a level-p type."""
    return Form.of(_first_of_type(p, symbol.code), p)


def representative_mod_p2(p: int, symbol: TypeSymbol) -> Form:
    """A representative of a level-p^2 type (nonsingular types lift their mod-p rep)."""
    if symbol in NONSINGULAR:
        return Form.of(representative_mod_p(p, symbol).coeffs, p * p)
    if symbol is TypeSymbol.DIVISIBLE:
        return Form(0, 0, 0, 0, p * p)
    members = _d_set_members(p, symbol)
    return Form.of(members[0].tolist(), p * p)


def orbit_decomposition(p: int, e: int, threads: int = 1) -> List[Tuple[Form, int]]:
    """(representative, orbit size) covering V_{p^e} for e in (1, 2), p >= 5.

    Level p^2 uses single-orbit nonsingular types, orbit_split for singular
    types and p times the level-p representatives for pV.
    """
    if e == 1:
        return [(c.representative, c.cardinality) for c in level_p_orbits(p)]
    if e != 2:
        raise DomainError("orbit decompositions are available for e in (1, 2)")
    if p < 5:
        raise UnsupportedRingError(f"orbit decomposition at p^2 needs p >= 5, got {p}")
    n = p * p
    counts = expected_counts(p, 2)
    out: List[Tuple[Form, int]] = []
    for symbol in NONSINGULAR:
        out.append((representative_mod_p2(p, symbol), counts[symbol]))
    for symbol in SINGULAR_P2:
        classes = orbit_split(p, symbol, threads)
        out.extend((c.representative, c.cardinality) for c in classes)
    for c in level_p_orbits(p):
        out.append((Form.of((p * v for v in c.representative.coeffs), n), c.cardinality))
    return out


# =============================================================================
# G_27 stabilizers
# =============================================================================

@dataclass(frozen=True)
class G27Record:
    """Stabilizer data for one 1^3_max representative mod 27."""
    representative: Tuple[int, int, int, int]
    automorphisms: int
    disc_order: int
    stabilizer_order: int
    orbit_size: int

    @property
    def expected_stabilizer(self) -> int:
        return self.automorphisms * 3 ** self.disc_order

    @property
    def matches(self) -> bool:
        return self.stabilizer_order == self.expected_stabilizer

    def to_dict(self) -> Dict:
        return {
            "representative": list(self.representative),
            "automorphisms": self.automorphisms,
            "disc_order": self.disc_order,
            "stabilizer_order": self.stabilizer_order,
            "expected_stabilizer": self.expected_stabilizer,
            "orbit_size": self.orbit_size,
            "match": self.matches,
        }


G27_REPRESENTATIVES: Tuple[Tuple[Tuple[int, int, int, int], int], ...] = (
    ((1, 0, 3, 3), 1),
    ((1, 0, 6, 3), 1),
    ((1, 3, 0, 3), 1),
    ((1, -3, 0, 3), 3),
    ((1, -3, 0, 12), 3),
    ((1, -3, 0, 21), 3),
    ((1, 0, 0, 3), 1),
    ((1, 0, 0, 12), 1),
    ((1, 0, 0, 21), 1),
)


def g27_stabilizer_table(threads: int = 1) -> Tuple[List[G27Record], bool]:
    """Stabilizer orders of the nine representatives in G_27.

    Returns the records and whether their orbits are pairwise disjoint and
    fill all 81 * n_9(1^3_max) lifts.
    """
    records = []
    orbits = []
    order = group_order(27)
    for coeffs, aut in G27_REPRESENTATIVES:
        rep = Form.of(coeffs, 27)
        stab = stabilizer_order(rep, threads)
        orbit = orbit_codes(rep, threads)
        orbits.append(orbit)
        records.append(
            G27Record(
                representative=coeffs,
                automorphisms=aut,
                disc_order=p_valuation(disc(Form.of(coeffs)), 3),
                stabilizer_order=stab,
                orbit_size=order // stab,
            )
        )
        if len(orbit) != order // stab:
            raise ClassificationError(f"orbit-stabilizer mismatch for {rep}")
    union = np.unique(np.concatenate(orbits))
    target = 81 * expected_counts(3, 2)[TypeSymbol.TRIPLE_MAX]
    partition_ok = len(union) == sum(len(o) for o in orbits) == target
    return records, partition_ok


# =============================================================================
# Reports
# =============================================================================

def verify_census(p: int, e: int, method: str = "auto", threads: int = 1) -> VerificationReport:
    """Census against the closed forms; at e = 2 also the nonmaximal total."""
    report = VerificationReport(f"census_p{p}_e{e}", workers=threads)
    counts = census(p, e, method, threads)
    for symbol, expected in expected_counts(p, e).items():
        report.add(f"{symbol}", expected, counts[symbol])
    report.add("total", (p ** e) ** 4, sum(counts.values()))
    if e == 2:
        report.add("nonmaximal", nonmaximal_count(p), sum(counts[s] for s in NONMAXIMAL))
    return report.finish()


def verify_g27(threads: int = 1) -> VerificationReport:
    report = VerificationReport("g27", workers=threads)
    records, partition_ok = g27_stabilizer_table(threads)
    for record in records:
        report.add(f"stabilizer {record.representative}", record.expected_stabilizer, record.stabilizer_order)
    report.check("orbits partition 1^3_max lifts", partition_ok)
    return report.finish()
