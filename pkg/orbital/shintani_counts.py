"""
SL2(Z)-classes of integral binary cubic forms and their zeta coefficients

Key functions:
- class_arrays / enumerate_classes: every class with 0 < +-disc <= X, with
  its SL2(Z)-stabilizer order (1 or 3)
- class_number_table / dual_class_number_table: h(n) and h*(n)
- bfs_canonical_oracle: independent orbit canonicalization for cross-checks
- weighted_coeffs and its specializations (orbital L-functions, divisible
  and partial zeta functions, theta_N, twisted L-functions)
- progression_partial_sums and the verification drivers

Reduction: a form of positive discriminant is reduced when its Hessian
(P, Q, R) satisfies |Q| <= P <= R; a form of negative discriminant is reduced
when its positive-definite real quadratic factor is Gauss-reduced, i.e. the
complex root lies in the closed fundamental domain. Only forms whose leading
nonzero coefficient is positive are kept (x and -x are SL2(Z)-equivalent via
-I). Boundary duplicates are merged by T, T^-1 and S moves inside the reduced
set.
"""

from __future__ import annotations

import json
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from orbital import config
from orbital.cyclotomic import CyclotomicSum
from orbital.errors import ClassificationError, DomainError, OracleInconclusiveError, ResourceCapError
from orbital.forms_core import (
    act,
    act_many,
    action_numerators,
    automorphism_from_stabilizer,
    automorphism_order,
    delone_faddeev,
    disc,
    disc_many,
    encode_forms,
    forms_slice,
    is_nonmaximal_at,
)
from orbital.gauss_fourier import FiniteFunction, divisible_indicator
from orbital.linear_groups import group_order, scan_group, sl2_order
from orbital.residue_rings import DirichletCharacter, all_characters, mobius
from orbital.types import Form, GroupElement
from utils.batching import map_chunks
from utils.report import VerificationReport

logger = logging.getLogger(__name__)

SMALL_PRIMES = (2, 3, 5, 7)

T = GroupElement(1, 1, 0, 1)
T_INV = GroupElement(1, -1, 0, 1)
S = GroupElement(0, -1, 1, 0)
S_INV = GroupElement(0, 1, -1, 0)

# Every SL2(Z)-stabilizer of a point of the closed fundamental domain, in both
# the row and column conventions (the list is closed under transposition).
_ST = S @ T
_TS = T @ S
STABILIZER_CANDIDATES: Tuple[GroupElement, ...] = tuple(
    GroupElement(*(sign * e for e in g.entries))
    for g in (GroupElement.identity(), S, _ST, _ST @ _ST, _TS, _TS @ _TS)
    for sign in (1, -1)
)


def _rows(g: GroupElement) -> np.ndarray:
    if g.det != 1:
        raise DomainError(f"{g.entries} is not in SL2(Z)")
    return np.array(action_numerators(*g.entries), dtype=np.int64)


def _apply(g: GroupElement, forms: np.ndarray) -> np.ndarray:
    return forms @ _rows(g).T


def _normalize_sign(forms: np.ndarray) -> np.ndarray:
    """Multiply each row by -1 when its leading nonzero coefficient is negative."""
    forms = np.asarray(forms, dtype=np.int64)
    lead = np.where(forms[:, 0] != 0, forms[:, 0], np.where(forms[:, 1] != 0, forms[:, 1], forms[:, 2]))
    return np.where((lead < 0)[:, None], -forms, forms)


def _check_bound(bound: int) -> None:
    if bound < 1:
        raise DomainError(f"discriminant bound must be positive, got {bound}")
    if bound > config.MAX_CLASS_BOUND:
        raise ResourceCapError(f"class enumeration up to {bound}", size=bound, cap=config.MAX_CLASS_BOUND)


def _stack(parts: Iterable[np.ndarray]) -> np.ndarray:
    parts = [p for p in parts if len(p)]
    return np.concatenate(parts) if parts else np.zeros((0, 4), dtype=np.int64)


# =============================================================================
# Reduced forms of positive discriminant
# =============================================================================

def _positive_block(p: int, bound: int) -> np.ndarray:
    """Reduced forms with Hessian (p, q, r), |q| <= p <= r, and disc <= bound."""
    out = []
    qh = np.arange(-p, p + 1, dtype=np.int64)
    # 27 D x1^2 <= 4 P^3 and D >= P^2 give x1^2 <= 4P/27
    for x1 in range(1, math.isqrt(4 * p // 27) + 1):
        # the cubic covariant at (1, 0) is 2 x2 P - 3 x1 Q and is bounded by 2 P^(3/2)
        half = math.sqrt(p)
        lo = np.floor(3 * x1 * qh / (2 * p) - half).astype(np.int64) - 1
        width = int(2 * half) + 4
        x2 = lo[:, None] + np.arange(width, dtype=np.int64)[None, :]
        q = np.broadcast_to(qh[:, None], x2.shape)
        num3 = x2 * x2 - p
        ok = num3 % (3 * x1) == 0
        x3 = num3 // (3 * x1)
        num4 = x2 * x3 - q
        ok &= num4 % (9 * x1) == 0
        x4 = num4 // (9 * x1)
        r = x3 * x3 - 3 * x2 * x4
        d3 = 4 * p * r - q * q
        ok &= (r >= p) & (d3 > 0) & (d3 <= 3 * bound)
        if ok.any():
            out.append(np.stack([np.full(ok.sum(), x1), x2[ok], x3[ok], x4[ok]], axis=1))
    s = math.isqrt(p)
    if s * s == p:
        # x1 = 0 forces x2 = sqrt(P)
        for q in range(-p, p + 1):
            if q % s:
                continue
            x3 = q // s
            r_max = (3 * bound + q * q) // (4 * p)
            lo, hi = -((r_max - x3 * x3) // (3 * s)), (x3 * x3 - p) // (3 * s)
            if hi < lo:
                continue
            x4 = np.arange(lo, hi + 1, dtype=np.int64)
            block = np.empty((len(x4), 4), dtype=np.int64)
            block[:, 0], block[:, 1], block[:, 2], block[:, 3] = 0, s, x3, x4
            out.append(block)
    return _stack(out)


def positive_reduced_forms(bound: int, threads: int = 1) -> np.ndarray:
    """All sign-normalized forms with 0 < disc <= bound and reduced Hessian."""
    chunks = range(1, math.isqrt(bound) + 1)
    parts = map_chunks(chunks, lambda p: _positive_block(p, bound), threads, logger, "reduced forms, disc > 0", len(chunks))
    forms = _stack(parts)
    discs = disc_many(forms)
    if ((discs <= 0) | (discs > bound)).any():
        raise ClassificationError("Hessian enumeration produced a form outside the discriminant range")
    return forms


# =============================================================================
# Reduced forms of negative discriminant
# =============================================================================

def _in_fundamental_domain(forms: np.ndarray) -> np.ndarray:
    """Closed-domain test (with boundary tolerance) on the complex root; needs x1 != 0."""
    eps = config.BOUNDARY_EPSILON
    keep = np.zeros(len(forms), dtype=bool)
    step = 500_000
    for start in range(0, len(forms), step):
        chunk = forms[start:start + step].astype(float)
        c = chunk[:, 1:] / chunk[:, :1]
        comp = np.zeros((len(chunk), 3, 3))
        comp[:, 1, 0] = comp[:, 2, 1] = 1.0
        comp[:, 0, 2], comp[:, 1, 2], comp[:, 2, 2] = -c[:, 2], -c[:, 1], -c[:, 0]
        roots = np.linalg.eigvals(comp)
        omega = roots[np.arange(len(roots)), np.argmax(roots.imag, axis=1)]
        keep[start:start + step] = (np.abs(omega.real) <= 0.5 + eps) & (np.abs(omega) ** 2 >= 1 - eps)
    return keep


def _negative_block(x1: int, bound: int, step: int) -> np.ndarray:
    """Reduced forms with leading coefficient x1 > 0 and -bound <= disc < 0.

    With omega = s + iy in the closed fundamental domain, theta the real root
    and d = |theta - omega|: |disc| = 4 x1^4 d^4 y^2 >= 3 x1^4 d^4, which bounds
    theta, |omega| and hence x2, x3, x4.
    """
    dmax = (bound / (3 * x1 ** 4)) ** 0.25
    tmax = 0.5 + dmax
    b2 = int(x1 * (1 + tmax)) + 1
    b3 = int(x1 * (0.25 + dmax * dmax + tmax)) + 1
    b4 = int(x1 * tmax * (0.25 + dmax * dmax)) + 1
    x2 = np.arange(-(b2 // step) * step, b2 + 1, step, dtype=np.int64)
    x3 = np.arange(-(b3 // step) * step, b3 + 1, step, dtype=np.int64)
    x2, x3 = (a.ravel() for a in np.meshgrid(x2, x3, indexing="ij"))
    # disc as a quadratic in x4: -27 x1^2 x4^2 + beta x4 + gamma >= -bound
    a = 27.0 * x1 * x1
    beta = (18 * x1 * x2 * x3 - 4 * x2 ** 3).astype(float)
    gamma = (x2 * x2 * x3 * x3 - 4 * x1 * x3 ** 3).astype(float)
    disc_q = beta * beta + 4 * a * (gamma + bound)
    live = disc_q >= 0
    root = np.sqrt(np.where(live, disc_q, 0.0))
    lo = np.maximum(np.floor((beta - root) / (2 * a)) - 1, -b4).astype(np.int64)
    hi = np.minimum(np.ceil((beta + root) / (2 * a)) + 1, b4).astype(np.int64)
    counts = np.where(live, np.maximum(hi - lo + 1, 0), 0)
    total = int(counts.sum())
    if not total:
        return np.zeros((0, 4), dtype=np.int64)
    starts = np.repeat(lo, counts)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(counts) - counts, counts)
    forms = np.stack(
        [np.full(total, x1, dtype=np.int64), np.repeat(x2, counts), np.repeat(x3, counts), starts + offsets], axis=1
    )
    d = disc_many(forms)
    forms = forms[(d < 0) & (d >= -bound)]
    return forms[_in_fundamental_domain(forms)]


def _negative_leading_zero(bound: int, step: int) -> np.ndarray:
    """x1 = 0: x = v (x2 u^2 + x3 u v + x4 v^2) with |x3| <= x2 <= x4."""
    out = []
    top = int((bound / 3) ** 0.25) + 1
    for x2 in range(step, top + 1, step):
        for x3 in range(-(x2 // step) * step, x2 + 1, step):
            hi = (bound // (x2 * x2) + x3 * x3) // (4 * x2)
            if hi < x2:
                continue
            x4 = np.arange(x2, hi + 1, dtype=np.int64)
            block = np.empty((len(x4), 4), dtype=np.int64)
            block[:, 0], block[:, 1], block[:, 2], block[:, 3] = 0, x2, x3, x4
            out.append(block)
    forms = _stack(out)
    d = disc_many(forms)
    return forms[(d < 0) & (d >= -bound)]


def negative_reduced_forms(bound: int, threads: int = 1, dual: bool = False) -> np.ndarray:
    """All sign-normalized forms with -bound <= disc < 0 whose complex root is reduced.

    ``dual`` restricts to the sublattice 3 | x2, 3 | x3.
    """
    step = 3 if dual else 1
    top = int((16 * bound / 27) ** 0.25) + 1
    chunks = range(1, top + 1)
    parts = list(map_chunks(chunks, lambda x1: _negative_block(x1, bound, step), threads, logger,
                            "reduced forms, disc < 0", len(chunks)))
    parts.append(_negative_leading_zero(bound, step))
    return _stack(parts)


# =============================================================================
# Classes
# =============================================================================

def _index(forms: np.ndarray) -> Dict[Tuple[int, ...], int]:
    return {tuple(row): i for i, row in enumerate(forms.tolist())}


def _label_classes(forms: np.ndarray) -> Tuple[int, np.ndarray]:
    """Connected components of the reduced set under T, T^-1 and S."""
    index = _index(forms)
    rows, cols = [], []
    for g in (T, T_INV, S):
        images = _normalize_sign(_apply(g, forms))
        for i, row in enumerate(images.tolist()):
            j = index.get(tuple(row))
            if j is not None and j != i:
                rows.append(i)
                cols.append(j)
    n = len(forms)
    graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    return connected_components(graph, directed=True, connection="weak")


def _stabilizer_counts(forms: np.ndarray) -> np.ndarray:
    counts = np.zeros(len(forms), dtype=np.int64)
    for g in STABILIZER_CANDIDATES:
        counts += (_apply(g, forms) == forms).all(axis=1)
    return counts


@dataclass(frozen=True, eq=False)
class ClassArrays:
    """Reduced forms, their class labels, and one row per class.

    Attributes:
        bound: X
        sign: +1 or -1
        dual: True for the iota-sublattice (3 | x2, 3 | x3) enumerated to 27X
        members: every reduced sign-normalized form, (m, 4)
        labels: class index of each member
        representatives: lexicographically least member per class, (k, 4)
        discriminants: signed disc per class
        stabilizers: SL2(Z)-stabilizer order per class
    """
    bound: int
    sign: int
    dual: bool
    members: np.ndarray
    labels: np.ndarray
    representatives: np.ndarray
    discriminants: np.ndarray
    stabilizers: np.ndarray

    def __len__(self) -> int:
        return len(self.representatives)

    @property
    def norms(self) -> np.ndarray:
        """|P| for the zeta function: |disc| (or |disc|/27 on the dual side)."""
        n = np.abs(self.discriminants)
        return n // 27 if self.dual else n

    def weights(self) -> np.ndarray:
        """3 / |Stab| as integers."""
        return 3 // self.stabilizers


def _build_classes(forms: np.ndarray, bound: int, sign: int, dual: bool) -> ClassArrays:
    if not len(forms):
        empty = np.zeros((0, 4), dtype=np.int64)
        return ClassArrays(bound, sign, dual, empty, np.zeros(0, dtype=np.int64), empty,
                           np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    k, labels = _label_classes(forms)
    stab = _stabilizer_counts(forms)
    order = np.lexsort((forms[:, 3], forms[:, 2], forms[:, 1], forms[:, 0], labels))
    first = order[np.flatnonzero(np.r_[True, np.diff(labels[order]) != 0])]
    reps = forms[first]
    stabilizers = np.zeros(k, dtype=np.int64)
    np.maximum.at(stabilizers, labels, stab)
    if not np.isin(stabilizers, (1, 3)).all():
        raise ClassificationError(f"stabilizer orders outside {{1, 3}}: {sorted(set(stabilizers.tolist()))}")
    discs = disc_many(reps)
    keys = np.lexsort((reps[:, 3], reps[:, 2], reps[:, 1], reps[:, 0], np.abs(discs)))
    relabel = np.empty(k, dtype=np.int64)
    relabel[keys] = np.arange(k)
    return ClassArrays(bound, sign, dual, forms, relabel[labels], reps[keys], discs[keys], stabilizers[labels[first]][keys])


@lru_cache(maxsize=8)
def _class_arrays(bound: int, sign: int, dual: bool, threads: int) -> ClassArrays:
    effective = 27 * bound if dual else bound
    _check_bound(effective)
    started = time.time()
    if sign > 0:
        forms = positive_reduced_forms(effective, threads)
        if dual:
            forms = forms[(forms[:, 1] % 3 == 0) & (forms[:, 2] % 3 == 0)]
    else:
        forms = negative_reduced_forms(effective, threads, dual)
    if dual:
        forms = forms[np.abs(disc_many(forms)) % 27 == 0]
    arrays = _build_classes(forms, bound, sign, dual)
    logger.info(
        f"{'dual ' if dual else ''}classes with 0 < {'+' if sign > 0 else '-'}disc <= {effective}: "
        f"{len(arrays)} classes from {len(forms)} reduced forms in {time.time() - started:.1f}s"
    )
    return arrays


def class_arrays(bound: int, sign: int, dual: bool = False, threads: int = 1) -> ClassArrays:
    """Classes with 0 < sign*disc <= bound (or the dual side up to |P*| <= bound)."""
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    return _class_arrays(int(bound), sign, bool(dual), max(1, int(threads)))


@dataclass(frozen=True)
class ClassRecord:
    """One SL2(Z)-class of integral binary cubic forms."""

    representative: Form
    disc: int
    stabilizer: int

    def __post_init__(self) -> None:
        if self.stabilizer not in (1, 3):
            raise DomainError(f"stabilizer order {self.stabilizer} is not 1 or 3")
        if self.disc == 0:
            raise DomainError("classes have nonzero discriminant")

    def is_reducible(self) -> bool:
        """Whether the form has a linear factor over Q."""
        x1, x2, x3, x4 = self.representative.coeffs
        if x1 == 0 or x4 == 0:
            return True
        t = sympy.Symbol("t")
        _, factors = sympy.factor_list(x1 * t ** 3 + x2 * t ** 2 + x3 * t + x4)
        return any(sympy.degree(f, t) < 3 for f, _ in factors)

    def maximality_mask(self, primes: Sequence[int] = SMALL_PRIMES) -> int:
        """Bit i set when the Delone-Faddeev ring is maximal at primes[i]."""
        ring = delone_faddeev(self.representative)
        mask = 0
        for i, p in enumerate(primes):
            if not is_nonmaximal_at(ring, p):
                mask |= 1 << i
        return mask

    def to_dict(self) -> Dict:
        return {"representative": list(self.representative.coeffs), "disc": self.disc, "stabilizer": self.stabilizer}

    @classmethod
    def from_dict(cls, data: Dict) -> "ClassRecord":
        return cls(Form.of(data["representative"]), data["disc"], data["stabilizer"])


def enumerate_classes(bound: int, sign: int, threads: int = 1) -> List[ClassRecord]:
    """Class representatives with 0 < sign*disc <= bound, sorted by (|disc|, representative)."""
    arrays = class_arrays(bound, sign, threads=threads)
    return [
        ClassRecord(Form.of(rep), int(d), int(s))
        for rep, d, s in zip(arrays.representatives.tolist(), arrays.discriminants.tolist(), arrays.stabilizers.tolist())
    ]


def stabilizer_elements(x: Form) -> List[GroupElement]:
    """SL2(Z)-stabilizer of a reduced integral form."""
    return [g for g in STABILIZER_CANDIDATES if act(g, x) == x]


# =============================================================================
# Class number tables
# =============================================================================

@dataclass
class ClassNumberTable:
    """h(n) = sum over classes with |P| = n of 1/|Stab|.

    Attributes:
        sign: +1 or -1
        bound: X
        coefficients: n -> h(n), only nonzero entries
        dual: True for h*(n)
        metadata: generation details (class count, wall time, timestamp)
    """
    sign: int
    bound: int
    coefficients: Dict[int, Fraction]
    dual: bool = False
    metadata: Dict = field(default_factory=dict)

    def __getitem__(self, n: int) -> Fraction:
        return self.coefficients.get(n, Fraction(0))

    def total(self, upto: Optional[int] = None) -> Fraction:
        upto = self.bound if upto is None else upto
        return sum((h for n, h in self.coefficients.items() if n <= upto), Fraction(0))

    def to_dict(self) -> Dict:
        return {
            "manifest": {
                "version": config.TABLE_FORMAT_VERSION,
                "sign": self.sign,
                "bound": self.bound,
                "dual": self.dual,
                **self.metadata,
            },
            "coefficients": {
                str(n): {"num": h.numerator, "den": h.denominator} for n, h in sorted(self.coefficients.items())
            },
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ClassNumberTable":
        manifest = dict(data["manifest"])
        version = manifest.pop("version", 1)
        if version > config.TABLE_FORMAT_VERSION:
            raise DomainError(f"table format version {version} is newer than {config.TABLE_FORMAT_VERSION}")
        sign, bound, dual = manifest.pop("sign"), manifest.pop("bound"), manifest.pop("dual", False)
        coeffs = {int(n): Fraction(v["num"], v["den"]) for n, v in data["coefficients"].items()}
        return cls(sign, bound, coeffs, dual, manifest)

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)
            f.write("\n")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ClassNumberTable":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def _table_from_arrays(arrays: ClassArrays, bound: int) -> ClassNumberTable:
    norms = arrays.norms
    keep = norms <= bound
    acc = np.bincount(norms[keep], weights=arrays.weights()[keep], minlength=bound + 1)
    coeffs = {n: Fraction(int(round(v)), 3) for n, v in enumerate(acc) if v}
    meta = {"classes": int(keep.sum()), "generated": datetime.now().isoformat(timespec="seconds")}
    return ClassNumberTable(arrays.sign, bound, coeffs, arrays.dual, meta)


def class_number_table(bound: int, sign: int, threads: int = 1) -> ClassNumberTable:
    return _table_from_arrays(class_arrays(bound, sign, threads=threads), bound)


def dual_class_number_table(bound: int, sign: int, threads: int = 1) -> ClassNumberTable:
    """h*(n) through the sublattice iota(V*_Z) = {3 | x2, 3 | x3}, with |P*| = |P|/27."""
    return _table_from_arrays(class_arrays(bound, sign, dual=True, threads=threads), bound)


# =============================================================================
# BFS oracle
# =============================================================================

_GENERATORS = tuple((g.entries, [tuple(r) for r in action_numerators(*g.entries)]) for g in (T, T_INV, S, S_INV))
_IDENTITY = (1, 0, 0, 1)


def _mat_mul(m: Tuple[int, ...], n: Tuple[int, ...]) -> Tuple[int, int, int, int]:
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _mat_inv(m: Tuple[int, ...]) -> Tuple[int, int, int, int]:
    a, b, c, d = m
    return (d, -b, -c, a)


def _group_closure(elements: Iterable[Tuple[int, ...]], cap: int = 24) -> set:
    group = {_IDENTITY} | set(elements)
    frontier = list(group)
    while frontier:
        new = []
        for g in frontier:
            for h in list(group):
                k = _mat_mul(g, h)
                if k not in group:
                    group.add(k)
                    new.append(k)
        if len(group) > cap:
            raise ClassificationError(f"stabilizer closure exceeded {cap} elements")
        frontier = new
    return group


@dataclass(frozen=True)
class OracleResult:
    """Outcome of the breadth-first canonicalization."""

    canonical: Form
    visited: int
    height_cap: int
    truncated: bool
    stabilizer_order: int


def bfs_canonical_oracle(
    x: Form,
    height_cap: Optional[int] = None,
    max_visited: Optional[int] = None,
    strict: bool = False,
) -> OracleResult:
    """Least element, in (height, lexicographic) order, of the orbit of x pruned to height <= cap.

    Stabilizer elements are collected from every edge closing a cycle back onto
    a visited form. ``truncated`` marks a closure cut by ``max_visited``; such a
    result is inconclusive, and with ``strict`` it raises OracleInconclusiveError.
    """
    if x.modulus is not None:
        raise DomainError("the oracle works on integral forms")
    d = disc(x)
    if d == 0:
        raise DomainError("the oracle needs a nonzero discriminant")
    cap = height_cap or 20 * max(x.height(), math.ceil(abs(d) ** 0.25))
    limit = max_visited or config.ORACLE_MAX_VISITED
    start = x.coeffs
    visited = {start: _IDENTITY}
    queue = deque([start])
    stab = set()
    truncated = False
    while queue:
        y = queue.popleft()
        m_y = visited[y]
        for g, rows in _GENERATORS:
            z = tuple(sum(r * c for r, c in zip(row, y)) for row in rows)
            if max(abs(c) for c in z) > cap:
                continue
            m = _mat_mul(g, m_y)
            m_z = visited.get(z)
            if m_z is not None:
                s = _mat_mul(_mat_inv(m_z), m)
                if s != _IDENTITY:
                    stab.add(s)
                continue
            if len(visited) >= limit:
                truncated = True
                continue
            visited[z] = m
            queue.append(z)
    if truncated and strict:
        raise OracleInconclusiveError(f"orbit of {x} exceeds {limit} forms below height {cap}")
    canonical = min(visited, key=lambda t: (max(abs(c) for c in t), t))
    return OracleResult(Form.of(canonical), len(visited), cap, truncated, len(_group_closure(stab)))


# =============================================================================
# Weighted coefficients
# =============================================================================

def weighted_coeffs(
    f: FiniteFunction,
    bound: int,
    sign: int,
    chi: Optional[DirichletCharacter] = None,
    rng: Optional[np.random.Generator] = None,
    samples: int = 50,
    threads: int = 1,
) -> Dict[int, CyclotomicSum]:
    """Coefficients of xi(s, f): sum over classes with |disc| = n of f(x mod N) / |Stab|.

    When ``chi`` is given, f is first sampled for f(g a) = chi(det g) f(a).
    """
    if f.dual:
        raise DomainError("weighted_coeffs needs a function on V_N")
    if chi is not None:
        f.check_relative_invariance(chi, rng if rng is not None else np.random.default_rng(0), samples)
    arrays = class_arrays(bound, sign, threads=threads)
    n = f.modulus
    m = f.root_order
    codes = encode_forms(arrays.representatives % n, n)
    idx = np.searchsorted(f.support, codes)
    idx_c = np.minimum(idx, max(len(f.support) - 1, 0))
    hit = (idx < len(f.support)) & (f.support[idx_c] == codes) if len(f.support) else np.zeros(len(codes), bool)
    out = np.zeros((bound + 1, m), dtype=np.int64)
    np.add.at(out, arrays.norms[hit], f.counts[idx_c[hit]] * arrays.weights()[hit, None])
    den = 3 * f.denominator
    return {k: CyclotomicSum(m, tuple(out[k].tolist()), den).normalized() for k in range(1, bound + 1) if out[k].any()}


def orbital_l_coeffs(chi: DirichletCharacter, a: Form, bound: int, sign: int, threads: int = 1) -> Dict[int, CyclotomicSum]:
    """Coefficients of xi(s, chi, a) = xi(s, f_{chi,a})."""
    return weighted_coeffs(FiniteFunction.orbit_function(chi, a, threads), bound, sign, threads=threads)


def divisible_coeffs(m: int, bound: int, sign: int, threads: int = 1) -> Dict[int, Fraction]:
    """Coefficients of xi_m(s): classes with m | P(x)."""
    if m == 1:
        return dict(class_number_table(bound, sign, threads).coefficients)
    values = weighted_coeffs(divisible_indicator(m), bound, sign, threads=threads)
    return {n: v.rational_value() for n, v in values.items()}


def partial_zeta_function(a: Form, threads: int = 1) -> FiniteFunction:
    """f_a(x) = [x in SL2(Z/N) a] |SL2(Z/N)_a| / |SL2(Z/N)|."""
    n = a.modulus
    if n is None:
        raise DomainError("partial zeta functions need a form mod N")

    def worker(chunk):
        images = act_many(chunk.alpha, chunk.beta, chunk.gamma, chunk.delta, chunk.det_inv, a.coeffs, n)
        codes = encode_forms(images, n)
        return np.unique(codes), int((codes == encode_forms(np.array([a.coeffs]), n)[0]).sum())

    parts = scan_group(n, worker, threads, special=True, description=f"SL2 orbit of {a}")
    support = np.unique(np.concatenate([p[0] for p in parts]))
    stab = sum(p[1] for p in parts)
    weight = Fraction(stab, sl2_order(n))
    counts = np.full((len(support), 1), weight.numerator, dtype=np.int64)
    return FiniteFunction(n, support, counts, 1, weight.denominator)


def partial_zeta_coeffs(a: Form, bound: int, sign: int, threads: int = 1) -> Dict[int, Fraction]:
    """Coefficients of xi(s, a) from the SL2(Z/N)-orbit weight."""
    values = weighted_coeffs(partial_zeta_function(a, threads), bound, sign, threads=threads)
    return {n: v.rational_value() for n, v in values.items()}


def theta_coeffs(modulus: int, bound: int, sign: int, threads: int = 1) -> Dict[int, Fraction]:
    """theta_N(s) = sum over m | N of mu(m) m xi_m(s)."""
    out: Dict[int, Fraction] = {}
    for m in sympy.divisors(modulus):
        mu = mobius(m)
        if not mu:
            continue
        for n, h in divisible_coeffs(m, bound, sign, threads).items():
            out[n] = out.get(n, Fraction(0)) + mu * m * h
    return {n: v for n, v in out.items() if v}


def twisted_coeffs(chi: DirichletCharacter, r: int, bound: int, sign: int, threads: int = 1) -> Dict[int, CyclotomicSum]:
    """Coefficients of xi(s, r, chi): classes with r | P(x), (P(x)/r, m) = 1, weighted chi(P(x)/r)."""
    if r < 1:
        raise DomainError(f"r must be positive, got {r}")
    chi = chi.primitive()
    m, order = chi.modulus, chi.order
    table = chi.exponent_table()
    arrays = class_arrays(bound, sign, threads=threads)
    p = arrays.discriminants
    keep = p % r == 0
    q = p[keep] // r
    e = table[q % m]
    unit = e >= 0
    out = np.zeros((bound + 1, order), dtype=np.int64)
    np.add.at(out, (np.abs(p[keep][unit]), e[unit]), arrays.weights()[keep][unit])
    return {k: CyclotomicSum(order, tuple(out[k].tolist()), 3).normalized() for k in range(1, bound + 1) if out[k].any()}


def twisted_weight(chi: DirichletCharacter, r: int = 1) -> FiniteFunction:
    """h with xi(s, h) = xi(s, r, chi), for r = 1 (h on V_m) or r = m = p prime (h on V_{p^2})."""
    chi = chi.primitive()
    m, order = chi.modulus, chi.order
    table = chi.exponent_table()
    if r == 1:
        n = m
    elif r == m and sympy.isprime(m) and m > 3:
        n = m * m
    else:
        raise DomainError(f"twisted weights are built for r = 1 or r = m prime > 3 (m={m}, r={r})")
    codes, exps = [], []
    for x1 in range(n):
        forms = forms_slice(n, x1)
        d = disc_many(forms, n)
        if r > 1:
            # ord_p P = 1 exactly
            keep = (d % m == 0) & (d != 0)
            forms, d = forms[keep], d[keep] // m
        e = table[d % m]
        codes.append(encode_forms(forms[e >= 0], n))
        exps.append(e[e >= 0])
    codes, exps = np.concatenate(codes), np.concatenate(exps)
    counts = np.zeros((len(codes), order), dtype=np.int64)
    counts[np.arange(len(codes)), exps] = 1
    sort = np.argsort(codes)
    return FiniteFunction(n, codes[sort], counts[sort], order, 1)


def progression_partial_sums(
    table: ClassNumberTable,
    modulus: int,
    residue: int,
    checkpoints: Optional[Sequence[int]] = None,
) -> Dict[int, Fraction]:
    """sum over n <= X with n = residue mod N of h(n), at each checkpoint X."""
    checkpoints = sorted(checkpoints or [table.bound])
    if checkpoints[-1] > table.bound:
        raise DomainError(f"checkpoint {checkpoints[-1]} exceeds the table bound {table.bound}")
    out, running, i = {}, Fraction(0), 0
    terms = sorted((n, h) for n, h in table.coefficients.items() if n % modulus == residue % modulus)
    for x in checkpoints:
        while i < len(terms) and terms[i][0] <= x:
            running += terms[i][1]
            i += 1
        out[x] = running
    return out


# =============================================================================
# Verification drivers
# =============================================================================

def verify_ohno_nakagawa(bound: int = config.ON_BOUND, threads: int = 1) -> VerificationReport:
    """h*_+(n) = h_-(n) and h*_-(n) = 3 h_+(n) for every n <= bound."""
    report = VerificationReport(f"ohno_nakagawa_X{bound}", workers=threads)
    h_plus, h_minus = class_number_table(bound, 1, threads), class_number_table(bound, -1, threads)
    d_plus, d_minus = dual_class_number_table(bound, 1, threads), dual_class_number_table(bound, -1, threads)
    for name, lhs, rhs, factor in (("h*_+(n) = h_-(n)", d_plus, h_minus, 1), ("h*_-(n) = 3 h_+(n)", d_minus, h_plus, 3)):
        bad = [n for n in range(1, bound + 1) if lhs[n] != factor * rhs[n]]
        report.add(f"{name} for n <= {bound}", bound, bound - len(bad), note=f"first mismatches {bad[:5]}" if bad else "")
    report.add("h_+(1)", Fraction(1, 3), h_plus[1])
    report.add(f"sum of h*_- vs 3 sum of h_+ up to {bound}", 3 * h_plus.total(), d_minus.total())
    return report.finish()


def verify_oracle(bound: int = config.ORACLE_BOUND, threads: int = 1) -> VerificationReport:
    """Reduction-based classes and the BFS oracle give the same partition and stabilizers."""
    report = VerificationReport(f"oracle_X{bound}", workers=threads)
    for sign in (1, -1):
        arrays = class_arrays(bound, sign, threads=threads)
        results = [bfs_canonical_oracle(Form.of(row)) for row in arrays.members.tolist()]
        canon = [r.canonical.coeffs for r in results]
        report.check(f"sign {sign}: no truncated oracle runs", not any(r.truncated for r in results))
        by_label: Dict[int, set] = {}
        for label, c in zip(arrays.labels.tolist(), canon):
            by_label.setdefault(label, set()).add(c)
        one_each = all(len(v) == 1 for v in by_label.values())
        distinct = len({next(iter(v)) for v in by_label.values()}) == len(by_label)
        report.check(f"sign {sign}: members of a class share one oracle canonical form", one_each)
        report.check(f"sign {sign}: distinct classes have distinct canonical forms ({len(arrays)} classes)", distinct)
        first = {}
        for i, label in enumerate(arrays.labels.tolist()):
            first.setdefault(label, i)
        mismatched = [
            arrays.representatives[k].tolist() for k in range(len(arrays))
            if results[first[k]].stabilizer_order != arrays.stabilizers[k]
        ]
        report.check(f"sign {sign}: oracle stabilizer orders agree", not mismatched, note=str(mismatched[:3]))
    return report.finish()


def verify_stabilizer_rings(bound: int, threads: int = 1) -> VerificationReport:
    """Classes with stabilizer 3 carry an order-3 automorphism of their cubic ring."""
    report = VerificationReport(f"stabilizer_rings_X{bound}", workers=threads)
    for sign in (1, -1):
        for record in enumerate_classes(bound, sign, threads):
            if record.stabilizer != 3:
                continue
            x = record.representative
            g = next(g for g in stabilizer_elements(x) if g.entries != (1, 0, 0, 1))
            ring = delone_faddeev(x)
            phi = automorphism_from_stabilizer(ring, g)
            report.check(f"{x} (disc {record.disc})", phi is not None and automorphism_order(ring, phi) == 3)
    return report.finish()


def verify_partial_zeta(a: Form, bound: int = config.PARTIAL_ZETA_BOUND, sign: int = 1, threads: int = 1) -> VerificationReport:
    """xi(s, a) = |G_N|^-1 sum over chi of xi(s, chi, a), coefficient-wise."""
    n = a.modulus
    report = VerificationReport(f"partial_zeta_N{n}", workers=threads)
    direct = partial_zeta_coeffs(a, bound, sign, threads)
    averaged: Dict[int, CyclotomicSum] = {}
    for chi in all_characters(n):
        for k, v in orbital_l_coeffs(chi, a, bound, sign, threads).items():
            averaged[k] = averaged[k] + v if k in averaged else v
    size = group_order(n)
    bad = [k for k in range(1, bound + 1)
           if not (averaged.get(k, CyclotomicSum.zero()) * Fraction(1, size)).equals(direct.get(k, Fraction(0)))]
    report.add(f"a={list(a.coeffs)} sign {sign}: coefficients n <= {bound} agree", bound, bound - len(bad),
               note=f"first mismatches {bad[:5]}" if bad else "")
    return report.finish()


def verify_theta(modulus: int, bound: int, sign: int = 1, threads: int = 1) -> VerificationReport:
    """theta_N coefficients equal h(n) sum over m | gcd(N, n) of mu(m) m."""
    report = VerificationReport(f"theta_N{modulus}", workers=threads)
    theta = theta_coeffs(modulus, bound, sign, threads)
    table = class_number_table(bound, sign, threads)
    bad = []
    for n in range(1, bound + 1):
        factor = sum(mobius(m) * m for m in sympy.divisors(math.gcd(modulus, n)))
        if theta.get(n, Fraction(0)) != factor * table[n]:
            bad.append(n)
    report.add(f"theta_{modulus} sign {sign} for n <= {bound}", bound, bound - len(bad),
               note=f"first mismatches {bad[:5]}" if bad else "")
    return report.finish()


def verify_twisted(chi: DirichletCharacter, r: int, bound: int, sign: int = 1, threads: int = 1) -> VerificationReport:
    """xi(s, r, chi) computed from discriminants agrees with xi(s, h) for the finite weight h."""
    report = VerificationReport(f"twisted_m{chi.primitive().modulus}_r{r}", workers=threads)
    direct = twisted_coeffs(chi, r, bound, sign, threads)
    via_h = weighted_coeffs(twisted_weight(chi, r), bound, sign, threads=threads)
    bad = [k for k in range(1, bound + 1)
           if not direct.get(k, CyclotomicSum.zero()).equals(via_h.get(k, CyclotomicSum.zero()))]
    report.add(f"sign {sign}, n <= {bound}", bound, bound - len(bad), note=f"first mismatches {bad[:5]}" if bad else "")
    return report.finish()
