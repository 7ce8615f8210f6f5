"""
Enumeration of GL2(Z/NZ) and SL2(Z/NZ)

Key functions:
- group_order / sl2_order: closed-form orders
- unit_mask / inverse_table: unit tests and inverses in Z/NZ
- iter_group_chunks: deterministic row-major enumeration in alpha-slices,
  unit-determinant filtered, as numpy arrays ready for act_many
- scan_group: parallel map over the slices with exact merging
- random_element / random_form: seeded sampling helpers
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Callable, Iterator, List, Optional, Tuple, TypeVar

import numpy as np
import sympy

from orbital import config
from orbital.errors import ResourceCapError
from orbital.types import DualForm, Form, GroupElement
from utils.batching import map_chunks

logger = logging.getLogger(__name__)

R = TypeVar("R")


def group_order(n: int) -> int:
    """|GL2(Z/nZ)| = n^4 * prod_{p | n} (1 - 1/p)(1 - 1/p^2)."""
    order = n ** 4
    for p in sympy.primefactors(n):
        order = order // (p * p) * (p - 1) * (p * p - 1) // p
    return order


def sl2_order(n: int) -> int:
    """|SL2(Z/nZ)| = n^3 * prod_{p | n} (1 - 1/p^2)."""
    order = n ** 3
    for p in sympy.primefactors(n):
        order = order // (p * p) * (p * p - 1)
    return order


@lru_cache(maxsize=None)
def unit_mask(n: int) -> np.ndarray:
    return np.array([gcd(t, n) == 1 for t in range(n)], dtype=bool)


@lru_cache(maxsize=None)
def inverse_table(n: int) -> np.ndarray:
    """inv[t] = t^-1 mod n for units, 0 elsewhere."""
    table = np.zeros(n, dtype=np.int64)
    for t in range(n):
        if gcd(t, n) == 1:
            table[t] = pow(t, -1, n) if n > 1 else 0
    return table


@dataclass(frozen=True)
class GroupChunk:
    """A slice of G_N as parallel int64 arrays."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    det: np.ndarray
    det_inv: np.ndarray
    modulus: int

    def __len__(self) -> int:
        return len(self.alpha)

    def element(self, i: int) -> GroupElement:
        return GroupElement(
            int(self.alpha[i]), int(self.beta[i]), int(self.gamma[i]), int(self.delta[i]), self.modulus
        )


@lru_cache(maxsize=8)
def _tail_grid(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    b, c, d = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    return b.ravel().astype(np.int64), c.ravel().astype(np.int64), d.ravel().astype(np.int64)


def check_group_cap(n: int, cap: Optional[int] = None) -> int:
    size = group_order(n)
    cap = config.MAX_GROUP_SCAN if cap is None else cap
    if size > cap:
        raise ResourceCapError(f"|GL2(Z/{n})| scan", size=size, cap=cap)
    return size


def alpha_slice(n: int, alpha: int, special: bool = False) -> GroupChunk:
    """All g in G_N (or SL2 when ``special``) with first entry alpha."""
    b, c, d = _tail_grid(n)
    det = (alpha * d - b * c) % n
    mask = det == 1 if special else unit_mask(n)[det]
    det = det[mask]
    return GroupChunk(
        alpha=np.full(int(mask.sum()), alpha, dtype=np.int64),
        beta=b[mask],
        gamma=c[mask],
        delta=d[mask],
        det=det,
        det_inv=inverse_table(n)[det],
        modulus=n,
    )


def iter_group_chunks(n: int, special: bool = False, cap: Optional[int] = None) -> Iterator[GroupChunk]:
    """Row-major enumeration of G_N in alpha-slices."""
    check_group_cap(n, cap)
    for alpha in range(n):
        yield alpha_slice(n, alpha, special)


def scan_group(
    n: int,
    worker: Callable[[GroupChunk], R],
    threads: int = 1,
    special: bool = False,
    cap: Optional[int] = None,
    description: Optional[str] = None,
) -> List[R]:
    """Run ``worker`` on every alpha-slice of G_N and collect the partial results."""
    check_group_cap(n, cap)
    chunks = (alpha_slice(n, alpha, special) for alpha in range(n))
    return list(map_chunks(chunks, worker, threads, logger, description or f"G_{n} scan", total=n))


def all_elements(n: int, special: bool = False) -> GroupChunk:
    """The whole group as one chunk (small n only)."""
    parts = list(iter_group_chunks(n, special))
    return GroupChunk(
        *(np.concatenate([getattr(p, f) for p in parts]) for f in ("alpha", "beta", "gamma", "delta", "det", "det_inv")),
        modulus=n,
    )


# =============================================================================
# Sampling
# =============================================================================

def random_element(n: Optional[int], rng: np.random.Generator, height: int = 6) -> GroupElement:
    """Uniform element of GL2(Z/n), or a random product of SL2(Z) generators when n is None."""
    if n is None:
        g = GroupElement.identity()
        gens = [GroupElement(1, 1, 0, 1), GroupElement(1, -1, 0, 1), GroupElement(0, -1, 1, 0), GroupElement(0, 1, -1, 0)]
        for _ in range(int(rng.integers(1, height + 1))):
            g = g @ gens[int(rng.integers(len(gens)))]
        return g
    while True:
        a, b, c, d = (int(v) for v in rng.integers(0, n, size=4))
        if gcd(a * d - b * c, n) == 1:
            return GroupElement(a, b, c, d, n)


def random_form(n: Optional[int], rng: np.random.Generator, bound: int = 10) -> Form:
    if n is None:
        return Form.of(int(v) for v in rng.integers(-bound, bound + 1, size=4))
    return Form.of((int(v) for v in rng.integers(0, n, size=4)), n)


def random_dual_form(n: Optional[int], rng: np.random.Generator, bound: int = 10) -> DualForm:
    if n is None:
        return DualForm.of(int(v) for v in rng.integers(-bound, bound + 1, size=4))
    return DualForm.of((int(v) for v in rng.integers(0, n, size=4)), n)
