#!/usr/bin/env python3
"""
Configuration for the orbital toolkit

Contains:
- Enumeration caps (group scans, dense Fourier transforms, class bounds)
- Numeric tolerances and working precision
- Default primes and bounds per verification suite
- Worker and batch sizes
"""

import os
from typing import Dict, Tuple

# =============================================================================
# ENUMERATION CAPS
# =============================================================================
# Scans above these sizes raise ResourceCapError instead of running for hours.

# Largest |G_N| summed over in one orbital Gauss sum or stabilizer scan
MAX_GROUP_SCAN = 12_000_000

# Largest N^4 for the dense Fourier transform path
MAX_DENSE_FOURIER = 6_000_000

# Largest N^4 * |support| pair evaluations for an exact transform on all of V*_N
MAX_FOURIER_WORK = 500_000_000

# Full-group stabilizer scans are allowed up to this modulus
STABILIZER_FULL_SCAN_MODULUS = 128

# Largest |disc| bound accepted by the class enumerator
MAX_CLASS_BOUND = 1_000_000

# Largest p^(4e) for exhaustive census scans (chunked, so memory stays flat)
MAX_CENSUS_SIZE = 900_000_000

# Largest V_{p^2} held in memory for an orbit-closure table
MAX_CLOSURE_SIZE = 6_000_000

# BFS oracle: maximum visited forms before the result is flagged inconclusive
ORACLE_MAX_VISITED = 200_000


# =============================================================================
# NUMERIC TOLERANCES
# =============================================================================

TABLE_TOLERANCE = 1e-9
GAMMA_TOLERANCE = 1e-8
EXACT_FORM_TOLERANCE = 1e-12
COROLLARY_TOLERANCE = 1e-12

# Complex roots closer than this to a fundamental-domain edge are re-tested exactly
BOUNDARY_EPSILON = 1e-7

# Working precision (decimal digits) for mpmath evaluations
MPMATH_DPS = 40


# =============================================================================
# PERSISTED TABLES
# =============================================================================

# Bumped whenever the class-number table manifest or coefficient layout changes
TABLE_FORMAT_VERSION = 1


# =============================================================================
# DEFAULT BOUNDS AND PRIMES
# =============================================================================

ON_BOUND = 2000            # Ohno-Nakagawa coefficient check
ORACLE_BOUND = 300         # enumeration vs. BFS oracle
PARTIAL_ZETA_BOUND = 500   # character-average consistency
PROGRESSION_BOUND = 100_000

SUITE_PRIMES: Dict[str, Tuple[int, ...]] = {
    "census": (2, 3, 5, 7),
    "mori": (5, 7, 11, 13),
    "singular": (5, 7),
    "fourier": (5, 7),
    "divisible_fourier": (2, 3, 5, 7),
    "unramified": (5, 7),
    "ramified": (7, 13),
    "corollaries": (5, 7),
}


# =============================================================================
# PARALLELISM
# =============================================================================

# Group elements per scan chunk handed to a worker
GROUP_CHUNK_ROWS = 4096


# Pairings [a, b] materialized at once by the exact transform
FOURIER_BLOCK_PAIRS = 4_000_000

# (form, W' point) pairs evaluated at once by the local density kernels
DENSITY_BLOCK_PAIRS = 4_000_000

# Largest |W'_{p^e}| used for optional level-lift cross-checks
MAX_LIFT_CHECK = 1_000_000


def default_workers() -> int:
    """Number of worker threads used when --threads is not given."""
    return os.cpu_count() or 1


def primes_for_suite(name: str) -> Tuple[int, ...]:
    """Default primes for a verification suite (empty tuple if unknown)."""
    return SUITE_PRIMES.get(name, ())
