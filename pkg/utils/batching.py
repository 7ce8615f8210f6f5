#!/usr/bin/env python3
"""
Shared execution utilities for the orbital scans

Provides:
- Logging configuration
- Batch processing of verification cells
- Thread-pool chunk mapping with order-independent merging
- Progress tracking for long scans
"""

import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, TypeVar


# Configure logging
def setup_logging(name: str, level: int = logging.INFO) -> logging.Logger:
    """Configure console logging for a command or script.

    Repeated calls reuse the one console handler but rebind it to the
    current sys.stderr and level.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    for handler in logger.handlers:
        if getattr(handler, "_orbital_console", False):
            handler.setStream(sys.stderr)
            handler.setLevel(level)
            return logger

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    console_handler.setFormatter(formatter)
    console_handler._orbital_console = True
    logger.addHandler(console_handler)

    return logger


# =============================================================================
# Batch Processing
# =============================================================================

T = TypeVar('T')
R = TypeVar('R')


def process_in_batches(
    items: List[T],
    batch_size: int,
    processor: Callable[[List[T]], Dict],
    verbose: bool = True,
    logger: Optional[logging.Logger] = None
) -> Dict[str, Any]:
    """
    Process items in batches and merge the per-batch result dicts.

    Args:
        items: List of items to process
        batch_size: Number of items per batch
        processor: Function that processes a batch and returns results dict
        verbose: Whether to log progress
        logger: Logger instance (uses module logger if None)

    Returns:
        Combined results plus processed/total counts and any batch errors
    """
    if logger is None:
        logger = logging.getLogger(__name__)

    results: Dict[Any, Any] = {}
    total_batches = (len(items) + batch_size - 1) // batch_size if items else 0
    processed = 0
    errors = []

    for i in range(0, len(items), batch_size):
        batch = items[i:i + batch_size]
        batch_num = i // batch_size + 1

        if verbose:
            logger.info(f"[Batch {batch_num}/{total_batches}] Processing {len(batch)} items...")

        try:
            results.update(processor(batch))
            processed += len(batch)
        except Exception as e:
            logger.error(f"[Batch {batch_num}] Error: {e}")
            errors.append({'batch': batch_num, 'error': str(e)})

    return {
        'results': results,
        'processed': processed,
        'total': len(items),
        'errors': errors,
    }


# =============================================================================
# Parallel chunk mapping
# =============================================================================

def map_chunks(
    chunks: Iterable[T],
    worker: Callable[[T], R],
    threads: int = 1,
    logger: Optional[logging.Logger] = None,
    description: str = "chunks",
    total: Optional[int] = None,
) -> Iterator[R]:
    """
    Apply a pure worker to every chunk, yielding results as they complete.

    Results arrive in completion order, so callers must merge with an
    associative, commutative operation (integer histogram addition).
    """
    tracker = ProgressTracker(total or 0, description, logger) if total else None

    if threads <= 1:
        for chunk in chunks:
            result = worker(chunk)
            if tracker:
                tracker.update()
            yield result
        return

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, chunk) for chunk in chunks]
        for future in as_completed(futures):
            result = future.result()
            if tracker:
                tracker.update()
            yield result


# =============================================================================
# Progress Tracking
# =============================================================================

class ProgressTracker:
    """Progress tracker with ETA estimation that logs every ~10%."""

    def __init__(self, total: int, description: str = "Processing", logger: Optional[logging.Logger] = None):
        self.total = total
        self.description = description
        self.current = 0
        self.start_time = time.time()
        self.logger = logger or logging.getLogger(__name__)
        self._next_report = max(1, total // 10)

    def update(self, n: int = 1) -> None:
        """Update progress by n items."""
        self.current += n
        if self.current >= self._next_report or self.current == self.total:
            self.logger.info(self.get_progress_str())
            self._next_report = self.current + max(1, self.total // 10)

    def elapsed(self) -> float:
        return time.time() - self.start_time

    def get_eta(self) -> str:
        """Get estimated time remaining."""
        if self.current == 0:
            return "calculating..."

        rate = self.current / max(self.elapsed(), 1e-9)
        remaining = (self.total - self.current) / rate if rate > 0 else 0

        if remaining < 60:
            return f"{remaining:.0f}s"
        elif remaining < 3600:
            return f"{remaining / 60:.1f}m"
        else:
            return f"{remaining / 3600:.1f}h"

    def get_progress_str(self) -> str:
        """Get progress string."""
        pct = (self.current / self.total * 100) if self.total > 0 else 0
        return f"{self.description}: {self.current}/{self.total} ({pct:.1f}%) - ETA: {self.get_eta()}"
