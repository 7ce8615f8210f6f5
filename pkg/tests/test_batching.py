#!/usr/bin/env python3
"""
Test logging setup, batch processing and chunk mapping
"""

import io
import logging
import sys

from utils.batching import ProgressTracker, map_chunks, process_in_batches, setup_logging


def test_setup_logging_keeps_one_handler_on_the_current_stream(monkeypatch):
    name = "batching_tests.console"
    first = io.StringIO()
    monkeypatch.setattr(sys, "stderr", first)
    logger = setup_logging(name)
    logger.info("one")

    first.close()
    second = io.StringIO()
    monkeypatch.setattr(sys, "stderr", second)
    assert setup_logging(name, logging.DEBUG) is logger
    logger.debug("two")

    assert len(logger.handlers) == 1
    assert logger.handlers[0].stream is second
    assert "two" in second.getvalue()


def test_process_in_batches_collects_errors():
    def processor(batch):
        if 3 in batch:
            raise ValueError("bad batch")
        return {x: x * x for x in batch}

    outcome = process_in_batches([1, 2, 3, 4], 2, processor, verbose=False)
    assert outcome["results"] == {1: 1, 2: 4}
    assert outcome["processed"] == 2
    assert outcome["errors"] == [{"batch": 2, "error": "bad batch"}]


def test_map_chunks_same_total_for_any_thread_count():
    chunks = [range(i, i + 10) for i in range(0, 100, 10)]
    inline = sum(map_chunks(chunks, sum, threads=1))
    pooled = sum(map_chunks(chunks, sum, threads=4, total=len(chunks)))
    assert inline == pooled == sum(range(100))


def test_progress_tracker_counts():
    tracker = ProgressTracker(20, "scan")
    tracker.update(5)
    assert tracker.current == 5
    assert tracker.get_progress_str().startswith("scan: 5/20 (25.0%)")
