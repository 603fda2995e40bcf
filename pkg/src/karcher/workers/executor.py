"""Ordered thread-pool execution of independent jobs."""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import structlog

from karcher.exceptions import JobFailedError

logger = structlog.get_logger()

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Sequence[T], threads: int = 1) -> list[R]:
    """
    Apply ``fn`` to every item and return the results in input order.

    With ``threads > 1`` the jobs run on a thread pool; the output order never depends on
    completion order. The first failing job (lowest index) is re-raised as JobFailedError.
    """
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")

    if threads == 1 or len(items) <= 1:
        results: list[R] = []
        for i, item in enumerate(items):
            try:
                results.append(fn(item))
            except Exception as exc:
                raise JobFailedError(i, exc) from exc
        return results

    logger.debug("ordered_map_start", jobs=len(items), threads=threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, item) for item in items]
        results = []
        for i, future in enumerate(futures):
            try:
                results.append(future.result())
            except Exception as exc:
                raise JobFailedError(i, exc) from exc
    return results
