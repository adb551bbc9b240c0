"""Thread-pool execution of independent runs."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Sequence, TypeVar

from hyperpoison.core.exceptions import HyperPoisonError

logger = logging.getLogger(__name__)

MAX_WORKERS = min(8, os.cpu_count() or 4)

T = TypeVar("T")
R = TypeVar("R")


def run_parallel(fn: Callable[[T], R], tasks: Sequence[T], jobs: int = 1) -> list[R]:
    """Apply ``fn`` to every task; results come back in task order.

    With ``jobs == 1`` tasks run inline. A failing task is logged and its
    exception re-raised after the remaining tasks finish; errors that are not
    ``HyperPoisonError`` are wrapped in one.
    """
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]

    results: dict[int, R] = {}
    failure: BaseException | None = None
    with ThreadPoolExecutor(max_workers=min(jobs, MAX_WORKERS)) as executor:
        future_to_idx = {executor.submit(fn, task): i for i, task in enumerate(tasks)}
        for future in as_completed(future_to_idx):
            i = future_to_idx[future]
            try:
                results[i] = future.result()
            except Exception as e:
                logger.exception("Run %d failed", i)
                failure = failure or e
    if failure is not None:
        if isinstance(failure, HyperPoisonError):
            raise failure
        raise HyperPoisonError(f"parallel run failed: {failure}") from failure
    return [results[i] for i in range(len(tasks))]
