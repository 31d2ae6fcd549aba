"""
Order-preserving worker pool for independent eigensolves and propagations
"""

import logging
import multiprocessing
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """
    Map ``func`` over ``items``; results come back in input order

    ``func`` must be a picklable module-level callable when jobs > 1.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    processes = min(jobs, len(items))
    logger.debug(f"Dispatching {len(items)} tasks to {processes} workers")
    with multiprocessing.Pool(processes=processes) as pool:
        return pool.map(func, items)
