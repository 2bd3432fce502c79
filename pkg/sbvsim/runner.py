"""
Point Runner
Evaluates independent sweep points, optionally on a thread pool, keeping input order
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from .logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def evaluate_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int = 1, name: str = "points") -> List[R]:
    """
    Apply fn to every item and return results in input order.
    With workers > 1 the items run on a thread pool; the ordering is unaffected.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        results = [fn(item) for item in items]
    else:
        logger.debug(f"Evaluating {len(items)} {name} on {workers} threads")
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="sbvsim") as pool:
            results = list(pool.map(fn, items))
    logger.debug(f"Evaluated {len(results)} {name}")
    return results
