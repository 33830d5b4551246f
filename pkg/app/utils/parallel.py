"""Order-preserving parallel map over worker processes."""

import concurrent.futures
from typing import Callable, Iterable, List, TypeVar

from app.logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply fn to every item, keeping input order.

    With workers <= 1 the map runs inline. Otherwise the items are spread over
    a process pool; fn and the items must be picklable. Results are identical
    for any worker count as long as fn is deterministic.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    max_workers = min(workers, len(items))
    logger.debug(f"Mapping {len(items)} tasks over {max_workers} worker processes")
    with concurrent.futures.ProcessPoolExecutor(max_workers) as executor:
        return list(executor.map(fn, items))
