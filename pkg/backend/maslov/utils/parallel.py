"""
Ordered process-pool map for independent integrations.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from ..config.config import get_config

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit worker count, else the configured MASLOV_THREADS cap."""
    if workers is None:
        workers = get_config().THREADS
    return max(1, int(workers))


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Map fn over items, returning results in input order.

    Args:
        fn: Module-level (picklable) function.
        items: Picklable arguments.
        workers: Process count; 1 runs serially in-process.

    Returns:
        List of results aligned with items.
    """
    items = list(items)
    workers = min(resolve_workers(workers), len(items)) if items else 1
    if workers <= 1:
        return [fn(item) for item in items]
    logger.debug(f"Dispatching {len(items)} tasks to {workers} processes")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
