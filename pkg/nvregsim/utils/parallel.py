"""Order-preserving parallel map for independent sweep points."""
from concurrent.futures import ProcessPoolExecutor
import logging
import os
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def resolve_workers(workers: Optional[int] = None) -> int:
    """Worker count: explicit argument, then NVREGSIM_THREADS, then 1."""
    if workers is None:
        env = os.getenv("NVREGSIM_THREADS")
        workers = int(env) if env else 1
    return max(1, int(workers))


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Map ``func`` over ``items`` keeping input order.

    ``func`` must be picklable (a module-level function or a
    ``functools.partial`` of one) when more than one worker is used.
    """
    items = list(items)
    workers = min(resolve_workers(workers), max(len(items), 1))
    if workers == 1:
        return [func(item) for item in items]
    logger.debug("mapping %d items over %d workers", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
