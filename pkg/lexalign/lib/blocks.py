import logging
import time
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


def iter_blocks(n_rows: int, block_size: int) -> Iterator[tuple[int, int]]:
    if block_size < 1:
        raise ValueError("block_size must be positive")
    for start in range(0, n_rows, block_size):
        yield start, min(start + block_size, n_rows)


def run_blocks(
    fn: Callable[[int, int], None],
    n_rows: int,
    block_size: int,
    workers: int = 1,
) -> None:
    """Call ``fn(start, stop)`` for every row block.

    ``fn`` must only write rows ``start:stop`` of its outputs. numpy releases the
    GIL inside matrix products, so threads are enough for the heavy blocks.
    """
    blocks = list(iter_blocks(n_rows, block_size))
    started = time.perf_counter()
    if workers <= 1 or len(blocks) <= 1:
        for start, stop in blocks:
            fn(start, stop)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for future in [pool.submit(fn, start, stop) for start, stop in blocks]:
                future.result()
    logger.debug(
        "%s: %d rows in %d block(s) on %d worker(s), %.1f ms",
        getattr(fn, "__qualname__", "block"),
        n_rows,
        len(blocks),
        workers,
        1000 * (time.perf_counter() - started),
    )
