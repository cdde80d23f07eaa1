"""Worker-pool helpers shared by the table builders.

Rays of a radial mesh are independent of each other, so the heavy loops
split them into buckets, map the buckets over a pool and stitch the pieces
back together in order.
"""

import itertools
import multiprocessing
from multiprocessing.pool import ThreadPool


def splitter(n, iterable):
    """Split `iterable` into `n` contiguous buckets.
    >>> list(splitter(3, range(6)))
    [[0, 1], [2, 3], [4, 5]]
    >>> list(splitter(4, range(3)))
    [[0], [1], [2]]
    """
    items = list(iterable)
    n = max(1, min(n, len(items)))
    size, extra = divmod(len(items), n)
    start = 0
    for i in range(n):
        stop = start + size + (1 if i < extra else 0)
        if stop > start:
            yield items[start:stop]
        start = stop


def flatten(iterable):
    """Flatten the input iterable.
    >>> list(flatten([[0, 1], [2, 3]]))
    [0, 1, 2, 3]
    """
    return itertools.chain.from_iterable(iterable)


def worker_count(threads):
    """Resolve a --threads value: 0 means every core.
    >>> worker_count(3)
    3
    """
    if threads < 0:
        raise ValueError("Thread count could not be negative.")
    return threads or multiprocessing.cpu_count()


def map_buckets(func, items, threads):
    """Apply `func` to contiguous buckets of `items` and return the list of
    per-bucket results in order.

    With a single worker no pool is created at all.
    """
    workers = worker_count(threads)
    buckets = list(splitter(workers, items))
    if workers == 1 or len(buckets) == 1:
        return [func(bucket) for bucket in buckets]
    pool = ThreadPool(len(buckets))
    try:
        return pool.map(func, buckets)
    finally:
        pool.close()
        pool.join()
