from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from typing import Callable, Iterable, Iterator, TypeVar

from threadpoolctl import threadpool_limits

T = TypeVar("T")
R = TypeVar("R")


class Pool:
    """Ordered map over a fixed number of worker threads.

    Results come back in submission order, so reductions over them are
    independent of the worker count.
    """

    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        self.threads = threads
        self._ex = ThreadPoolExecutor(threads) if threads > 1 else None

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
        if self._ex is None:
            return [fn(x) for x in items]
        return list(self._ex.map(fn, items))

    def close(self):
        if self._ex is not None:
            self._ex.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@contextmanager
def single_threaded_blas() -> Iterator[None]:
    # BLAS splitting can change summation order; keep it serial so that only
    # our own, fixed, row blocking decides the arithmetic.
    with threadpool_limits(limits=1, user_api="blas"):
        yield
