"""Deterministic parallel mapping over a fixed list of work units.

Work is always partitioned into units whose number and content do not
depend on the worker count, each unit draws from its own random stream,
and results are combined in unit order. Statistics computed this way are
bit-identical whether the units run serially or across a process pool.

Large read-only state (for example a stored wave-function history) is
handed to workers through fork inheritance: set it with
:func:`shared_state` before mapping, read it with :func:`get_shared`
inside the unit function.
"""

from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager

_SHARED = None


def get_shared():
    return _SHARED


@contextmanager
def shared_state(obj):
    global _SHARED
    _SHARED = obj
    try:
        yield
    finally:
        _SHARED = None


def map_units(fn, units, workers: int = 1) -> list:
    """Apply ``fn`` to every unit, in order, optionally across processes."""
    units = list(units)
    if workers <= 1 or len(units) <= 1 or "fork" not in multiprocessing.get_all_start_methods():
        return [fn(u) for u in units]
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=min(workers, len(units)), mp_context=ctx) as pool:
        return list(pool.map(fn, units))
