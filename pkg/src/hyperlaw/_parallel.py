"""Deterministic candidate-level parallelism.

Searches fan independent candidates out to a thread pool and merge the
results back in submission order, so reports are identical for any
thread count.  The pool size comes from the HYPERLAW_THREADS
environment variable; the default of 1 is a plain sequential map.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count():
    raw = os.environ.get("HYPERLAW_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError("HYPERLAW_THREADS must be an integer, got %r" % (raw,))
    return max(1, n)


def pmap(fn, items):
    """Map fn over items, results in input order regardless of the
    thread count.  fn must not share mutable state across items."""
    items = list(items)
    n = thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
