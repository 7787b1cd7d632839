"""Order-preserving thread map capped by ``LEVY_SPDE_THREADS``."""

from concurrent.futures import ThreadPoolExecutor
import os

ENV_VAR = "LEVY_SPDE_THREADS"


def worker_count():
    cap = os.environ.get(ENV_VAR)
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return n


def pmap(fn, items):
    """``[fn(x) for x in items]``, possibly on threads; results keep input order."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
