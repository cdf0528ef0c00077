"""Worker pool sized by ``PCP_FORGE_THREADS``; results always come back in input order."""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor


def threads() -> int:
    try:
        return max(1, int(os.environ.get("PCP_FORGE_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    items = list(items)
    k = threads()
    if k == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def derive_seed(master, *parts) -> int:
    """Stable 63-bit seed from a master seed and a task path."""
    text = ":".join(str(p) for p in (master,) + parts)
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "big") >> 1
