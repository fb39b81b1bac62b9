"""Compute exact volumes up to a genus bound and write a compact warm cache.

The compact cache keeps every key with at most ``--n-max`` points and degree
at most ``--max-degree``, which is all the large-genus ratio sequences need.

    python scripts/build_warm_cache.py --g-max 40 --n-max 4 \
        --out tests/data/warm_cache.txt
"""

from __future__ import annotations

import argparse
import resource
import time

from swpv.bracket_engine import (BracketKey, MemoStore, bracket, cache_save,
                                 estimate_key_count, volume)


def degree_vectors(n: int, max_degree: int, max_part: int | None = None):
    if max_part is None:
        max_part = max_degree
    if n == 0:
        yield ()
        return
    for first in range(min(max_degree, max_part), -1, -1):
        for tail in degree_vectors(n - 1, max_degree - first, first):
            yield (first,) + tail


def compact(store: MemoStore, n_max: int, max_degree: int) -> MemoStore:
    out = MemoStore()
    for key, value in store.items():
        if key.n <= n_max and key.degree <= max_degree:
            out.insert(key, value)
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--g-max", type=int, default=40)
    ap.add_argument("--n-max", type=int, default=4)
    ap.add_argument("--max-degree", type=int, default=3)
    ap.add_argument("--out", required=True)
    ap.add_argument("--full-out")
    args = ap.parse_args()

    print(f"estimated keys: {estimate_key_count([(args.g_max, args.n_max)])}", flush=True)
    store = MemoStore()
    start = time.time()
    for g in range(1, args.g_max + 1):
        for n in range(0, args.n_max + 1):
            if 2 * g - 2 + n > 0:
                volume(g, n, store)
            for d in degree_vectors(n, min(args.max_degree, g - 1)):
                if d and sum(d) <= g - 1:
                    bracket(BracketKey(g, d), store)
        store.trim(below_genus=g)
        kept = cache_save(compact(store, args.n_max, args.max_degree), args.out)
        rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss // 1024
        print(f"g={g} t={time.time() - start:.1f}s entries={len(store)} kept={kept} rss={rss}MB",
              flush=True)
    if args.full_out:
        cache_save(store, args.full_out)


if __name__ == "__main__":
    main()
