"""Compare the packed and python convolution kernels.

Two measurements: the raw kernel on synthetic rows shaped like the ones the
recursion produces, and a cold bracket computation end to end with each
kernel selected through ``SWPV_KERNEL``.

    python benchmarks/bench_kernels.py --g 14
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time

from swpv.convolution import convolve_packed, convolve_python, int_row, make_rational


def synthetic_terms(rows: int, length: int, bits: int, seed: int):
    rng = random.Random(seed)

    def row():
        den = 1 << rng.randrange(bits // 2, bits)
        return int_row([make_rational(rng.getrandbits(bits), den) for _ in range(length)])

    return [(rng.randrange(1, 1 << 20), row(), row()) for _ in range(rows)]


def time_kernel(kernel, terms, top: int, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        kernel(terms, top)
        best = min(best, time.perf_counter() - start)
    return best


def time_engine(g: int, kernel: str) -> float:
    code = (
        "import time\n"
        "from swpv.bracket_engine import MemoStore, volume\n"
        "t = time.perf_counter()\n"
        f"volume({g}, 1, MemoStore())\n"
        "print(time.perf_counter() - t)\n"
    )
    env = dict(os.environ, SWPV_KERNEL=kernel)
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True)
    return float(out.stdout.strip())


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--g", type=int, default=14, help="genus for the end-to-end run")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print("kernel-only (best of %d)" % args.repeat)
    print(f"{'rows':>5} {'len':>5} {'bits':>6} {'python s':>10} {'packed s':>10} {'speedup':>8}")
    for rows, length, bits in [(4, 8, 64), (16, 16, 256), (32, 32, 1024), (32, 48, 4096)]:
        terms = synthetic_terms(rows, length, bits, seed=rows * length)
        top = length - 1
        assert convolve_packed(terms, top) == convolve_python(terms, top)
        tp = time_kernel(convolve_python, terms, top, args.repeat)
        tk = time_kernel(convolve_packed, terms, top, args.repeat)
        print(f"{rows:>5} {length:>5} {bits:>6} {tp:>10.4f} {tk:>10.4f} {tp / tk:>8.1f}")

    print(f"\nend to end: V_{{g,1}} at g = {args.g}, cold store")
    for name in ("python", "packed"):
        print(f"  {name:<7} {time_engine(args.g, name):.2f} s")


if __name__ == "__main__":
    main()
