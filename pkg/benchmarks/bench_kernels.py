"""Compare the compiled core against the numpy fallback on the hot kernels.

    python3 benchmarks/bench_kernels.py [--n 1000001] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from switchlab._kernels import _pure
from switchlab.extrema import find_extrema, segment_trends
from switchlab.processes import gen_random_walk

try:
    from switchlab._kernels import _core
except ImportError:
    _core = None


def best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_001)
    ap.add_argument("--order", type=int, default=20)
    ap.add_argument("--grid", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    p = gen_random_walk(args.n, seed=1).prices
    ext = find_extrema(p, args.order)
    ts = segment_trends(ext)
    series = np.concatenate([[np.nan], np.abs(np.diff(p))])
    cases = {
        "window_extrema": lambda m: m.window_extrema(p, args.order),
        "reduce_alternating": lambda m: m.reduce_alternating(
            np.arange(len(ext), dtype=np.int64), ext.kind, ext.value),
        "stack_windows": lambda m: m.stack_windows(series, ts.start, ts.peak, args.grid, True, True, 5),
    }
    print(f"n={args.n} order={args.order} grid={args.grid} trends={len(ts.start)}")
    print(f"{'kernel':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, call in cases.items():
        tp = best(lambda: call(_pure), args.repeat)
        if _core is None:
            print(f"{name:<20}{tp * 1e3:>14.1f}{'n/a':>14}{'':>10}")
            continue
        tc = best(lambda: call(_core), args.repeat)
        print(f"{name:<20}{tp * 1e3:>14.1f}{tc * 1e3:>14.1f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
