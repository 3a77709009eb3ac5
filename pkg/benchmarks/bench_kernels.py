"""Compare the compiled and pure-Python statistic kernels.

    python3 benchmarks/bench_kernels.py [--series 2000] [--days 129] [--repeat 3]
"""
import argparse
import time

import numpy as np

from burstwatch import kernels
from burstwatch.detectors import MODELS, DetectorConfig


def _time(backend, data, weekend, cfgs, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for counts in data:
            for cfg in cfgs:
                kernels.compute_statistics(counts, weekend, cfg, backend)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--series", type=int, default=2000)
    ap.add_argument("--days", type=int, default=129)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    data = [rng.poisson(3.0, args.days).astype(np.float64) for _ in range(args.series)]
    weekend = np.array([(d + 4) % 7 >= 5 for d in range(args.days)], dtype=np.uint8)
    cfgs = [DetectorConfig.paper_default(m) for m in MODELS]

    cells = args.series * args.days * len(cfgs)
    print(f"{args.series} series x {args.days} days x {len(cfgs)} models, best of {args.repeat}")
    timings = {}
    for name in ("python", "cython"):
        if name not in kernels.BACKENDS:
            continue
        timings[name] = _time(name, data, weekend, cfgs, args.repeat)
        print(f"  {name:<7} {timings[name]:8.3f} s  {cells / timings[name] / 1e6:8.2f} M day-stats/s")
    if len(timings) == 2:
        print(f"  speedup: {timings['python'] / timings['cython']:.1f}x")
    if "cython" not in kernels.BACKENDS:
        print("  (compiled backend unavailable; rebuild with Cython installed)")


if __name__ == "__main__":
    main()
