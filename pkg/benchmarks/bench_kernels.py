"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from nervegraph import kernels


def cases(rng):
    P3 = rng.normal(size=(4, 2))
    P_ball = rng.normal(size=(60, 2))
    P_pairs = rng.uniform(-1, 1, size=(75, 2))
    n = 30
    us = rng.integers(0, n, 400)
    vs = (us + rng.integers(1, n, 400)) % n
    logx = np.log(rng.uniform(1e-3, 1, size=(2000, 10)))
    # data sets in the examples have a few hundred rows; numpy's vectorized
    # transcendentals overtake the scalar loop at around 500
    logx_small = logx[:250]
    factors = [[0, 3, 9], [0, 7, 9], [1, 2, 8], [3, 4], [7, 8]]
    return {
        "miniball_radius (4 pts)": lambda m: m.miniball_radius(P3),
        "miniball_radius (60 pts)": lambda m: m.miniball_radius(P_ball),
        "close_pair_count (75 pts)": lambda m: m.close_pair_count(P_pairs, 0.15),
        "decomposable_edges (n=30, 400 edges)": lambda m: m.decomposable_edges(n, us, vs),
        "clayton_factor_logdensity (250x10)": lambda m: m.clayton_factor_logdensity(logx_small, factors, 1.5),
        "clayton_factor_logdensity (2000x10)": lambda m: m.clayton_factor_logdensity(logx, factors, 1.5),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.compiled is None:
        print("compiled kernels are not built; only the Python timings are shown")
    impls = [("python", kernels.python)] + ([("compiled", kernels.compiled)] if kernels.compiled else [])
    print(f"{'kernel':40s} " + " ".join(f"{name:>12s}" for name, _ in impls) + "   speedup")
    for label, fn in cases(np.random.default_rng(0)).items():
        times = []
        for _, mod in impls:
            t = timeit.Timer(lambda: fn(mod))
            number, _ = t.autorange()
            times.append(min(t.repeat(args.repeat, number)) / number)
        cols = " ".join(f"{t * 1e6:10.1f}us" for t in times)
        speed = f"{times[0] / times[1]:8.1f}x" if len(times) == 2 else ""
        print(f"{label:40s} {cols} {speed}")


if __name__ == "__main__":
    main()
