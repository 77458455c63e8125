"""Compare the compiled orthant-sum kernel with the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--points 20000] [--atoms 2000] [--dims 2] [--repeat 5]

Prints one CSV row per backend with the best wall time over ``--repeat``
runs and the largest absolute difference from the fallback result.
"""

import argparse
import time

import numpy as np

from stieltjes import kernels


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--atoms", type=int, default=2000)
    ap.add_argument("--dims", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    x = rng.uniform(size=(args.points, args.dims))
    q = rng.uniform(size=(args.atoms, args.dims))
    w = rng.normal(size=args.atoms)

    backends = ["python"] + (["compiled"] if kernels.BACKEND == "compiled" else [])
    ref = None
    print("backend,threads,points,atoms,dims,seconds,max_abs_diff")
    for b in backends:
        t, out = best_of(lambda: kernels.orthant_sum(x, q, w, False, backend=b), args.repeat)
        if ref is None:
            ref = out
        diff = float(np.max(np.abs(out - ref)))
        print(f"{b},{kernels.thread_count() if b == 'compiled' else 1},{args.points},"
              f"{args.atoms},{args.dims},{t:.6f},{diff:.3g}")
    if len(backends) == 1:
        print("# compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
