"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on a fixed random workload; the end-to-end row runs a
small preimage sweep in a fresh interpreter per backend, since the backend
is chosen once at import.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from preimdyn import _pykernels

try:
    from preimdyn import _ckernels
except ImportError:
    _ckernels = None

SWEEP = (
    "from preimdyn.curves import QuadFamily; from preimdyn.harness import SweepSpec, sweep;"
    "from preimdyn.poly import Poly; import time; t0 = time.perf_counter();"
    "sweep(SweepSpec(QuadFamily.poly(0, Poly.x()), 40)); print(time.perf_counter() - t0)"
)


def workloads(seed=0):
    rng = random.Random(seed)
    ints = [rng.randrange(1, 10**12) for _ in range(2000)]
    polys = [[rng.randrange(-10**6, 10**6) for _ in range(5)] for _ in range(2000)]
    points = [(rng.randrange(-10**4, 10**4), rng.randrange(1, 10**4)) for _ in range(2000)]
    return ints, polys, points


def bench(mod, repeat):
    ints, polys, points = workloads()
    rows = {}
    rows["trial_factor"] = min(timeit.repeat(lambda: [mod.trial_factor(n, 2000) for n in ints], number=1, repeat=repeat))
    rows["homog_eval"] = min(
        timeit.repeat(lambda: [mod.homog_eval(c, p, q) for c, (p, q) in zip(polys, points)], number=1, repeat=repeat)
    )
    return rows


def sweep_time(pure: bool) -> float:
    env = dict(os.environ, PREIMDYN_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", SWEEP], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    py = bench(_pykernels, args.repeat)
    if _ckernels is None:
        print("compiled kernels not built; pure-Python timings only")
        for k, v in py.items():
            print(f"{k:14s} python {v * 1e3:9.2f} ms")
        return
    cy = bench(_ckernels, args.repeat)
    ints, polys, points = workloads()
    assert [_pykernels.trial_factor(n, 2000) for n in ints] == [_ckernels.trial_factor(n, 2000) for n in ints]
    print(f"{'kernel':14s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for k in py:
        print(f"{k:14s} {py[k] * 1e3:10.2f} {cy[k] * 1e3:10.2f} {py[k] / cy[k]:8.2f}x")
    sp, sc = sweep_time(True), sweep_time(False)
    print(f"{'sweep H=40':14s} {sp * 1e3:10.2f} {sc * 1e3:10.2f} {sp / sc:8.2f}x")


if __name__ == "__main__":
    main()
