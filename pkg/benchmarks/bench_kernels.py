"""Time the numba kernels against their numpy twins.

Usage: python benchmarks/bench_kernels.py [--repeat R] [--json out.json]

Numba compilation is excluded by a warm-up call. Both backends are checked
for agreement on every workload before timing.
"""
import argparse
import json
import time

import numpy as np

from finrig import _kernels
from finrig._kernels import _numpy as ref

TRIG = (2, np.array([0.5]), np.array([]))
NESTED = (2, np.array([0.3]), np.array([0.2, -0.4]))


def workloads():
    rng = np.random.default_rng(0)
    G = 1 << 14
    x = rng.uniform(0, 1, G)
    idx = rng.integers(0, G, (G, 2))
    frac = rng.uniform(0, 1, (G, 2))
    w = rng.uniform(0, 1, (G, 2))
    phi = rng.normal(size=G)
    psi1, phi2 = rng.normal(size=2), rng.normal(size=4)
    v = rng.normal(size=2048)
    return {
        "lift_eval (2^14 pts, nested)": lambda k: k.lift_eval(x, *NESTED),
        "periodic_table (N=14, trig)": lambda k: k.periodic_table(14, *TRIG, 1e-14, 100),
        "periodic_table (N=10, nested)": lambda k: k.periodic_table(10, *NESTED, 1e-14, 100),
        "itinerary (2^14 pts, n=40)": lambda k: k.itinerary(x, 40, *TRIG),
        "transfer_step (G=2^14, x50)": lambda k: [k.transfer_step(phi, idx, frac, w) for _ in range(50)],
        "word_sums (s=2, n=18)": lambda k: k.word_sums(psi1, 1, phi2, 2, 2, 18),
        "large_scale_quotient (G=2048)": lambda k: k.large_scale_quotient(v, 0.05),
    }


def _first(out):
    out = out[0] if isinstance(out, (tuple, list)) else out
    return np.asarray(out, dtype=np.float64)


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--json", help="write the timings here")
    args = parser.parse_args(argv)
    jit = _kernels.jit_backend
    if jit is None:
        raise SystemExit("numba backend unavailable (FINRIG_DISABLE_JIT set or numba missing)")
    rows = []
    print(f"{'kernel':34s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for name, work in workloads().items():
        a, b = work(ref), work(jit)  # warm-up + agreement check
        np.testing.assert_allclose(_first(a), _first(b), rtol=1e-10, atol=1e-12)
        t_np = best_time(lambda: work(ref), args.repeat)
        t_jit = best_time(lambda: work(jit), args.repeat)
        rows.append({"kernel": name, "numpy": t_np, "numba": t_jit, "speedup": t_np / t_jit})
        print(f"{name:34s} {t_np:10.4f} {t_jit:10.4f} {t_np / t_jit:8.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
