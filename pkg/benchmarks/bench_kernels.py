"""Benchmark the compiled kernels against the numpy reference backend.

Usage: python benchmarks/bench_kernels.py [--paths N]

Times the four per-path kernels at baseline experiment size (50 assets,
1000 daily steps, weekly mesh) and the full pipeline end to end.
"""
import argparse
import time

import numpy as np

from fgpsim.kernels import _ref

try:
    from fgpsim.kernels import _core
except ImportError:
    _core = None


def bench(fn, args, repeat):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=200,
                    help="repetitions per kernel (one per simulated path)")
    opts = ap.parse_args()

    m, d, k = 1000, 50, 5
    rng = np.random.default_rng(0)
    s0 = np.exp(rng.normal(0.0, 1.1, d))
    b = rng.uniform(0.0, 2e-4, d)
    sigma = rng.uniform(0.15, 0.35, d) / np.sqrt(252.0)
    z = rng.standard_normal((m, d))
    zeta = rng.standard_normal(m)
    amp = np.full(m, 5e-5)
    S = _ref.gbm_exact_log(s0, b, sigma, 1.0, z)
    mu0 = np.ascontiguousarray(S[0] / S[0].sum())
    kappa = np.full(m + 1, 0.002)
    w = (S / S.sum(axis=1, keepdims=True))[::k] ** 0.7
    targets = np.ascontiguousarray(w / w.sum(axis=1, keepdims=True))

    cases = [
        ("gbm_milstein", (s0, b, sigma, 1.0, z)),
        ("gbm_exact_log", (s0, b, sigma, 1.0, z)),
        ("ou_exact", (0.002, 0.002, np.exp(-3.0), amp, zeta, 0.0)),
        ("ledger_evolve", (np.ascontiguousarray(S), mu0, kappa, targets, k, 0, 0)),
    ]

    print(f"kernel benchmark: m={m} steps, d={d} assets, mesh={k}, "
          f"{opts.paths} reps")
    print(f"{'kernel':<16}{'python':>12}{'cython':>12}{'speedup':>10}")
    total_py = total_c = 0.0
    for name, args in cases:
        t_py = bench(getattr(_ref, name), args, opts.paths)
        total_py += t_py
        if _core is not None:
            t_c = bench(getattr(_core, name), args, opts.paths)
            total_c += t_c
            print(f"{name:<16}{t_py * 1e3:>10.3f}ms{t_c * 1e3:>10.3f}ms"
                  f"{t_py / t_c:>9.1f}x")
        else:
            print(f"{name:<16}{t_py * 1e3:>10.3f}ms{'n/a':>12}{'':>10}")
    if _core is not None:
        print(f"{'per-path total':<16}{total_py * 1e3:>10.3f}ms"
              f"{total_c * 1e3:>10.3f}ms{total_py / total_c:>9.1f}x")
    else:
        print("compiled backend unavailable; install with the extension to compare")


if __name__ == "__main__":
    main()
