"""Compare the compiled entropy kernels against the numpy fallbacks.

Run from the repository root:

    python benchmarks/bench_kernels.py [--repeats N]

Each kernel is timed on sizes spanning the workloads that matter in
practice: chain validation batches entropies over hundreds of thousands
of short rows, the gamma sweep scores thousands of deterministic maps at
once. Both implementations are checked for agreement before timing.
"""

import argparse
import time

import numpy as np

from ciderive import _pykernels

try:
    from ciderive import _ckernels
except ImportError:
    _ckernels = None


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def _agree(name, a, b):
    gap = float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0
    if gap > 1e-12:
        raise AssertionError(f"{name}: implementations disagree by {gap:.3e}")


def _cases(rng):
    flat = rng.dirichlet(np.ones(200_000))
    rows = rng.dirichlet(np.ones(16), size=250_000)
    grid = rng.dirichlet(np.ones(9)).reshape(3, 3)
    maps = rng.integers(0, 4, size=(4096, 9))
    return [
        ("entropy_bits 2e5", "entropy_bits", (flat,)),
        ("batch_entropy 250k x 16", "batch_entropy_rows", (rows,)),
        ("gamma_scores 4096 maps", "gamma_scores", (grid, maps, 4)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _ckernels is None:
        print("compiled kernels unavailable; timing the numpy fallback only")
    rng = np.random.default_rng(0)
    print(f"{'case':<28} {'numpy':>10} {'compiled':>10} {'speedup':>8}")
    for label, name, call_args in _cases(rng):
        py_fn = getattr(_pykernels, name)
        py_t = _time(py_fn, call_args, args.repeats)
        if _ckernels is None:
            print(f"{label:<28} {py_t * 1e3:>8.2f}ms {'-':>10} {'-':>8}")
            continue
        c_fn = getattr(_ckernels, name)
        _agree(label, py_fn(*call_args), c_fn(*call_args))
        c_t = _time(c_fn, call_args, args.repeats)
        print(
            f"{label:<28} {py_t * 1e3:>8.2f}ms {c_t * 1e3:>8.2f}ms"
            f" {py_t / c_t:>7.2f}x"
        )


if __name__ == "__main__":
    main()
