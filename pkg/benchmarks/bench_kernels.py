"""Compare the numba kernels against the numpy/LAPACK fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Times the matrix kernels on 18x18 inputs (the size of A_c for three agents
with two-dimensional errors) and one full synthesis of the shipped paper_sec4
scenario on each backend.
"""

import argparse
import time
import timeit

import numpy as np

from ffconsensus import matstack as ms
from ffconsensus.io import load_scenario
from ffconsensus.synthesis import synthesize


def _kernel_cases(rng):
    A = rng.standard_normal((18, 18))
    b = rng.standard_normal((18, 3))
    S = A @ A.T
    return {
        "max_singular_value": lambda: ms.max_singular_value(A),
        "spectral_radius": lambda: ms.spectral_radius(A),
        "pseudo_inverse": lambda: ms.pseudo_inverse(A[:, :12]),
        "solve_linear": lambda: ms.solve_linear(A, b),
        "symmetric_eigvals": lambda: ms.symmetric_eigvals(S),
    }


def bench(repeat):
    rng = np.random.default_rng(0)
    cases = _kernel_cases(rng)
    rows = []
    for name, fn in cases.items():
        per = {}
        for backend in ("numba", "numpy"):
            with ms.use_backend(backend):
                fn()  # warm up / compile
                t = min(timeit.repeat(fn, number=200, repeat=repeat)) / 200
                per[backend] = t * 1e6
        rows.append((name, per["numba"], per["numpy"]))

    s = load_scenario("paper_sec4")
    synth_times = {}
    for backend in ("numba", "numpy"):
        with ms.use_backend(backend):
            t0 = time.perf_counter()
            r = synthesize(s)
            synth_times[backend] = (time.perf_counter() - t0, r.observer.evaluations)
    return rows, synth_times


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rows, synth = bench(args.repeat)
    print(f"{'kernel (18x18)':<22}{'numba us':>12}{'numpy us':>12}{'speedup':>10}")
    for name, nb, npy in rows:
        print(f"{name:<22}{nb:>12.1f}{npy:>12.1f}{npy / nb:>10.2f}")
    print()
    print(f"{'synthesis paper_sec4':<22}{'seconds':>12}{'evals':>12}")
    for backend, (sec, ev) in synth.items():
        print(f"{backend:<22}{sec:>12.2f}{ev:>12d}")


if __name__ == "__main__":
    main()
