"""Compare the numba and pure-numpy kernels on representative workloads.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is called once per backend before timing so numba's compile
cost stays out of the numbers.  Results from the two backends are also
compared, so a speedup never hides a wrong answer.
"""
import argparse
import math
import time

import numpy as np

from dho import fock, kernels
from dho._accel import HAVE_NUMBA
from dho.states import EvolutionParams, make_cat


def _best_of(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(60, 60)) + 1j * rng.normal(size=(60, 60))
    herm = m + m.conj().T
    tol = 1e-13 * np.linalg.norm(herm)

    rho = fock.density_from_superposition(make_cat(1.0), EvolutionParams(0.2, 0.0), 40).elements

    cat = make_cat(7.0 / math.sqrt(2.0))
    amps, w, z = cat.amplitude_array, cat.pair_weights(), cat.overlap_logs()
    starts = np.linspace(-7.0, 7.0, 64)

    return {
        "jacobi 60x60": (lambda b: kernels.jacobi_eigenvalues(herm, tol, backend=b)[0],
                         lambda x: np.sort(x)),
        "lindblad rk4 n_max=40, 2000 steps": (lambda b: kernels.lindblad_rk4(rho, 0.2, 0.0, 0.005, 2000, backend=b),
                                              lambda x: x),
        "guidance rk4 64 paths, 2000 steps": (
            lambda b: kernels.guidance_rk4(starts, amps, w, z, 0.1, 0.0, 1e-3, 2000, 100, backend=b)[0],
            lambda x: x),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if not HAVE_NUMBA:
        print("numba is not installed; timing the numpy kernels only")
    print(f"{'kernel':<36}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}{'max diff':>12}")
    for name, (run, norm) in workloads().items():
        times, results = [], []
        for b in backends:
            run(b)  # warm-up (compilation for numba)
            t, out = _best_of(lambda: run(b), args.repeat)
            times.append(t)
            results.append(norm(out))
        line = f"{name:<36}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            diff = float(np.max(np.abs(results[0] - results[1])))
            line += f"{times[0] / times[1]:>9.1f}x{diff:>12.1e}"
        print(line)


if __name__ == "__main__":
    main()
