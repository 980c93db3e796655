"""Compare the compiled and NumPy Coulomb kernels.

    python benchmarks/bench_kernels.py [--sizes 50 217 500] [--repeat 5]

Reports the best-of-``repeat`` wall time per call for each kernel, the
speedup of the compiled backend, and a full equilibration of each size run
once through each backend.
"""
import argparse
import time
from contextlib import contextmanager

import numpy as np

from penning_ising import kernels
from penning_ising.crystal import find_equilibrium, seed_lattice
from penning_ising.kernels import python_backend
from penning_ising.trap import TrapSpec, characteristic_lengths

KERNELS = ("coulomb_energy_gradient", "coulomb_hessian", "inverse_cube_matrix", "min_separation")


def best_time(fn, *args, repeat=5):
    fn(*args)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


@contextmanager
def use_backend(module):
    saved = {name: getattr(kernels, name) for name in KERNELS}
    try:
        for name in KERNELS:
            setattr(kernels, name, getattr(module, name))
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[50, 217, 500])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    compiled = kernels.compiled_backend
    if compiled is None:
        print("compiled backend not available; build it with `pip install -e . --no-build-isolation`")
        return 1

    trap = TrapSpec()
    lp = characteristic_lengths(trap)["planar_length"]
    print(f"{'kernel':<26}{'N':>6}{'numpy [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for n in args.sizes:
        x = seed_lattice(n, trap) / lp
        for name in KERNELS:
            tp = best_time(getattr(python_backend, name), x, repeat=args.repeat)
            tc = best_time(getattr(compiled, name), x, repeat=args.repeat)
            print(f"{name:<26}{n:>6}{1e3 * tp:>14.3f}{1e3 * tc:>14.3f}{tp / tc:>10.1f}")

    print()
    print(f"{'equilibration':<26}{'N':>6}{'numpy [s]':>14}{'cython [s]':>14}{'speedup':>10}")
    for n in args.sizes:
        seed = seed_lattice(n, trap)
        timings = []
        energies = []
        for module in (python_backend, compiled):
            with use_backend(module):
                start = time.perf_counter()
                crystal = find_equilibrium(seed, trap)
                timings.append(time.perf_counter() - start)
                energies.append(crystal.energy)
        agree = abs(energies[0] - energies[1]) / abs(energies[0])
        print(f"{'find_equilibrium':<26}{n:>6}{timings[0]:>14.3f}{timings[1]:>14.3f}"
              f"{timings[0] / timings[1]:>10.1f}   (energy rel diff {agree:.1e})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
