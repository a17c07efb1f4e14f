#!/usr/bin/env python3
"""Time the numba kernels against their numpy equivalents.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from qwalk import _accel
from qwalk.evolution import FieldState, evolve_spectral, step_position
from qwalk.walks import WalkModel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = [
        ("position 1D N=4096, 20 steps", WalkModel.dirac(1, 0.15), (4096,), "position", 20),
        ("position BCC 32^3, 4 steps", WalkModel.dirac(3, 0.03), (32, 32, 32), "position", 4),
        ("spectral BCC 32^3, t=50", WalkModel.dirac(3, 0.3), (32, 32, 32), "spectral", 50),
        ("spectral 2D 256^2, t=50", WalkModel.dirac(2, 0.3), (256, 256), "spectral", 50),
    ]
    print(f"{'case':34s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for label, model, sizes, engine, steps in cases:
        grid = model.grid(*sizes)
        shape = grid.shape + (model.coin_dim,)
        amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        psi = FieldState(amps / np.linalg.norm(amps), grid, model)
        if engine == "position":
            def job():
                return step_position(psi, steps)
        else:
            mom = psi.to_momentum()

            def job():
                return evolve_spectral(mom, steps)
        row = {}
        for name in ("numba", "numpy"):
            _accel.set_backend(name)
            job()  # warm up: JIT compile and slot tables
            row[name] = best_of(job, args.repeat)
        print(f"{label:34s} {row['numba']:10.4f} {row['numpy']:10.4f} {row['numpy'] / row['numba']:7.1f}x")


if __name__ == "__main__":
    main()
