"""Compare the compiled kernels with the numpy fallback on task-sized inputs.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from harmonic_qrc import _kernels_py as py
from harmonic_qrc.gaussian import random_zero_mean_state, two_mode_squeezed_vacuum
from harmonic_qrc.network import OMEGA0, coupled_blocks, joint_potential, potential_matrix, random_reservoir

try:
    from harmonic_qrc import _kernels as cy
except ImportError:
    cy = None


def cases(rng):
    n, m, steps = 5, 1, 160
    res = random_reservoir(n, rng)
    g = rng.uniform(0, 0.2, (n, m))
    b = coupled_blocks(res, g, 25.0)
    sigma0 = random_zero_mean_state(n, rng, omega=OMEGA0).covariance
    inputs = np.array([random_zero_mean_state(m, rng, omega=OMEGA0).covariance for _ in range(steps)])
    singles_a = np.array([random_zero_mean_state(1, rng).covariance for _ in range(1000)])
    singles_b = np.array([random_zero_mean_state(1, rng).covariance for _ in range(1000)])
    pairs = np.array([two_mode_squeezed_vacuum(r).covariance for r in rng.uniform(0, 1, 1000)])
    lam, q = np.linalg.eigh(joint_potential(potential_matrix(res), g))
    return {
        "output_covariances (N=5, T=160)": lambda k: k.output_covariances(b.A, b.B, b.C, b.D, sigma0, inputs),
        "reservoir_covariances (N=5, T=160)": lambda k: k.reservoir_covariances(b.A, b.B, sigma0, inputs),
        "delayed_pair_covariances (tau=3)": lambda k: k.delayed_pair_covariances(b.A, b.B, b.C, b.D, sigma0, inputs, 3),
        "single_mode_fidelities (1000)": lambda k: k.single_mode_fidelities(singles_a, singles_b),
        "two_mode_log_negativities (1000)": lambda k: k.two_mode_log_negativities(pairs),
        "propagator_blocks (N+M=6)": lambda k: k.propagator_blocks(lam, q, n, 25.0),
    }


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    table = cases(np.random.default_rng(0))
    print(f"{'kernel':40s} {'numpy [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for name, call in table.items():
        t_py = best_time(lambda: call(py), args.repeat)
        if cy is None:
            print(f"{name:40s} {t_py * 1e6:12.1f} {'n/a':>12s} {'':>8s}")
            continue
        t_cy = best_time(lambda: call(cy), args.repeat)
        print(f"{name:40s} {t_py * 1e6:12.1f} {t_cy * 1e6:12.1f} {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
