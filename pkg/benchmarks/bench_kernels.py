"""Compare the compiled and numpy stepping kernels.

    python benchmarks/bench_kernels.py [--steps N] [--repeat R]
"""
import argparse
import time

import numpy as np

from mixedflow import _backend
from mixedflow.flow import SCHEMES, INTERIOR_MARGIN
from mixedflow.game import TensorGame
from mixedflow.oracle import appendix_game


def cases():
    rng = np.random.default_rng(0)
    yield "2x2 cycling game", appendix_game()
    yield "2 players, 10x10", TensorGame.two_player(rng.uniform(-1, 1, (10, 10)))
    yield "3 players, 4x4x4", TensorGame(tuple(rng.uniform(-1, 1, (4, 4, 4)) for _ in range(3)))


def time_kernel(game, scheme, backend, steps, repeat):
    costs = game.flat_costs()
    dims = np.asarray(game.action_counts, dtype=np.intp)
    x0 = np.concatenate([np.full(m, 1.0 / m) for m in game.action_counts])
    x0 += np.concatenate([np.linspace(-0.01, 0.01, m) for m in game.action_counts])
    best = np.inf
    for _ in range(repeat):
        x, integral = x0.copy(), np.zeros_like(x0)
        start = time.perf_counter()
        _backend.advance_tensor(costs, dims, SCHEMES[scheme], x, integral, 1e-3, steps,
                                1e-12, 1000, INTERIOR_MARGIN, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best / steps


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if "cython" not in _backend.AVAILABLE:
        print("compiled kernel not built; only the numpy kernel is timed")
    print(f"{'game':<20} {'scheme':<18} {'numpy us/step':>14} {'cython us/step':>15} {'speedup':>8}")
    for name, game in cases():
        for scheme in SCHEMES:
            py = time_kernel(game, scheme, "python", max(1, args.steps // 10), args.repeat)
            if "cython" in _backend.AVAILABLE:
                cy = time_kernel(game, scheme, "cython", args.steps, args.repeat)
                print(f"{name:<20} {scheme:<18} {py * 1e6:14.2f} {cy * 1e6:15.3f} {py / cy:8.1f}")
            else:
                print(f"{name:<20} {scheme:<18} {py * 1e6:14.2f} {'-':>15} {'-':>8}")


if __name__ == "__main__":
    main()
