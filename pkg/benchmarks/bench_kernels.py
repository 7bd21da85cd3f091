"""Numba kernels vs the numpy/Python fallback.

Times each kernel directly (both paths are importable side by side), then
an end-to-end exact solve in two subprocesses, one with QCONNPART_NO_NUMBA=1.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qconnpart import kernels
from qconnpart.instance import grid, preprocess_raise_connectivity, random_graph

END_TO_END = """
import time
from qconnpart import _accel
from qconnpart.exact import solve_exact
from qconnpart.heuristic import HeuristicSettings, solve_heuristic
from qconnpart.instance import Instance, grid
solve_exact(Instance(grid(3, 3), 2, 2, tau=0.5))  # compile outside the timing
t = time.perf_counter()
solve_exact(Instance(grid(4, 6), 3, 2, tau=0.1))
solve_heuristic(Instance(grid(8, 8), 3, 2, tau=0.1), HeuristicSettings(seed=0))
print(_accel.USE_NUMBA, time.perf_counter() - t)
"""


def best_of(fn, repeat):
    fn()  # warm up (numba compiles on first call)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def flow_sweep(fn, indptr, indices, rev, pairs):
    for s, t in pairs:
        fn(indptr, indices, rev, s, t, 3)


def graphs():
    yield "grid 10x10", grid(10, 10)
    yield "grid 20x20", grid(20, 20)
    yield "random 300", preprocess_raise_connectivity(random_graph(300, 0.02, seed=1), 2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if kernels.bfs_distances_nb is None:
        print("numba not available; nothing to compare")
        return 1

    print(f"{'kernel':<14}{'graph':<14}{'numba (ms)':>12}{'fallback (ms)':>15}{'speedup':>10}")
    for name, g in graphs():
        indptr, indices = g.csr()
        nb = best_of(lambda: kernels.bfs_distances_nb(indptr, indices), args.repeat)
        py = best_of(lambda: kernels.bfs_distances_numpy(indptr, indices), args.repeat)
        assert np.array_equal(kernels.bfs_distances_nb(indptr, indices), kernels.bfs_distances_numpy(indptr, indices))
        print(f"{'bfs':<14}{name:<14}{nb * 1e3:>12.2f}{py * 1e3:>15.2f}{py / nb:>10.1f}")

        rev = kernels.reverse_positions(indptr, indices)
        rng = np.random.default_rng(0)
        pairs = []
        while len(pairs) < 50:
            s, t = (int(v) for v in rng.choice(g.n, 2, replace=False))
            if not g.has_edge(s, t):
                pairs.append((s, t))
        nb = best_of(lambda: flow_sweep(kernels.vertex_flow_nb, indptr, indices, rev, pairs), args.repeat)
        py = best_of(lambda: flow_sweep(kernels.vertex_flow_py, indptr, indices, rev, pairs), args.repeat)
        print(f"{'flow x50':<14}{name:<14}{nb * 1e3:>12.2f}{py * 1e3:>15.2f}{py / nb:>10.1f}")

    print("\nend to end (exact grid 4x6 K=3 + heuristic grid 8x8 K=3):")
    for flag in ("0", "1"):
        env = dict(os.environ, QCONNPART_NO_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        use, secs = out.stdout.split()
        print(f"  numba={use:<6} {float(secs):.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
