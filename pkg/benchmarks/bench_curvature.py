"""Timing comparison of the curvature-counting kernels across backends.

Runs the balanced Forman kernel over random graphs of increasing size with
the compiled (numba) backend, then re-executes itself with
REWIREBENCH_NO_NUMBA=1 to time the pure-numpy/python fallback, and prints
both side by side.

Usage: python3 benchmarks/bench_curvature.py [--sizes 200,500,1000]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from rewirebench import build_graph
from rewirebench.kernels import backend, balanced_forman_edges


def make_graph(n, avg_degree, seed):
    rng = np.random.default_rng(seed)
    p = avg_degree / (n - 1)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p]
    return build_graph(edges, np.zeros((n, 1)))


def time_backend(sizes, repeats=3):
    rows = []
    for n in sizes:
        g = make_graph(n, 8.0, seed=12345)
        a = g.adjacency()
        us = g.edges[:, 0].astype(np.int64)
        vs = g.edges[:, 1].astype(np.int64)
        balanced_forman_edges(a.indptr, a.indices, us, vs)  # warm up / jit
        best = min(
            _once(a, us, vs) for _ in range(repeats))
        rows.append((n, g.num_edges, best))
    return rows


def _once(a, us, vs):
    t0 = time.perf_counter()
    balanced_forman_edges(a.indptr, a.indices, us, vs)
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="200,500,1000,2000")
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    rows = time_backend(sizes)
    print(f"backend: {backend()}")
    print(f"{'nodes':>8} {'edges':>8} {'seconds':>10}")
    for n, m, t in rows:
        print(f"{n:8d} {m:8d} {t:10.4f}")

    if backend() == "numba" and os.environ.get("REWIREBENCH_NO_NUMBA") != "1":
        print()
        sys.stdout.flush()   # keep output ordered when piped
        env = dict(os.environ, REWIREBENCH_NO_NUMBA="1")
        subprocess.run([sys.executable, __file__, "--sizes", args.sizes],
                       env=env, check=True)


if __name__ == "__main__":
    main()
