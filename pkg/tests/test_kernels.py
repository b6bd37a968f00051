"""Backend parity: the numba kernels and the pure-python fallback must agree,
and both must agree with the mutable set-adjacency curvature used inside SDRF."""

import subprocess
import sys

import numpy as np
import pytest

from rewirebench import kernels
from rewirebench.rewiring import _adj_sets, local_balanced_forman

from conftest import random_graph


def _all_edge_curvatures(g):
    a = g.adjacency()
    us = g.edges[:, 0].astype(np.int64)
    vs = g.edges[:, 1].astype(np.int64)
    return kernels.balanced_forman_edges(a.indptr, a.indices, us, vs)


def test_local_curvature_matches_kernel(rng):
    for _ in range(20):
        g = random_graph(12, 0.4, rng)
        if g.num_edges == 0:
            continue
        adj = _adj_sets(g)
        ric = _all_edge_curvatures(g)[0]
        for (u, v), r in zip(g.edges, ric):
            assert local_balanced_forman(adj, int(u), int(v)) == pytest.approx(
                r, abs=1e-12)


def test_numpy_fallback_matches_numba(tmp_path, rng):
    """Run the same computation with REWIREBENCH_NO_NUMBA=1 in a subprocess
    and compare byte-for-byte."""
    g = random_graph(25, 0.3, rng)
    out = tmp_path / "ric.npy"
    script = (
        "import numpy as np\n"
        "from rewirebench import build_graph, kernels\n"
        f"edges = {[tuple(map(int, e)) for e in g.edges]}\n"
        f"g = build_graph(edges, np.zeros(({g.num_nodes}, 1)))\n"
        "a = g.adjacency()\n"
        "us = g.edges[:, 0].astype(np.int64); vs = g.edges[:, 1].astype(np.int64)\n"
        "ric, tri, suv, svu, gam = kernels.balanced_forman_edges("
        "a.indptr, a.indices, us, vs)\n"
        "assert kernels.backend() == 'numpy', kernels.backend()\n"
        f"np.save({str(out)!r}, np.stack([ric, tri, suv, svu, gam]))\n"
    )
    env = {"REWIREBENCH_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"}
    subprocess.run([sys.executable, "-c", script], check=True, env=env)
    fallback = np.load(out)
    ric, tri, suv, svu, gam = _all_edge_curvatures(g)
    assert np.array_equal(fallback, np.stack([ric, tri, suv, svu, gam]))
