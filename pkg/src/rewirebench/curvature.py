"""Balanced Forman edge curvature and its diagnostic distributions."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InputError
from .graph import Graph


@dataclass
class EdgeCurvature:
    """Curvature of one edge with its component terms retained.

    total = tree_term + triangle_term + square_term, with
    tree_term = 2/d_u + 2/d_v - 2.
    """

    u: int
    v: int
    total: float
    tree_term: float
    triangle_term: float
    square_term: float
    triangles: int
    squares_uv: int
    squares_vu: int
    gamma_max: float


def _curvature_arrays(g: Graph):
    a = g.adjacency()
    us = g.edges[:, 0].astype(np.int64)
    vs = g.edges[:, 1].astype(np.int64)
    ric, tri, sq_uv, sq_vu, gamma = kernels.balanced_forman_edges(
        a.indptr, a.indices, us, vs)
    return us, vs, ric, tri, sq_uv, sq_vu, gamma


def balanced_forman(g: Graph, edge: tuple[int, int]) -> EdgeCurvature:
    """Balanced Forman curvature of a single existing edge."""
    u, v = edge
    if not g.has_edge(u, v):
        raise InputError(f"edge ({u}, {v}) not in graph")
    a = g.adjacency()
    us = np.array([u], dtype=np.int64)
    vs = np.array([v], dtype=np.int64)
    ric, tri, sq_uv, sq_vu, gamma = kernels.balanced_forman_edges(
        a.indptr, a.indices, us, vs)
    deg = g.degrees
    du, dv = float(deg[u]), float(deg[v])
    dmax, dmin = max(du, dv), min(du, dv)
    tree = 2.0 / du + 2.0 / dv - 2.0
    tri_term = 2.0 * tri[0] / dmax + tri[0] / dmin
    if gamma[0] > 0:
        sq_term = (sq_uv[0] + sq_vu[0]) / (gamma[0] * dmax)
        g_max = float(gamma[0])
    else:
        sq_term = 0.0
        g_max = 1.0
    return EdgeCurvature(u=u, v=v, total=float(ric[0]), tree_term=tree,
                         triangle_term=tri_term, square_term=float(sq_term),
                         triangles=int(tri[0]), squares_uv=int(sq_uv[0]),
                         squares_vu=int(sq_vu[0]), gamma_max=g_max)


def edge_curvatures(g: Graph) -> np.ndarray:
    """Curvature value per stored edge, aligned with g.edges rows."""
    if g.num_edges == 0:
        return np.zeros(0)
    return _curvature_arrays(g)[2]


@dataclass
class CurvatureHistogram:
    values: np.ndarray      # per-edge curvatures, aligned with g.edges
    bin_edges: np.ndarray
    counts: np.ndarray


def curvature_distribution(g: Graph, bin_width: float = 0.25) -> CurvatureHistogram:
    """Per-edge curvatures plus a binned histogram (empty for edgeless graphs)."""
    vals = edge_curvatures(g)
    if vals.size == 0:
        return CurvatureHistogram(values=vals, bin_edges=np.zeros(0),
                                  counts=np.zeros(0, dtype=np.int64))
    lo = np.floor(vals.min() / bin_width) * bin_width
    hi = np.ceil(vals.max() / bin_width) * bin_width
    if hi <= lo:
        hi = lo + bin_width
    edges = np.arange(lo, hi + bin_width / 2, bin_width)
    counts, _ = np.histogram(vals, bins=edges)
    return CurvatureHistogram(values=vals, bin_edges=edges, counts=counts)


@dataclass
class CurvatureDelta:
    edges: np.ndarray       # (k, 2) common edges
    before: np.ndarray
    after: np.ndarray
    improved: int           # delta > 0
    worsened: int           # delta < 0

    @property
    def delta(self) -> np.ndarray:
        return self.after - self.before


def curvature_delta(g_before: Graph, g_after: Graph) -> CurvatureDelta:
    """Per-edge (before, after) curvature pairs on the common edge set."""
    if g_before.num_nodes != g_after.num_nodes:
        raise InputError("graphs must share the same node set")
    eb = {tuple(e) for e in g_before.edges}
    ea = {tuple(e) for e in g_after.edges}
    common = sorted(eb & ea)
    if not common:
        z = np.zeros(0)
        return CurvatureDelta(np.zeros((0, 2), dtype=np.int64), z, z, 0, 0)
    idx_b = {tuple(e): i for i, e in enumerate(g_before.edges)}
    idx_a = {tuple(e): i for i, e in enumerate(g_after.edges)}
    vb = edge_curvatures(g_before)
    va = edge_curvatures(g_after)
    before = np.array([vb[idx_b[e]] for e in common])
    after = np.array([va[idx_a[e]] for e in common])
    delta = after - before
    return CurvatureDelta(edges=np.array(common, dtype=np.int64),
                          before=before, after=after,
                          improved=int(np.sum(delta > 0)),
                          worsened=int(np.sum(delta < 0)))


def write_delta_csv(delta: CurvatureDelta, path) -> None:
    """Scatter-ready CSV: one row per common edge with before/after/delta."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "before", "after", "delta"])
        for (u, v), b, a in zip(delta.edges, delta.before, delta.after):
            w.writerow([int(u), int(v), f"{b:.10g}", f"{a:.10g}", f"{a - b:.10g}"])


def write_histogram_csv(hist: CurvatureHistogram, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_left", "bin_right", "count"])
        for i, c in enumerate(hist.counts):
            w.writerow([f"{hist.bin_edges[i]:.10g}",
                        f"{hist.bin_edges[i + 1]:.10g}", int(c)])
