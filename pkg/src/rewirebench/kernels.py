"""Hot per-edge counting kernels over CSR adjacency arrays.

Two interchangeable backends: a numba @njit implementation (default) and a
pure-numpy/python fallback. Set REWIREBENCH_NO_NUMBA=1 to force the fallback;
it is also used automatically when numba is unavailable.

All functions take the CSR (indptr, indices) of a symmetric 0/1 adjacency
with sorted indices, plus parallel arrays us/vs of edge endpoints, and return
per-edge counts:

    edge_triangles          -> #triangles on each edge, |N(u) ∩ N(v)|
    edge_square_profile     -> (#sq_uv, #sq_vu, gamma_max) for diagonal-free
                               4-cycles based on each edge (gamma_max = 0
                               signals "no 4-cycles")
"""

from __future__ import annotations

import os

import numpy as np

USE_NUMBA = os.environ.get("REWIREBENCH_NO_NUMBA", "0") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def _in_sorted(arr, lo, hi, x):
    """Binary search for x in arr[lo:hi] (sorted)."""
    while lo < hi:
        mid = (lo + hi) // 2
        a = arr[mid]
        if a == x:
            return True
        if a < x:
            lo = mid + 1
        else:
            hi = mid
    return False


@njit(cache=True)
def _edge_triangles_impl(indptr, indices, us, vs):
    m = us.shape[0]
    out = np.zeros(m, dtype=np.int64)
    for e in range(m):
        u, v = us[e], vs[e]
        i, j = indptr[u], indptr[v]
        iu, jv = indptr[u + 1], indptr[v + 1]
        c = 0
        while i < iu and j < jv:
            a, b = indices[i], indices[j]
            if a == b:
                c += 1
                i += 1
                j += 1
            elif a < b:
                i += 1
            else:
                j += 1
        out[e] = c
    return out


@njit(cache=True)
def _square_side(indptr, indices, u, v):
    """One orientation: count neighbors w of u on a diagonal-free 4-cycle
    u-w-k-v, and the max number of such cycles through any single w."""
    count = 0
    best = 0
    for i in range(indptr[u], indptr[u + 1]):
        w = indices[i]
        if w == v or w == u:
            continue
        if _in_sorted(indices, indptr[v], indptr[v + 1], w):
            continue  # diagonal v-w
        cw = 0
        for j in range(indptr[w], indptr[w + 1]):
            k = indices[j]
            if k == u or k == v:
                continue
            if not _in_sorted(indices, indptr[v], indptr[v + 1], k):
                continue  # k must close the cycle at v
            if _in_sorted(indices, indptr[u], indptr[u + 1], k):
                continue  # diagonal u-k
            cw += 1
        if cw > 0:
            count += 1
            if cw > best:
                best = cw
    return count, best


@njit(cache=True)
def _edge_square_profile_impl(indptr, indices, us, vs):
    m = us.shape[0]
    sq_uv = np.zeros(m, dtype=np.int64)
    sq_vu = np.zeros(m, dtype=np.int64)
    gamma = np.zeros(m, dtype=np.int64)
    for e in range(m):
        u, v = us[e], vs[e]
        cu, bu = _square_side(indptr, indices, u, v)
        cv, bv = _square_side(indptr, indices, v, u)
        sq_uv[e] = cu
        sq_vu[e] = cv
        gamma[e] = max(bu, bv)
    return sq_uv, sq_vu, gamma


@njit(cache=True)
def _balanced_forman_impl(indptr, indices, us, vs):
    m = us.shape[0]
    ric = np.zeros(m, dtype=np.float64)
    tri = _edge_triangles_impl(indptr, indices, us, vs)
    sq_uv, sq_vu, gamma = _edge_square_profile_impl(indptr, indices, us, vs)
    for e in range(m):
        u, v = us[e], vs[e]
        du = indptr[u + 1] - indptr[u]
        dv = indptr[v + 1] - indptr[v]
        dmax = max(du, dv)
        dmin = min(du, dv)
        r = 2.0 / du + 2.0 / dv - 2.0
        r += 2.0 * tri[e] / dmax + tri[e] / dmin
        if gamma[e] > 0:
            r += (sq_uv[e] + sq_vu[e]) / (gamma[e] * dmax)
        ric[e] = r
    return ric, tri, sq_uv, sq_vu, gamma


def _as_arrays(indptr, indices, us, vs):
    return (np.asarray(indptr, dtype=np.int64), np.asarray(indices, dtype=np.int64),
            np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64))


def edge_triangles(indptr, indices, us, vs):
    return _edge_triangles_impl(*_as_arrays(indptr, indices, us, vs))


def edge_square_profile(indptr, indices, us, vs):
    return _edge_square_profile_impl(*_as_arrays(indptr, indices, us, vs))


def balanced_forman_edges(indptr, indices, us, vs):
    """(ric, tri, sq_uv, sq_vu, gamma_max) for each edge; gamma_max = 0 means
    no 4-cycles (square term contributed 0)."""
    return _balanced_forman_impl(*_as_arrays(indptr, indices, us, vs))


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
