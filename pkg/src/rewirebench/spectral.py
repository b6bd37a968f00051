"""Spectral quantities, Laplacian pseudoinverse, effective resistance,
and diffusion kernels."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import InputError
from .graph import (Graph, Normalization, OperatorKind, connected_components,
                    shift_operator)

log = logging.getLogger(__name__)

DENSE_EIG_LIMIT = 4000


@dataclass
class SpectralRadiusResult:
    value: float
    iterations: int
    converged: bool

    def __float__(self) -> float:
        return self.value


@dataclass
class SpectralReport:
    spectral_radius: float
    spectral_gap: float
    laplacian: str
    zero_multiplicity: int


def spectral_radius(m, tol: float = 1e-10, max_iter: int = 2000,
                    seed: int = 0, dense_fallback: bool = True) -> SpectralRadiusResult:
    """|lambda_max| by power iteration with a deterministic seeded start.

    Each step fits the dominant 2-dimensional Krylov recurrence so that
    complex conjugate pairs (rotating iterates of equal modulus) still yield
    a convergent modulus estimate. On non-convergence the best estimate is
    returned (flagged); with dense_fallback an exact eigvals call replaces it
    for small dense matrices.
    """
    if sp.issparse(m):
        n = m.shape[0]
        matvec = m.dot
    else:
        m = np.asarray(m, dtype=np.float64)
        n = m.shape[0]
        matvec = m.dot
    if m.shape[0] != m.shape[1]:
        raise InputError("spectral_radius requires a square matrix")
    if n == 0:
        return SpectralRadiusResult(0.0, 0, True)

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    est = 0.0
    for it in range(1, max_iter + 1):
        y = matvec(x)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return SpectralRadiusResult(0.0, it, True)
        z = matvec(y)
        # fit A^2 x ≈ a*(A x) + b*x: exact once x lies in a dominant
        # 2-dimensional invariant subspace; roots of t^2 - a t - b then give
        # the dominant eigenvalue(s), real or complex pair
        basis = np.stack([y, x], axis=1)
        coef, *_ = np.linalg.lstsq(basis, z, rcond=None)
        roots = np.roots([1.0, -coef[0], -coef[1]])
        new_est = float(np.max(np.abs(roots)))
        if not np.isfinite(new_est):
            new_est = float(ny)
        if it > 1 and abs(new_est - est) <= tol * max(1.0, abs(new_est)):
            return SpectralRadiusResult(new_est, it, True)
        est = new_est
        x = y / ny
    if dense_fallback and n <= DENSE_EIG_LIMIT:
        dense = m.toarray() if sp.issparse(m) else m
        val = float(np.max(np.abs(np.linalg.eigvals(dense))))
        log.warning("power iteration did not converge in %d iterations; "
                    "dense eigvals fallback used", max_iter)
        return SpectralRadiusResult(val, max_iter, False)
    log.warning("power iteration did not converge; returning best estimate")
    return SpectralRadiusResult(est, max_iter, False)


def _laplacian_sym_spectrum(g: Graph, kind: Normalization) -> np.ndarray:
    """Eigenvalues of the requested Laplacian; normalized variants share the
    symmetric normalized spectrum (similarity by D^{1/2})."""
    if kind is Normalization.NONE:
        mat = shift_operator(g, OperatorKind.LAPLACIAN, Normalization.NONE).matrix
    else:
        mat = shift_operator(g, OperatorKind.LAPLACIAN, Normalization.SYM).matrix
    n = g.num_nodes
    if n <= DENSE_EIG_LIMIT:
        return np.linalg.eigvalsh(mat.toarray())
    k = min(n - 1, 8 + n // 500, 32)
    vals = spla.eigsh(mat.tocsc(), k=k, sigma=-1e-3, which="LM",
                      return_eigenvectors=False, tol=1e-7)
    return np.sort(vals)


def spectral_gap(g: Graph, laplacian: Normalization | str = Normalization.SYM,
                 zero_tol: float = 1e-9) -> float:
    """Smallest strictly positive eigenvalue of the chosen Laplacian."""
    laplacian = Normalization(laplacian)
    if g.num_nodes < 2:
        raise InputError("spectral gap needs at least 2 nodes")
    vals = _laplacian_sym_spectrum(g, laplacian)
    thresh = zero_tol * max(1.0, float(np.max(np.abs(vals))))
    pos = vals[vals > thresh]
    return float(pos[0]) if pos.size else 0.0


def zero_eigenvalue_multiplicity(g: Graph,
                                 laplacian: Normalization | str = Normalization.SYM,
                                 zero_tol: float = 1e-9) -> int:
    vals = _laplacian_sym_spectrum(g, Normalization(laplacian))
    thresh = zero_tol * max(1.0, float(np.max(np.abs(vals))))
    return int(np.sum(np.abs(vals) <= thresh))


def spectral_report(g: Graph,
                    laplacian: Normalization | str = Normalization.SYM) -> SpectralReport:
    laplacian = Normalization(laplacian)
    a = shift_operator(g, OperatorKind.ADJACENCY, Normalization.NONE).matrix
    return SpectralReport(
        spectral_radius=float(spectral_radius(a)),
        spectral_gap=spectral_gap(g, laplacian),
        laplacian=laplacian.value,
        zero_multiplicity=zero_eigenvalue_multiplicity(g, laplacian),
    )


def laplacian_pseudoinverse(g: Graph, cutoff: float = 1e-9) -> np.ndarray:
    """Moore-Penrose pseudoinverse of the combinatorial Laplacian, by
    eigendecomposition with a relative zero-eigenvalue cutoff."""
    lap = shift_operator(g, OperatorKind.LAPLACIAN, Normalization.NONE).dense
    w, v = np.linalg.eigh(lap)
    lam_max = float(np.max(np.abs(w))) if w.size else 0.0
    inv = np.where(w > cutoff * max(lam_max, 1.0), 1.0 / np.where(w == 0, 1.0, w), 0.0)
    return (v * inv) @ v.T


@dataclass
class ResistanceMatrix:
    """Pairwise effective resistances; np.inf across components."""

    matrix: np.ndarray
    components: np.ndarray
    total_degree: float

    def commute_time(self) -> np.ndarray:
        """Com_uv = Res_uv * sum of all degrees."""
        return self.matrix * self.total_degree


def effective_resistance(g: Graph) -> ResistanceMatrix:
    """Res_uv = (1_u - 1_v)^T L^+ (1_u - 1_v), per connected component."""
    lp = laplacian_pseudoinverse(g)
    d = np.diag(lp)
    res = d[:, None] + d[None, :] - 2.0 * lp
    comp = connected_components(g)
    cross = comp[:, None] != comp[None, :]
    res[cross] = np.inf
    np.fill_diagonal(res, 0.0)
    res = np.maximum(res, 0.0)
    res = 0.5 * (res + res.T)
    return ResistanceMatrix(matrix=res, components=comp,
                            total_degree=float(np.sum(g.degrees)))


def _as_dense(t) -> np.ndarray:
    return t.toarray() if sp.issparse(t) else np.asarray(t, dtype=np.float64)


def heat_kernel(t_matrix, t: float) -> np.ndarray:
    """Heat diffusion exp(-t (I - T)) = sum_m e^{-t} t^m/m! T^m."""
    if t <= 0:
        raise InputError("heat kernel requires t > 0")
    td = _as_dense(t_matrix)
    n = td.shape[0]
    return scipy.linalg.expm(-t * (np.eye(n) - td))


def pagerank_kernel(t_matrix, alpha: float) -> np.ndarray:
    """Personalized PageRank alpha (I - (1-alpha) T)^{-1}."""
    if not 0.0 < alpha < 1.0:
        raise InputError("pagerank kernel requires alpha in (0, 1)")
    td = _as_dense(t_matrix)
    n = td.shape[0]
    a = np.eye(n) - (1.0 - alpha) * td
    try:
        return alpha * np.linalg.solve(a, np.eye(n))
    except np.linalg.LinAlgError:
        log.warning("pagerank system singular; pseudoinverse fallback")
        return alpha * np.linalg.pinv(a)


def sensitivity_topology_factor(m, hops: int) -> np.ndarray:
    """The graph-topology factor of the feature-sensitivity bound: M^hops."""
    if hops < 0:
        raise InputError("hops must be >= 0")
    md = _as_dense(m.matrix if hasattr(m, "matrix") else m)
    return np.linalg.matrix_power(md, hops)


def cheeger_bruteforce(g: Graph, max_nodes: int = 16) -> float:
    """Exhaustive Cheeger constant min_S cut(S) / min(vol(S), vol(S^c)).

    Test oracle: O(2^n), refused beyond max_nodes.
    """
    n = g.num_nodes
    if n > max_nodes:
        raise InputError(f"cheeger_bruteforce limited to {max_nodes} nodes")
    if n < 2:
        raise InputError("need at least 2 nodes")
    deg = g.degrees
    a = g.adjacency().toarray()
    best = np.inf
    for mask in range(1, (1 << n) - 1):
        s = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
        vol_s = float(deg[s].sum())
        vol_c = float(deg[~s].sum())
        denom = min(vol_s, vol_c)
        if denom == 0:
            continue
        cut = float(a[np.ix_(s, ~s)].sum())
        best = min(best, cut / denom)
    return float(best)
