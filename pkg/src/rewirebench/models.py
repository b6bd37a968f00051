"""Training-free representation models: SGC, graph echo state networks,
global pooling, and the closed-form ridge readout."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import InputError
from .spectral import spectral_radius

log = logging.getLogger(__name__)


def _as_operator(m):
    if hasattr(m, "matrix"):
        return m.matrix
    return m


def input_features(features: np.ndarray) -> np.ndarray:
    """Featureless datasets get a constant scalar 1 per node (no structural
    features are ever added)."""
    if features.shape[1] == 0:
        return np.ones((features.shape[0], 1))
    return features


def sgc_embed(m, x: np.ndarray, hops: int) -> np.ndarray:
    """h = M^hops x via repeated application (M never materialized as a power)."""
    if hops < 0:
        raise InputError("hops must be >= 0")
    mat = _as_operator(m)
    h = np.asarray(x, dtype=np.float64)
    for _ in range(hops):
        h = mat @ h
    return h


@dataclass
class ReservoirParams:
    w_in: np.ndarray        # H x X
    w_hat: np.ndarray       # H x H, rescaled to the target spectral radius
    bias: np.ndarray        # H
    input_scaling: float
    target_rho: float
    seed: int
    iterations: int = 30


def gesn_init(x_dim: int, hidden: int, input_scaling: float, target_rho: float,
              seed: int, iterations: int = 30) -> ReservoirParams:
    """Draw reservoir weights uniform in [-1, 1] and rescale the recurrent
    matrix to the requested spectral radius (power iteration estimate with
    exact fallback)."""
    rng = np.random.default_rng(seed)
    w_in = rng.uniform(-1.0, 1.0, size=(hidden, x_dim)) * input_scaling
    w_raw = rng.uniform(-1.0, 1.0, size=(hidden, hidden))
    bias = rng.uniform(-1.0, 1.0, size=hidden) * input_scaling
    if target_rho == 0.0:
        w_hat = np.zeros_like(w_raw)
    else:
        rho_raw = spectral_radius(w_raw, tol=1e-12, max_iter=5000, seed=seed)
        rho_val = float(rho_raw)
        attempt = 0
        while rho_val == 0.0 and attempt < 8:  # measure-zero redraw
            attempt += 1
            w_raw = np.random.default_rng(seed + 7919 * attempt).uniform(
                -1.0, 1.0, size=(hidden, hidden))
            rho_val = float(spectral_radius(w_raw, tol=1e-12, max_iter=5000,
                                            seed=seed))
        w_hat = w_raw * (target_rho / rho_val)
    return ReservoirParams(w_in=w_in, w_hat=w_hat, bias=bias,
                           input_scaling=input_scaling, target_rho=target_rho,
                           seed=seed, iterations=iterations)


def gesn_embed(m, x: np.ndarray, params: ReservoirParams) -> np.ndarray:
    """Iterate h_v <- tanh(W_in x_v + sum_u M_vu W_hat h_u + b), h^(0) = 0.

    Receiver-row convention: column v of the state update aggregates
    neighbors u weighted by M_vu. Returns (num_nodes, H).
    """
    mat = _as_operator(m)
    x = input_features(np.asarray(x, dtype=np.float64))
    n = x.shape[0]
    h_dim = params.w_in.shape[0]
    drive = params.w_in @ x.T + params.bias[:, None]   # H x N
    h = np.zeros((h_dim, n))
    if not sp.issparse(mat):
        mat = np.asarray(mat, dtype=np.float64)
    for _ in range(params.iterations):
        # row v of (M @ (W h)^T) aggregates neighbors u with weight M_vu
        h = np.tanh(drive + (mat @ (params.w_hat @ h).T).T)
    return h.T


def pool(embeddings: np.ndarray, mode: str = "sum") -> np.ndarray:
    """Parameter-free global pooling over nodes."""
    if embeddings.shape[0] == 0:
        raise InputError("cannot pool an empty graph")
    if mode == "sum":
        return embeddings.sum(axis=0)
    if mode == "mean":
        return embeddings.mean(axis=0)
    raise InputError(f"unknown pooling mode {mode!r}")


@dataclass
class ReadoutParams:
    w_out: np.ndarray       # C x H
    b_out: np.ndarray       # C
    ridge_lambda: float
    classes: np.ndarray     # class ids, column order of scores


def one_hot(labels: np.ndarray, classes: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(classes, labels)
    out = np.zeros((labels.shape[0], classes.shape[0]))
    out[np.arange(labels.shape[0]), idx] = 1.0
    return out


def ridge_fit(embeddings: np.ndarray, labels: np.ndarray,
              ridge_lambda: float) -> ReadoutParams:
    """Closed-form ridge regression of one-hot targets on embeddings.

    Minimizes ||E w + b - Y||^2 + lambda ||w||^2; the bias column is not
    regularized (augmented normal equations).
    """
    e = np.asarray(embeddings, dtype=np.float64)
    labels = np.asarray(labels)
    classes = np.unique(labels)
    y = one_hot(labels, classes)
    n, d = e.shape
    aug = np.concatenate([e, np.ones((n, 1))], axis=1)
    gram = aug.T @ aug
    reg = np.eye(d + 1) * ridge_lambda
    reg[d, d] = 0.0
    rhs = aug.T @ y
    try:
        sol = np.linalg.solve(gram + reg, rhs)
    except np.linalg.LinAlgError:
        log.warning("singular ridge system (lambda=%g); pseudoinverse used",
                    ridge_lambda)
        sol = np.linalg.pinv(gram + reg) @ rhs
    return ReadoutParams(w_out=sol[:d].T, b_out=sol[d], ridge_lambda=ridge_lambda,
                         classes=classes)


def predict(embeddings: np.ndarray, readout: ReadoutParams):
    """Affine readout scores and argmax class ids."""
    scores = embeddings @ readout.w_out.T + readout.b_out
    preds = readout.classes[np.argmax(scores, axis=1)]
    return preds, scores
