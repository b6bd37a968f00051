"""Undirected simple graphs, shift operators, and dataset statistics.

Edges are stored once as canonical (min, max) pairs; Table-style statistics
report directed counts (2 * |E|) to match the usual benchmark convention.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .errors import InputError


class OperatorKind(Enum):
    ADJACENCY = "adjacency"
    LAPLACIAN = "laplacian"


class Normalization(Enum):
    NONE = "none"
    SYM = "sym"    # D^{-1/2} A D^{-1/2}
    RW = "rw"      # A D^{-1}  (column-stochastic)
    MEAN = "mean"  # D^{-1} A  (row-stochastic)


@dataclass
class Graph:
    """Immutable undirected simple graph with node features and optional labels.

    edges: (m, 2) int array, each row (u, v) with u < v, sorted lexicographically.
    features: (num_nodes, X) float array; X = 0 is allowed (featureless datasets).
    labels: optional (num_nodes,) int array of class ids.
    """

    num_nodes: int
    edges: np.ndarray
    features: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""
    _csr: sp.csr_matrix | None = field(default=None, repr=False, compare=False)

    @property
    def num_edges(self) -> int:
        """Number of stored undirected edges (|E|)."""
        return int(self.edges.shape[0])

    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency as CSR (cached)."""
        if self._csr is None:
            m = self.num_edges
            u, v = self.edges[:, 0], self.edges[:, 1]
            rows = np.concatenate([u, v])
            cols = np.concatenate([v, u])
            data = np.ones(2 * m)
            a = sp.csr_matrix((data, (rows, cols)), shape=(self.num_nodes, self.num_nodes))
            a.sort_indices()
            self._csr = a
        return self._csr

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency().sum(axis=1)).ravel()

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of node v."""
        a = self.adjacency()
        return a.indices[a.indptr[v]:a.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return i < len(nb) and nb[i] == v

    def with_edges(self, edges: np.ndarray, name: str | None = None) -> "Graph":
        """New graph sharing features/labels with a different edge set."""
        return build_graph(
            [tuple(e) for e in np.asarray(edges)],
            self.features,
            self.labels,
            num_nodes=self.num_nodes,
            name=self.name if name is None else name,
        )


@dataclass
class ShiftOperator:
    """A concrete message-passing matrix tied to its defining formula."""

    kind: OperatorKind
    normalization: Normalization
    self_loops: bool
    matrix: sp.spmatrix

    @property
    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass
class DatasetStats:
    """Table-style summary.

    Single graph: edges uses the directed convention 2 * |E| and
    average_degree = edges / nodes. Collections: edges is the mean undirected
    |E| per graph and average_degree the mean of per-graph 2 * |E| / n.
    """

    nodes: float
    edges: float
    average_degree: float
    diameter: float       # largest connected component; averaged for collections
    num_features: int
    num_classes: int
    edge_homophily: float | None
    num_graphs: int = 1


def canonical_edges(edge_list, num_nodes: int) -> np.ndarray:
    """Dedup, drop self-loops, store each pair once as (min, max), sort."""
    arr = np.asarray(list(edge_list), dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= num_nodes):
        raise InputError(f"edge endpoint out of range [0, {num_nodes})")
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keep = lo != hi
    pairs = np.stack([lo[keep], hi[keep]], axis=1)
    if pairs.size:
        pairs = np.unique(pairs, axis=0)
    else:
        pairs = pairs.reshape(0, 2)
    return pairs


def build_graph(edge_list, features, labels=None, num_nodes: int | None = None,
                name: str = "") -> Graph:
    """Build a Graph from a raw edge list, tolerating duplicates and self-loops.

    num_nodes defaults to the feature row count.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features.reshape(-1, 1)
    if num_nodes is None:
        num_nodes = features.shape[0]
    if features.shape[0] != num_nodes:
        raise InputError(
            f"feature rows ({features.shape[0]}) != num_nodes ({num_nodes})")
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape[0] != num_nodes:
            raise InputError("label count != num_nodes")
    edges = canonical_edges(edge_list, num_nodes)
    return Graph(num_nodes=num_nodes, edges=edges, features=features,
                 labels=labels, name=name)


def _inv_pow(d: np.ndarray, p: float) -> np.ndarray:
    # isolated nodes: 0 instead of division by zero
    out = np.zeros_like(d, dtype=np.float64)
    nz = d > 0
    out[nz] = d[nz] ** (-p)
    return out


def shift_operator(g: Graph, kind: OperatorKind | str = OperatorKind.ADJACENCY,
                   normalization: Normalization | str = Normalization.NONE,
                   self_loops: bool = False) -> ShiftOperator:
    """Construct A, L, or one of their normalizations, optionally self-loop augmented."""
    kind = OperatorKind(kind)
    normalization = Normalization(normalization)
    if g.num_nodes == 0:
        raise InputError("empty graph")

    a = g.adjacency().astype(np.float64)
    if self_loops:
        a = (a + sp.identity(g.num_nodes, format="csr")).tocsr()
    d = np.asarray(a.sum(axis=1)).ravel()

    if normalization is Normalization.NONE:
        adj = a
    elif normalization is Normalization.SYM:
        dh = sp.diags(_inv_pow(d, 0.5))
        adj = (dh @ a @ dh).tocsr()
    elif normalization is Normalization.RW:
        adj = (a @ sp.diags(_inv_pow(d, 1.0))).tocsr()
    else:  # MEAN
        adj = (sp.diags(_inv_pow(d, 1.0)) @ a).tocsr()

    if kind is OperatorKind.ADJACENCY:
        m = adj
    else:
        if normalization is Normalization.NONE:
            m = (sp.diags(d) - adj).tocsr()
        else:
            m = (sp.identity(g.num_nodes, format="csr") - adj).tocsr()
    return ShiftOperator(kind=kind, normalization=normalization,
                         self_loops=self_loops, matrix=m)


def triangle_count(g: Graph, edge: tuple[int, int]) -> int:
    """Number of triangles on an existing edge (u, v): |N(u) ∩ N(v)|."""
    u, v = edge
    if not g.has_edge(u, v):
        raise InputError(f"edge ({u}, {v}) not in graph")
    return int(np.intersect1d(g.neighbors(u), g.neighbors(v),
                              assume_unique=True).size)


def four_cycle_profile(g: Graph, edge: tuple[int, int]) -> tuple[int, int, float]:
    """Diagonal-free 4-cycle counts over an edge.

    Returns (sq_uv, sq_vu, gamma_max) where sq_uv counts neighbors w of u
    (w != v, w not adjacent to v) lying on at least one 4-cycle u-w-k-v with
    no diagonal (k not adjacent to u), and gamma_max is the maximum number of
    such 4-cycles through any single contributing node (1 when there are none).
    """
    u, v = edge
    if not g.has_edge(u, v):
        raise InputError(f"edge ({u}, {v}) not in graph")
    from . import kernels
    a = g.adjacency()
    us = np.array([min(u, v)], dtype=np.int64)
    vs = np.array([max(u, v)], dtype=np.int64)
    # profile is orientation-sensitive: recover the asked orientation
    sq_lo, sq_hi, gamma = kernels.edge_square_profile(a.indptr, a.indices, us, vs)
    if u < v:
        sq_uv, sq_vu = int(sq_lo[0]), int(sq_hi[0])
    else:
        sq_uv, sq_vu = int(sq_hi[0]), int(sq_lo[0])
    g_max = float(gamma[0]) if gamma[0] > 0 else 1.0
    return sq_uv, sq_vu, g_max


def edge_homophily(g: Graph) -> float:
    """Fraction of edges whose endpoints share a label."""
    if g.labels is None:
        raise InputError("graph has no labels")
    if g.num_edges == 0:
        return 0.0
    lab = g.labels
    same = lab[g.edges[:, 0]] == lab[g.edges[:, 1]]
    return float(np.mean(same))


def connected_components(g: Graph) -> np.ndarray:
    """Component id per node (BFS order of discovery)."""
    comp = np.full(g.num_nodes, -1, dtype=np.int64)
    cid = 0
    for s in range(g.num_nodes):
        if comp[s] >= 0:
            continue
        comp[s] = cid
        q = deque([s])
        while q:
            x = q.popleft()
            for y in g.neighbors(x):
                if comp[y] < 0:
                    comp[y] = cid
                    q.append(y)
        cid += 1
    return comp


def _bfs_ecc(g: Graph, source: int, mask: np.ndarray) -> int:
    dist = np.full(g.num_nodes, -1, dtype=np.int64)
    dist[source] = 0
    q = deque([source])
    far = 0
    while q:
        x = q.popleft()
        for y in g.neighbors(x):
            if mask[y] and dist[y] < 0:
                dist[y] = dist[x] + 1
                far = max(far, dist[y])
                q.append(y)
    return far


def diameter(g: Graph) -> int:
    """Exact diameter of the largest connected component (BFS from every node)."""
    if g.num_nodes == 0:
        return 0
    comp = connected_components(g)
    largest = np.argmax(np.bincount(comp))
    mask = comp == largest
    nodes = np.flatnonzero(mask)
    return max(_bfs_ecc(g, int(s), mask) for s in nodes)


def dataset_stats(data: Graph | list[Graph]) -> DatasetStats:
    """Summary statistics; averages over graphs when given a collection."""
    if isinstance(data, Graph):
        g = data
        num_classes = len(np.unique(g.labels)) if g.labels is not None else 0
        homo = edge_homophily(g) if g.labels is not None else None
        return DatasetStats(
            nodes=float(g.num_nodes),
            edges=float(2 * g.num_edges),
            average_degree=2.0 * g.num_edges / g.num_nodes if g.num_nodes else 0.0,
            diameter=float(diameter(g)),
            num_features=g.features.shape[1],
            num_classes=num_classes,
            edge_homophily=homo,
        )
    graphs = list(data)
    labels = [g.labels for g in graphs if g.labels is not None]
    num_classes = len(np.unique(np.concatenate(labels))) if labels else 0
    return DatasetStats(
        nodes=float(np.mean([g.num_nodes for g in graphs])),
        edges=float(np.mean([g.num_edges for g in graphs])),
        average_degree=float(np.mean(
            [2.0 * g.num_edges / g.num_nodes for g in graphs if g.num_nodes])),
        diameter=float(np.mean([diameter(g) for g in graphs])),
        num_features=graphs[0].features.shape[1],
        num_classes=num_classes,
        edge_homophily=None,
        num_graphs=len(graphs),
    )
