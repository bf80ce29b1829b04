"""Clustering on PSD distances: NNPC, KM, KMit, linkage baselines and TSC.

All routines are deterministic given their inputs and ``seed``. Ties are
broken toward the smallest index everywhere. Cluster labels are ``0..L-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans

from .dissimilarity import distances_to, pairwise_distances

KMEANS_RESTARTS = 20
KMEANS_ITERATIONS = 100


class EmptyClusterError(ValueError):
    pass


@dataclass
class NeighborGraph:
    neighbors: np.ndarray  # (N, q), row j holds T_j in distance order
    adjacency: np.ndarray  # (N, N), A = Z + Z^T

    @property
    def size(self) -> int:
        return self.adjacency.shape[0]


@dataclass
class ClusteringResult:
    assignments: np.ndarray
    centers: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None
    nfc_violation_count: int | None = None
    graph: NeighborGraph | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n_clusters(self) -> int:
        return int(self.assignments.max()) + 1 if self.assignments.size else 0


def _check_distance_matrix(D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError("distance matrix must be square")
    return D


def knn_sets(D, q: int) -> np.ndarray:
    """Row ``i`` holds the ``q`` indices ``j != i`` closest to ``i``."""
    D = _check_distance_matrix(D)
    N = D.shape[0]
    if not 1 <= q <= N - 1:
        raise ValueError(f"q must lie in [1, {N - 1}], got {q}")
    work = D.copy()
    np.fill_diagonal(work, np.inf)
    return np.argsort(work, axis=1, kind="stable")[:, :q]


def _graph_from_weights(neighbors: np.ndarray, weights: np.ndarray) -> NeighborGraph:
    N = neighbors.shape[0]
    Z = np.zeros((N, N))
    cols = np.repeat(np.arange(N), neighbors.shape[1])
    Z[neighbors.ravel(), cols] = weights[neighbors.ravel(), cols]
    return NeighborGraph(neighbors=neighbors, adjacency=Z + Z.T)


def nnpc_adjacency(D, q: int) -> NeighborGraph:
    """q-nearest-neighbor graph with edge weights ``exp(-2 d)``.

    Column ``j`` of ``Z`` carries ``exp(-2 d(i, j))`` for ``i`` in ``T_j``;
    mutual neighbors therefore get twice the weight.
    """
    D = _check_distance_matrix(D)
    return _graph_from_weights(knn_sets(D, q), np.exp(-2.0 * D))


def normalized_laplacian(A) -> np.ndarray:
    """``I - Deg^{-1/2} A Deg^{-1/2}`` after validating ``A``."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("adjacency must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("adjacency matrix is not symmetric")
    if np.any(A < 0):
        raise ValueError("adjacency matrix has negative weights")
    deg = A.sum(axis=1)
    if np.any(deg <= 0):
        raise ValueError(f"isolated node(s) {np.flatnonzero(deg <= 0).tolist()} in the graph")
    s = 1.0 / np.sqrt(deg)
    Lsym = np.eye(A.shape[0]) - s[:, None] * A * s[None, :]
    return 0.5 * (Lsym + Lsym.T)


def spectral_cluster(A, L: int, seed: int = 0) -> ClusteringResult:
    """Normalized spectral clustering of the weighted graph ``A`` into ``L`` groups."""
    Lsym = normalized_laplacian(A)
    N = Lsym.shape[0]
    if not 1 <= L <= N:
        raise ValueError(f"number of clusters must lie in [1, {N}], got {L}")
    evals, evecs = np.linalg.eigh(Lsym)
    if L == 1:
        return ClusteringResult(np.zeros(N, dtype=int), eigenvalues=evals)
    U = evecs[:, :L]
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    U = np.divide(U, norms, out=np.zeros_like(U), where=norms > 1e-12)
    km = KMeans(
        n_clusters=L,
        init="k-means++",
        n_init=KMEANS_RESTARTS,
        max_iter=KMEANS_ITERATIONS,
        random_state=seed,
    ).fit(U)
    return ClusteringResult(_relabel_by_first_seen(km.labels_), eigenvalues=evals)


def _relabel_by_first_seen(labels: np.ndarray) -> np.ndarray:
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    remap = np.empty(order.size, dtype=int)
    remap[np.unique(labels)[order]] = np.arange(order.size)
    return remap[labels]


def eigengap_estimate(A, L_max: int) -> int:
    """Cluster count from the largest gap among the ``L_max`` smallest eigenvalues."""
    evals = np.linalg.eigvalsh(normalized_laplacian(A))
    N = evals.size
    if not 2 <= L_max <= N:
        raise ValueError(f"L_max must lie in [2, {N}], got {L_max}")
    gaps = np.diff(evals[:L_max])
    return int(np.argmax(gaps)) + 1


def count_cross_edges(A, truth) -> int:
    """Number of undirected edges joining different true labels."""
    truth = np.asarray(truth)
    cross = truth[:, None] != truth[None, :]
    return int(np.count_nonzero(np.triu((np.asarray(A) > 0) & cross, k=1)))


def nnpc(
    psds,
    L: int | None,
    q: int,
    metric: str = "L1",
    seed: int = 0,
    truth=None,
    D=None,
    L_max: int | None = None,
) -> ClusteringResult:
    """Nearest neighbor process clustering.

    ``L=None`` estimates the number of clusters with the eigengap heuristic
    over the ``L_max`` (default ``min(N, 10)``) smallest eigenvalues.
    """
    D = pairwise_distances(psds, metric) if D is None else _check_distance_matrix(D)
    N = D.shape[0]
    graph = nnpc_adjacency(D, q)
    if L is None:
        L = eigengap_estimate(graph.adjacency, L_max or min(N, 10))
    elif L < 1:
        raise ValueError(f"number of clusters must be positive, got {L}")
    res = spectral_cluster(graph.adjacency, L, seed=seed)
    res.graph = graph
    if truth is not None:
        res.nfc_violation_count = count_cross_edges(graph.adjacency, truth)
    return res


def km_farthest(D, L: int) -> ClusteringResult:
    """One k-means pass with farthest-point centers, starting from observation 0."""
    D = _check_distance_matrix(D)
    N = D.shape[0]
    if not 1 <= L <= N:
        raise ValueError(f"number of clusters must lie in [1, {N}], got {L}")
    centers = [0]
    nearest = D[0].copy()
    for _ in range(1, L):
        c = int(np.argmax(nearest))
        centers.append(c)
        nearest = np.minimum(nearest, D[c])
    assignments = np.argmin(D[:, centers], axis=1)
    if np.unique(assignments).size < L:
        raise EmptyClusterError("farthest-point initialization produced an empty cluster")
    return ClusteringResult(assignments, centers=np.array(centers))


def kmit(psds, L: int, iters: int = 100, metric: str = "L1", D=None) -> ClusteringResult:
    """KM followed by up to ``iters`` centroid/reassignment rounds in PSD space.

    Centers are pointwise means of the assigned PSD estimates. An empty
    cluster keeps its previous center.
    """
    P = np.asarray([getattr(s, "values", s) for s in psds], dtype=float)
    D = pairwise_distances(P, metric) if D is None else D
    init = km_farthest(D, L)
    assignments = init.assignments
    centers = P[init.centers].copy()
    done = 0
    for done in range(1, iters + 1):
        for ell in range(L):
            members = assignments == ell
            if members.any():
                centers[ell] = P[members].mean(axis=0)
        updated = np.argmin(distances_to(P, centers, metric), axis=1)
        if np.array_equal(updated, assignments):
            break
        assignments = updated
    if iters == 0:
        return init
    return ClusteringResult(assignments, centers=centers, extra={"iterations": done})


LINKAGES = ("single", "average", "complete")


def agglomerate(D, linkage: str) -> list[tuple[int, int, float]]:
    """Full merge sequence as ``(a, b, height)``, clusters named by smallest member.

    Lance-Williams updates; a merge tie goes to the lexicographically
    smallest ``(a, b)``.
    """
    D = _check_distance_matrix(D)
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    N = D.shape[0]
    work = D.copy()
    work[np.tril_indices(N)] = np.inf
    full = D.copy()
    sizes = np.ones(N)
    active = np.ones(N, dtype=bool)
    merges = []
    for _ in range(N - 1):
        flat = int(np.argmin(work))
        a, b = divmod(flat, N)
        h = work[a, b]
        merges.append((a, b, float(h)))
        da, db = full[a], full[b]
        if linkage == "single":
            new = np.minimum(da, db)
        elif linkage == "complete":
            new = np.maximum(da, db)
        else:
            new = (sizes[a] * da + sizes[b] * db) / (sizes[a] + sizes[b])
        full[a, :] = new
        full[:, a] = new
        sizes[a] += sizes[b]
        active[b] = False
        work[b, :] = np.inf
        work[:, b] = np.inf
        lower = np.flatnonzero(active[:a])
        upper = np.flatnonzero(active)
        upper = upper[upper > a]
        work[lower, a] = new[lower]
        work[a, upper] = new[upper]
    return merges


def labels_from_merges(merges, N: int, L: int) -> np.ndarray:
    """Cut a merge sequence at ``L`` clusters; labels ordered by smallest member."""
    parent = np.arange(N)
    for a, b, _ in merges[: N - L]:
        parent[parent == b] = a
    _, labels = np.unique(parent, return_inverse=True)
    return labels


def hierarchical(D, linkage: str, L: int) -> ClusteringResult:
    """Agglomerative clustering (single/average/complete linkage) cut at ``L``."""
    D = _check_distance_matrix(D)
    N = D.shape[0]
    if not 1 <= L <= N:
        raise ValueError(f"number of clusters must lie in [1, {N}], got {L}")
    merges = agglomerate(D, linkage)
    return ClusteringResult(labels_from_merges(merges, N, L), extra={"merges": merges})


def tsc_baseline(X, L: int, q: int, seed: int = 0) -> ClusteringResult:
    """Inner-product neighbor graph on raw sample vectors, then spectral clustering.

    ``T_j`` holds the ``q`` vectors with largest ``|<x_i, x_j>|``; edge weight
    is ``exp(-2 (1 - |cos angle|))``.
    """
    X = np.asarray([getattr(x, "samples", x) for x in X], dtype=float)
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0):
        raise ValueError(f"zero-norm observation(s) {np.flatnonzero(norms == 0).tolist()}")
    N = X.shape[0]
    if not 1 <= q <= N - 1:
        raise ValueError(f"q must lie in [1, {N - 1}], got {q}")
    G = np.abs(X @ X.T)
    order = G.copy()
    np.fill_diagonal(order, -np.inf)
    neighbors = np.argsort(-order, axis=1, kind="stable")[:, :q]
    weights = np.exp(-2.0 * (1.0 - G / np.outer(norms, norms)))
    graph = _graph_from_weights(neighbors, weights)
    res = spectral_cluster(graph.adjacency, L, seed=seed)
    res.graph = graph
    return res
