import itertools

import numpy as np
import pytest
from scipy.spatial.distance import squareform

from procclust.cluster import (
    agglomerate,
    count_cross_edges,
    eigengap_estimate,
    hierarchical,
    km_farthest,
    kmit,
    knn_sets,
    nnpc,
    nnpc_adjacency,
    spectral_cluster,
    tsc_baseline,
)
from procclust.dissimilarity import pairwise_distances
from procclust.evaluation import clustering_error
from procclust.genmodel import CorruptionSpec, ar2_model, make_dataset
from procclust.spectra import bartlett_window, estimate_psds


def random_D(N, seed):
    rng = np.random.default_rng(seed)
    return squareform(rng.random(N * (N - 1) // 2))


def block_D(sizes, within=0.0, across=1.0):
    labels = np.repeat(np.arange(len(sizes)), sizes)
    D = np.where(labels[:, None] == labels[None, :], within, across).astype(float)
    np.fill_diagonal(D, 0)
    return D, labels


# --- neighbor sets ------------------------------------------------------------

def test_knn_sorted_rows():
    N = 6
    # row i strictly increasing in j
    T = knn_sets(np.tile(np.arange(N, dtype=float), (N, 1)), 2)
    for i in range(N):
        assert T[i].tolist() == [j for j in range(N) if j != i][:2]


def test_knn_ties_toward_smaller_index():
    D = np.ones((5, 5)) - np.eye(5)
    T = knn_sets(D, 3)
    assert T[0].tolist() == [1, 2, 3]
    assert T[2].tolist() == [0, 1, 3]
    assert T[4].tolist() == [0, 1, 2]


def test_knn_matches_sort_oracle():
    D = random_D(12, 0)
    T = knn_sets(D, 3)
    for i in range(12):
        oracle = sorted((D[i, j], j) for j in range(12) if j != i)[:3]
        assert T[i].tolist() == [j for _, j in oracle]


@pytest.mark.parametrize("q", [0, 5])
def test_knn_range(q):
    with pytest.raises(ValueError):
        knn_sets(random_D(5, 1), q)


# --- adjacency ----------------------------------------------------------------

def test_adjacency_two_nodes():
    A = nnpc_adjacency(np.zeros((2, 2)), 1).adjacency
    assert A[0, 1] == A[1, 0] == 2.0


def test_adjacency_mutual_and_one_directional():
    # 0 <-> 1 mutual at 0.5; 2's nearest is 1, but 1's nearest is 0
    D = np.array([[0, 0.5, 0.9], [0.5, 0, 0.6], [0.9, 0.6, 0]])
    g = nnpc_adjacency(D, 1)
    assert g.adjacency[0, 1] == pytest.approx(2 * np.exp(-1))
    assert g.adjacency[1, 2] == pytest.approx(np.exp(-1.2))
    assert g.adjacency[0, 2] == 0
    A = g.adjacency
    assert np.array_equal(A, A.T) and A.min() >= 0 and A.max() <= 2


# --- spectral clustering --------------------------------------------------------

def test_spectral_components():
    A = np.zeros((6, 6))
    A[:3, :3] = 1
    A[3:, 3:] = 1
    np.fill_diagonal(A, 0)
    res = spectral_cluster(A, 2)
    assert clustering_error(res.assignments, [0, 0, 0, 1, 1, 1]) == 0
    assert np.sum(res.eigenvalues < 1e-10) == 2


def test_spectral_single_cluster():
    A = np.ones((5, 5)) - np.eye(5)
    assert spectral_cluster(A, 1).assignments.tolist() == [0] * 5


def test_spectral_planted_blocks():
    truth = np.repeat([0, 1], 15)
    for seed in range(10):
        rng = np.random.default_rng(seed)
        A = np.where(truth[:, None] == truth[None, :], 1.9, 0.01) * (0.9 + 0.1 * rng.random((30, 30)))
        A = np.triu(A, 1)
        A = A + A.T
        assert clustering_error(spectral_cluster(A, 2, seed=seed).assignments, truth) == 0


def test_spectral_errors():
    A = np.ones((3, 3)) - np.eye(3)
    A[0, 1] = 0.5
    with pytest.raises(ValueError, match="symmetric"):
        spectral_cluster(A, 2)
    B = np.zeros((3, 3))
    B[0, 1] = B[1, 0] = 1
    with pytest.raises(ValueError, match="isolated"):
        spectral_cluster(B, 2)


def test_spectral_deterministic():
    D = random_D(20, 4)
    A = nnpc_adjacency(D, 4).adjacency
    a = spectral_cluster(A, 3, seed=7).assignments
    b = spectral_cluster(A, 3, seed=7).assignments
    assert np.array_equal(a, b)


# --- eigengap -------------------------------------------------------------------

def _components(sizes):
    N = sum(sizes)
    A = np.zeros((N, N))
    start = 0
    for s in sizes:
        A[start : start + s, start : start + s] = 1
        start += s
    np.fill_diagonal(A, 0)
    return A


def test_eigengap_two_components():
    assert eigengap_estimate(_components([4, 5]), 5) == 2


def test_eigengap_three_components():
    assert eigengap_estimate(_components([4, 4, 4]), 6) == 3


# --- NNPC -----------------------------------------------------------------------

def test_nnpc_identical_groups():
    rng = np.random.default_rng(0)
    a, b = rng.random(64), rng.random(64)
    P = np.array([a] * 6 + [b] * 6)
    res = nnpc(P, 2, 4)
    assert clustering_error(res.assignments, [0] * 6 + [1] * 6) == 0


def test_nnpc_block_distances():
    D, labels = block_D([8, 8])
    res = nnpc(None, 2, 5, D=D, truth=labels)
    assert clustering_error(res.assignments, labels) == 0
    assert res.nfc_violation_count == 0


def test_nnpc_q_too_large_forces_false_connections():
    D, labels = block_D([5, 5], within=0.1, across=0.9)
    res = nnpc(None, 2, 5, D=D, truth=labels)
    assert res.nfc_violation_count > 0


def test_count_cross_edges():
    A = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]], dtype=float)
    assert count_cross_edges(A, [0, 0, 1]) == 1


# --- KM / KMit ------------------------------------------------------------------

def km_oracle(D, L):
    # line-by-line transcription of farthest-point selection then assignment
    N = len(D)
    c = [0]
    for _ in range(2, L + 1):
        best, best_val = None, -1.0
        for i in range(N):
            v = min(D[i][cl] for cl in c)
            if v > best_val:
                best, best_val = i, v
        c.append(best)
    out = []
    for i in range(N):
        best_l, best_d = None, np.inf
        for ell, cl in enumerate(c):
            if D[i][cl] < best_d:
                best_l, best_d = ell, D[i][cl]
        out.append(best_l)
    return c, out


def test_km_two_groups():
    D, labels = block_D([4, 6])
    res = km_farthest(D, 2)
    assert res.centers.tolist() == [0, 4]
    assert res.assignments.tolist() == labels.tolist()


def test_km_all_centers():
    D = random_D(7, 3)
    res = km_farthest(D, 7)
    assert sorted(res.centers.tolist()) == list(range(7))
    assert res.assignments.tolist() == res.centers.argsort().tolist()


@pytest.mark.parametrize("seed", range(5))
def test_km_matches_oracle(seed):
    D = random_D(10, seed)
    c, out = km_oracle(D, 3)
    res = km_farthest(D, 3)
    assert res.centers.tolist() == c
    assert res.assignments.tolist() == out


def test_km_rejects_too_many_clusters():
    with pytest.raises(ValueError):
        km_farthest(random_D(3, 0), 4)


def test_kmit_zero_iterations_is_km():
    P = np.random.default_rng(0).random((10, 32))
    D = pairwise_distances(P)
    assert np.array_equal(kmit(P, 3, iters=0).assignments, km_farthest(D, 3).assignments)


def test_kmit_fixed_point():
    rng = np.random.default_rng(1)
    a, b = rng.random(32), rng.random(32) + 3
    P = np.array([a + 0.01 * rng.random(32) for _ in range(5)] + [b + 0.01 * rng.random(32) for _ in range(5)])
    res = kmit(P, 2)
    assert np.array_equal(res.assignments, km_farthest(pairwise_distances(P), 2).assignments)
    assert res.extra["iterations"] == 1


# --- hierarchical ---------------------------------------------------------------

def naive_agglomeration(D, linkage):
    agg = {"single": min, "complete": max, "average": lambda v: sum(v) / len(v)}[linkage]
    clusters = [[i] for i in range(len(D))]
    merges = []
    while len(clusters) > 1:
        best = None
        for x, y in itertools.combinations(range(len(clusters)), 2):
            d = agg([D[i][j] for i in clusters[x] for j in clusters[y]])
            key = (d, min(clusters[x]), min(clusters[y]))
            if best is None or key < best[0]:
                best = (key, x, y)
        (d, a, b), x, y = best
        merges.append((a, b, d))
        clusters[x] = clusters[x] + clusters[y]
        del clusters[y]
    return merges


@pytest.mark.parametrize("linkage", ["single", "average", "complete"])
@pytest.mark.parametrize("seed", range(4))
def test_agglomeration_matches_naive(linkage, seed):
    D = random_D(8, seed)
    got = agglomerate(D, linkage)
    want = naive_agglomeration(D, linkage)
    assert [(a, b) for a, b, _ in got] == [(a, b) for a, b, _ in want]
    np.testing.assert_allclose([h for *_, h in got], [h for *_, h in want], rtol=1e-12)


@pytest.mark.parametrize("linkage", ["single", "average", "complete"])
def test_hierarchical_two_groups(linkage):
    D, labels = block_D([5, 3])
    assert hierarchical(D, linkage, 2).assignments.tolist() == labels.tolist()


def test_hierarchical_singletons():
    assert hierarchical(random_D(6, 0), "average", 6).assignments.tolist() == list(range(6))


def test_hierarchical_agrees_with_scipy_partition():
    from scipy.cluster.hierarchy import fcluster, linkage

    D = random_D(15, 9)
    for method in ("single", "average", "complete"):
        ref = fcluster(linkage(squareform(D), method), 3, "maxclust")
        assert clustering_error(hierarchical(D, method, 3).assignments, ref) == 0


# --- TSC baseline ----------------------------------------------------------------

def test_tsc_orthogonal_groups():
    e1, e2 = np.eye(4)[0], np.eye(4)[1]
    X = np.array([e1, 2 * e1, -e1, 0.5 * e1, e2, 3 * e2, -e2, 0.2 * e2])
    res = tsc_baseline(X, 2, 2)
    assert clustering_error(res.assignments, [0] * 4 + [1] * 4) == 0


def test_tsc_neighbor_rule():
    X = np.array([[1.0, 0.0], [0.9, 0.1], [0.1, 1.0]])
    res = tsc_baseline(X, 2, 1)
    assert res.graph.neighbors[0].tolist() == [1]


def test_tsc_zero_norm():
    with pytest.raises(ValueError):
        tsc_baseline(np.array([[1.0, 0], [0, 0], [0, 1.0]]), 2, 1)


# --- end-to-end Monte-Carlo checks ------------------------------------------------

def _dataset(nu2, M, sigma, p, seed, n=25):
    models = [ar2_model(0.6, 0.7 * np.pi), ar2_model(0.6, nu2 * np.pi)]
    data = make_dataset(models, n, M, CorruptionSpec(sigma, p, seed))
    return data, np.array([o.label for o in data])


@pytest.mark.slow
def test_nnpc_easy_regime():
    ces = []
    for seed in range(5):
        data, y = _dataset(0.4, 2000, 0.2, 1.0, seed)
        P = estimate_psds(data, bartlett_window(101))
        ces.append(clustering_error(nnpc(P, 2, 10).assignments, y))
    assert sum(ce == 0 for ce in ces) >= 4


@pytest.mark.slow
def test_eigengap_well_separated():
    hits = 0
    for seed in range(10):
        data, _ = _dataset(0.4, 2000, 0.2, 1.0, seed)
        D = pairwise_distances(estimate_psds(data, bartlett_window(101)))
        hits += eigengap_estimate(nnpc_adjacency(D, 10).adjacency, 10) == 2
    assert hits >= 9


@pytest.mark.slow
def test_kmit_not_worse_than_km():
    # informational trend: KMit refines KM
    km_ce, kmit_ce = [], []
    for seed in range(10):
        data, y = _dataset(0.62, 2000, 0.5, 1.0, seed)
        P = estimate_psds(data, bartlett_window(101))
        D = pairwise_distances(P)
        km_ce.append(clustering_error(km_farthest(D, 2).assignments, y))
        kmit_ce.append(clustering_error(kmit(P, 2, D=D).assignments, y))
    assert np.mean(kmit_ce) <= np.mean(km_ce)


@pytest.mark.slow
def test_tsc_inferior_to_nnpc():
    tsc_ce, nnpc_ce = [], []
    for seed in range(10):
        data, y = _dataset(0.62, 400, 0.5, 1.0, seed)
        X = np.stack([o.samples for o in data])
        P = estimate_psds(data, bartlett_window(101))
        tsc_ce.append(clustering_error(tsc_baseline(X, 2, 10, seed=seed).assignments, y))
        nnpc_ce.append(clustering_error(nnpc(P, 2, 10, seed=seed).assignments, y))
    assert np.mean(tsc_ce) > np.mean(nnpc_ce)
