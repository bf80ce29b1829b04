"""Clustering quality: confusion matrix, clustering error and confusion entropy."""

from __future__ import annotations

from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

BRUTE_FORCE_MAX_L = 8


def confusion_matrix(predicted, truth) -> np.ndarray:
    """Square count matrix, rows = true labels, columns = predicted clusters.

    Labels may be arbitrary integers; each side is mapped to ``0..k-1`` in
    sorted order and the matrix is padded to ``L = max(k_true, k_pred)``.
    """
    predicted = np.asarray(predicted).ravel()
    truth = np.asarray(truth).ravel()
    if predicted.size != truth.size:
        raise ValueError(f"label length mismatch: {predicted.size} vs {truth.size}")
    _, t = np.unique(truth, return_inverse=True)
    _, c = np.unique(predicted, return_inverse=True)
    L = max(t.max(initial=-1), c.max(initial=-1)) + 1
    counts = np.zeros((L, L), dtype=int)
    np.add.at(counts, (t, c), 1)
    return counts


def _best_matching_brute(counts: np.ndarray) -> int:
    L = counts.shape[0]
    rows = np.arange(L)
    return max(int(counts[rows, list(perm)].sum()) for perm in permutations(range(L)))


def _best_matching_lsa(counts: np.ndarray) -> int:
    r, c = linear_sum_assignment(counts, maximize=True)
    return int(counts[r, c].sum())


def clustering_error(predicted, truth, method: str = "auto") -> float:
    """Fraction of misclustered points under the best relabeling of clusters."""
    counts = confusion_matrix(predicted, truth)
    N = counts.sum()
    if N == 0:
        return 0.0
    if method == "auto":
        method = "brute" if counts.shape[0] <= BRUTE_FORCE_MAX_L else "assignment"
    if method == "brute":
        best = _best_matching_brute(counts)
    elif method == "assignment":
        best = _best_matching_lsa(counts)
    else:
        raise ValueError(f"unknown method {method!r}")
    return (N - best) / N


def confusion_entropy(predicted, truth) -> float:
    """Size-weighted entropy of the true-label mix inside each predicted cluster.

    Normalized by ``log L`` so a clustering independent of the truth scores
    close to 1 and a pure clustering scores 0.
    """
    counts = confusion_matrix(predicted, truth)
    N = counts.sum()
    L = counts.shape[0]
    if N == 0 or L < 2:
        return 0.0
    sizes = counts.sum(axis=0)
    S = 0.0
    for j in np.flatnonzero(sizes):
        pj = counts[:, j] / sizes[j]
        pj = pj[pj > 0]
        S += sizes[j] / N * float(-(pj * np.log(pj)).sum())
    return S / np.log(L)
