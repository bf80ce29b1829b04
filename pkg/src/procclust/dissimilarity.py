"""L1 / L2 / Linf distances between PSDs sampled on a common uniform grid."""

from __future__ import annotations

import numpy as np

from .spectra import PsdEstimate

METRICS = ("L1", "L2", "Linf")


def _canonical_metric(metric: str) -> str:
    key = str(metric).strip().lower()
    for name in METRICS:
        if key == name.lower():
            return name
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def _as_values(psd) -> np.ndarray:
    return psd.values if isinstance(psd, PsdEstimate) else np.asarray(psd, dtype=float)


def _reduce(diff: np.ndarray, metric: str) -> np.ndarray:
    # Riemann sum on the grid k/F; the last axis is frequency
    if metric == "L1":
        return 0.5 * np.abs(diff).mean(axis=-1)
    if metric == "L2":
        return np.sqrt(np.mean(diff**2, axis=-1))
    return np.abs(diff).max(axis=-1)


def psd_distance(a, b, metric: str = "L1") -> float:
    """Distance between two PSDs on the same grid.

    ``L1`` is half the integrated absolute difference, so two unit-power
    non-negative PSDs are at distance at most 1.
    """
    metric = _canonical_metric(metric)
    a, b = _as_values(a), _as_values(b)
    if a.shape != b.shape:
        raise ValueError(f"grid mismatch: {a.shape[-1]} vs {b.shape[-1]} points")
    return float(_reduce(a - b, metric))


def pairwise_distances(psds, metric: str = "L1") -> np.ndarray:
    """Symmetric ``N x N`` matrix of :func:`psd_distance` with zero diagonal.

    ``psds`` is a list of :class:`PsdEstimate` or an ``(N, F)`` array.
    """
    metric = _canonical_metric(metric)
    P = np.stack([_as_values(s) for s in psds]) if not isinstance(psds, np.ndarray) else psds
    if P.ndim != 2 or P.shape[0] < 2:
        raise ValueError("need at least two PSDs on a common grid")
    N = P.shape[0]
    D = np.zeros((N, N))
    for i in range(N - 1):
        D[i, i + 1 :] = _reduce(P[i + 1 :] - P[i], metric)
    return D + D.T


def distances_to(psds, centers, metric: str = "L1") -> np.ndarray:
    """``(N, L)`` distances from every PSD row to every center row."""
    metric = _canonical_metric(metric)
    P, C = np.atleast_2d(psds), np.atleast_2d(centers)
    if P.shape[1] != C.shape[1]:
        raise ValueError("grid mismatch between PSDs and centers")
    return np.stack([_reduce(P - c, metric) for c in C], axis=1)
