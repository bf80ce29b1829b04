"""Numerical evaluation of the clustering guarantees and their Monte-Carlo checks.

Covers the model distance, the ACF moment of a lag window, the sufficient
clustering condition, strict separation of a realized distance matrix, the
inner-product lower bound for TSC-style neighbor selection and the tail
bound for Bernoulli quadratic forms.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from .dissimilarity import psd_distance
from .genmodel import GenerativeModel, covariance_factor, gaussian_draws, toeplitz_cov
from .spectra import WindowFunction

TAIL_TOL = 1e-6
MC_CHUNK = 10_000


@dataclass(frozen=True)
class ConditionReport:
    min_model_distance: float
    rhs: float
    mu_max: float
    A: float
    B: float

    @property
    def satisfied(self) -> bool:
        return self.min_model_distance > self.rhs

    @property
    def margin(self) -> float:
        return self.min_model_distance - self.rhs

    def as_row(self) -> dict:
        row = asdict(self)
        row.update(satisfied=self.satisfied, margin=self.margin)
        return row


def model_distance(m1: GenerativeModel, m2: GenerativeModel) -> float:
    """Half the integrated absolute difference of the two model PSDs."""
    return psd_distance(m1.psd, m2.psd, "L1")


def acf_tail_estimate(r: np.ndarray) -> float:
    """Upper estimate of ``sum_{m > maxlag} |r[m]|`` from a geometric envelope fit."""
    r = np.abs(np.asarray(r, dtype=float))
    block = max(16, r.size // 8)
    if r.size < 2 * block + 1:
        raise ValueError("ACF too short to fit a tail")
    e1 = r[-2 * block : -block].max()
    e2 = r[-block:].max()
    if e2 <= 1e-13 * r[0]:
        # at the floating-point floor of the inverse transform
        return 0.0
    if e1 <= 0 or e2 >= e1:
        return np.inf
    rho = (e2 / e1) ** (1.0 / block)
    return float(e2 * rho / (1.0 - rho))


def acf_moment(model: GenerativeModel, g: WindowFunction, M: int) -> float:
    """``sum_m |h[m]| |r[m]|`` with ``h[m] = 1 - g[m](1 - |m|/M)`` inside ``|m| < M``, 1 outside."""
    r = model.acf
    tail = acf_tail_estimate(r)
    if not tail < TAIL_TOL:
        raise ValueError(f"ACF truncated at lag {model.maxlag} leaves an estimated tail of {tail:.3g}")
    m = np.arange(r.size)
    gm = np.array([g[k] for k in range(min(g.half_support, r.size - 1) + 1)])
    gm = np.concatenate([gm, np.zeros(r.size - gm.size)])
    h = np.where(m < M, 1.0 - gm * (1.0 - m / M), 1.0)
    terms = np.abs(h) * np.abs(r)
    return float(terms[0] + 2.0 * terms[1:].sum())


def condition_rhs(A: float, B: float, sigma: float, p: float, M: float, mu_max: float) -> float:
    lead = 8 * np.sqrt(2) * A * (B + sigma**2 + np.sqrt(2) * (1 + p) * (1 + sigma**2)) / p**2
    return float(lead * np.sqrt(np.log(M) / M) + 2 * mu_max)


def clustering_condition(models, g: WindowFunction, M: float, sigma: float, p: float) -> ConditionReport:
    """Evaluate the sufficient condition for NFC (NNPC) and exact recovery (KM)."""
    models = list(models)
    if len(models) < 2:
        raise ValueError("need at least two generative models")
    if not 0 < p <= 1:
        raise ValueError(f"sampling probability must lie in (0, 1], got {p}")
    dmin = min(model_distance(a, b) for a, b in combinations(models, 2))
    B = max(m.psd_sup for m in models)
    # the moment uses an integer lag cutoff; huge symbolic M behaves as M = inf
    M_lag = int(min(M, 2**62))
    mu_max = max(acf_moment(m, g, M_lag) for m in models)
    return ConditionReport(dmin, condition_rhs(g.dtft_bound, B, sigma, p, M, mu_max), mu_max, g.dtft_bound, B)


def check_strict_separation(D, labels) -> bool:
    """True iff every cross-label distance exceeds every within-label distance."""
    D = np.asarray(D, dtype=float)
    labels = np.asarray(labels)
    N = D.shape[0]
    same = labels[:, None] == labels[None, :]
    off = ~np.eye(N, dtype=bool)
    within = D[same & off]
    if within.size == 0:
        raise ValueError("no label class has two or more members")
    cross = D[~same]
    if cross.size == 0:
        return True
    return bool(cross.min() > within.max())


def prop1_bound(Rk, Rl) -> float:
    """``arctan(sqrt(tr(Rk Rl)) / (5 sqrt(3) sqrt(tr(Rl Rl)))) / (5 pi)``."""
    Rk, Rl = np.asarray(Rk, dtype=float), np.asarray(Rl, dtype=float)
    if Rk.shape != Rl.shape:
        raise ValueError("covariance matrices differ in shape")
    # tr(X Y) = sum(X * Y^T)
    tll = float(np.sum(Rl * Rl.T))
    if tll <= 0:
        raise ValueError("tr(Rl Rl) must be positive")
    tkl = max(float(np.sum(Rk * Rl.T)), 0.0)
    return float(np.arctan(np.sqrt(tkl) / (5 * np.sqrt(3) * np.sqrt(tll))) / (5 * np.pi))


def inner_product_dominance_mc(
    mk: GenerativeModel, ml: GenerativeModel, sigma: float, M: int, trials: int, seed=0
) -> float:
    """Empirical ``P[|<x_j^k, x_i^l>| >= |<x_v^l, x_i^l>|]`` over independent exact draws."""
    Ck = covariance_factor(mk, sigma, M)
    Cl = covariance_factor(ml, sigma, M)
    rng = np.random.default_rng(seed)
    hits = 0
    for start in range(0, trials, MC_CHUNK):
        n = min(MC_CHUNK, trials - start)
        xj = gaussian_draws(Ck, n, rng)
        xi = gaussian_draws(Cl, n, rng)
        xv = gaussian_draws(Cl, n, rng)
        hits += int(np.count_nonzero(np.abs(np.sum(xj * xi, 1)) >= np.abs(np.sum(xv * xi, 1))))
    return hits / trials


def prop1_model_bound(mk: GenerativeModel, ml: GenerativeModel, sigma: float, M: int) -> float:
    return prop1_bound(toeplitz_cov(mk, sigma, M), toeplitz_cov(ml, sigma, M))


def spectral_norm(H, iters: int = 500, tol: float = 1e-10, seed: int = 0) -> float:
    """Largest singular value of a symmetric matrix by power iteration on ``H^2``."""
    H = np.asarray(H, dtype=float)
    v = np.random.default_rng(seed).standard_normal(H.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = H @ (H @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        if abs(nw - est) <= tol * nw:
            est = nw
            break
        est = nw
    return float(np.sqrt(est))


def quadform_tail_bound(H, p: float, t: float) -> float:
    """``4 exp(-t^2 / (32 (1+p)^2 M ||H||^2))``; values above 1 are returned as is."""
    H = np.asarray(H, dtype=float)
    if t <= 0:
        raise ValueError(f"threshold t must be positive, got {t}")
    if not 0 < p <= 1:
        raise ValueError(f"sampling probability must lie in (0, 1], got {p}")
    norm = spectral_norm(H)
    if norm == 0:
        raise ValueError("H must be nonzero")
    M = H.shape[0]
    return float(4 * np.exp(-(t**2) / (32 * (1 + p) ** 2 * M * norm**2)))


def quadform_mean(H, p: float) -> float:
    """Exact ``E[xi^T H xi]`` for i.i.d. Bernoulli(p) entries."""
    H = np.asarray(H, dtype=float)
    diag = np.trace(H)
    return float(p * diag + p**2 * (H.sum() - diag))


def quadform_mc_tail(H, p: float, t: float, trials: int, seed=0) -> float:
    """Fraction of Bernoulli(p) masks with ``|xi^T H xi - E| > t``."""
    if t <= 0:
        raise ValueError(f"threshold t must be positive, got {t}")
    if trials < 1:
        raise ValueError("need at least one trial")
    H = np.asarray(H, dtype=float)
    mean = quadform_mean(H, p)
    rng = np.random.default_rng(seed)
    M = H.shape[0]
    exceed = 0
    for start in range(0, trials, MC_CHUNK):
        n = min(MC_CHUNK, trials - start)
        xi = (rng.random((n, M)) < p).astype(float)
        vals = np.einsum("ni,ij,nj->n", xi, H, xi, optimize=True)
        exceed += int(np.count_nonzero(np.abs(vals - mean) > t))
    return exceed / trials


def quadform_exact_tail(H, p: float, t: float) -> float:
    """Exact tail probability by enumerating all ``2^M`` masks (small ``M`` only)."""
    H = np.asarray(H, dtype=float)
    M = H.shape[0]
    if M > 16:
        raise ValueError("exhaustive enumeration limited to M <= 16")
    mean = quadform_mean(H, p)
    total = 0.0
    for bits in range(2**M):
        xi = np.array([(bits >> k) & 1 for k in range(M)], dtype=float)
        if abs(xi @ H @ xi - mean) > t:
            k = xi.sum()
            total += p**k * (1 - p) ** (M - k)
    return total
