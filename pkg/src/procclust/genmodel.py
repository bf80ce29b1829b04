"""Synthetic generative models: AR(2) resonators, exact Gaussian draws, corruption."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, toeplitz
from scipy.signal import lfilter

from .spectra import Observation, PsdEstimate

log = logging.getLogger(__name__)

FINE_GRID = 2**18
DEFAULT_MAXLAG = 4096
BURNIN = 2000
MAX_EXACT_M = 2048


@dataclass(frozen=True)
class GenerativeModel:
    """Unit-power stationary Gaussian model given by its PSD on a fine grid."""

    psd: PsdEstimate
    acf: np.ndarray
    ar2_params: tuple[float, float, float] | None = None  # (a, nu, b^2)

    @property
    def psd_sup(self) -> float:
        return float(self.psd.values.max())

    @property
    def maxlag(self) -> int:
        return self.acf.size - 1


@dataclass(frozen=True)
class CorruptionSpec:
    sigma: float = 0.0
    p: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"noise level must be non-negative, got {self.sigma}")
        if not 0 < self.p <= 1:
            raise ValueError(f"sampling probability must lie in (0, 1], got {self.p}")


def _acf_from_psd(values: np.ndarray, maxlag: int) -> np.ndarray:
    F = values.size
    if maxlag >= F // 2:
        raise ValueError(f"maxlag {maxlag} too large for a {F}-point grid")
    return np.fft.ifft(values).real[: maxlag + 1]


def ar2_model(a: float, nu: float, F: int = FINE_GRID, maxlag: int = DEFAULT_MAXLAG) -> GenerativeModel:
    """Resonator PSD ``b^2 / |1 - 2a cos(nu) e^{i2pi f} + a^2 e^{i4pi f}|^2``.

    ``b^2`` is chosen numerically on the ``F``-point grid so the PSD has unit
    power; the ACF is the inverse transform of the tabulated PSD.
    """
    if not 0 < a < 1:
        raise ValueError(f"pole radius a must lie in (0, 1), got {a}")
    f = np.arange(F) / F
    z = np.exp(2j * np.pi * f)
    denom = np.abs(1 - 2 * a * np.cos(nu) * z + a**2 * z**2) ** 2
    b2 = 1.0 / np.mean(1.0 / denom)
    values = b2 / denom
    return GenerativeModel(PsdEstimate(values), _acf_from_psd(values, maxlag), ar2_params=(a, nu, b2))


def tabulated_model(values, maxlag: int = DEFAULT_MAXLAG, F: int = FINE_GRID) -> GenerativeModel:
    """Model from PSD samples on a uniform ``[0, 1)`` grid, rescaled to unit power.

    Tables coarser than ``F`` are linearly interpolated (periodically) onto
    the fine grid first.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 4 or np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("tabulated PSD needs at least 4 finite non-negative values")
    if v.size != F:
        xp = np.arange(v.size + 1) / v.size
        v = np.interp(np.arange(F) / F, xp, np.append(v, v[0]))
    v = v / v.mean()
    return GenerativeModel(PsdEstimate(v), _acf_from_psd(v, min(maxlag, F // 2 - 1)))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_ar2(model: GenerativeModel, M: int, seed=0, burnin: int = BURNIN) -> Observation:
    """Run ``x[n] = 2a cos(nu) x[n-1] - a^2 x[n-2] + b w[n]`` and keep the last ``M``."""
    if model.ar2_params is None:
        raise ValueError("model has no AR(2) parameters; use sample_gp_exact")
    a, nu, b2 = model.ar2_params
    w = _rng(seed).standard_normal(burnin + M)
    x = lfilter([np.sqrt(b2)], [1.0, -2 * a * np.cos(nu), a**2], w)
    return Observation(x[burnin:])


def corrupt(obs: Observation, spec: CorruptionSpec, seed=None) -> Observation:
    """Add white N(0, sigma^2) noise, then zero entries with an i.i.d. Bernoulli(p) mask."""
    rng = _rng(spec.seed if seed is None else seed)
    x = obs.samples
    if spec.sigma > 0:
        x = x + spec.sigma * rng.standard_normal(x.size)
    mask = obs.mask.copy()
    if spec.p < 1:
        mask &= rng.random(x.size) < spec.p
    return Observation(np.where(mask, x, 0.0), mask, label=obs.label)


def toeplitz_cov(model: GenerativeModel, sigma: float, M: int) -> np.ndarray:
    """``R[v, w] = r[|v - w|] + sigma^2 [v == w]``."""
    r = model.acf
    if r.size < M:
        log.warning("ACF known up to lag %d only; padding with zeros to lag %d", r.size - 1, M - 1)
        r = np.concatenate([r, np.zeros(M - r.size)])
    R = toeplitz(r[:M])
    R[np.diag_indices(M)] += sigma**2
    return R


def covariance_factor(model: GenerativeModel, sigma: float, M: int) -> np.ndarray:
    """Lower Cholesky factor of the noisy covariance (1e-10 jitter added)."""
    if M > MAX_EXACT_M:
        raise ValueError(f"exact sampling limited to M <= {MAX_EXACT_M}, got {M}")
    R = toeplitz_cov(model, sigma, M)
    R[np.diag_indices(M)] += 1e-10
    try:
        return cholesky(R, lower=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance matrix is not positive definite") from exc


def gaussian_draws(factor: np.ndarray, n: int, rng) -> np.ndarray:
    """``n`` rows of ``C y`` with ``y`` standard normal."""
    y = _rng(rng).standard_normal((n, factor.shape[0]))
    return y @ factor.T


def sample_gp_exact(model: GenerativeModel, sigma: float, M: int, seed=0) -> Observation:
    """Exact finite-length draw with covariance ``toeplitz_cov(model, sigma, M)``."""
    return Observation(gaussian_draws(covariance_factor(model, sigma, M), 1, seed)[0])


def observation_seeds(master_seed: int, *key: int, n: int = 2) -> list[np.random.Generator]:
    """Independent generators for the cell ``key`` under ``master_seed``.

    Derived from the key itself, so they do not depend on generation order.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return [np.random.default_rng(s) for s in ss.spawn(n)]


def make_dataset(models, n_per_model: int, M: int, spec: CorruptionSpec) -> list[Observation]:
    """``n_per_model`` corrupted observations per model, labeled ``1..L``.

    ``spec.seed`` is the master seed; observation ``(l, i)`` uses generators
    derived from ``(seed, l, i)``.
    """
    if not models:
        raise ValueError("need at least one generative model")
    out = []
    for ell, model in enumerate(models):
        factor = None if model.ar2_params is not None else covariance_factor(model, 0.0, M)
        for i in range(n_per_model):
            g_sample, g_corrupt = observation_seeds(spec.seed, ell, i)
            if factor is None:
                clean = sample_ar2(model, M, g_sample)
            else:
                clean = Observation(gaussian_draws(factor, 1, g_sample)[0])
            obs = corrupt(clean, spec, seed=g_corrupt)
            out.append(Observation(obs.samples, obs.mask, label=ell + 1))
    return out
