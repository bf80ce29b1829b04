"""Lag windows, biased sample autocorrelation and Blackman-Tukey PSD estimates.

Frequencies live on the uniform grid ``f_k = k / F`` over ``[0, 1)``. Missing
samples are stored as zeros in :class:`Observation` and flow through the plain
ACF sum; the Bernoulli-mask bias is undone by dividing the lag window by
``p`` at lag 0 and ``p**2`` elsewhere (:func:`bias_corrected_window`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DENSE_GRID = 2**16
MIN_GRID = 4096


@dataclass(frozen=True)
class Observation:
    """A length-M real sample path with its observation mask.

    Entries with ``mask == 0`` are stored as 0 in ``samples``.
    """

    samples: np.ndarray
    mask: np.ndarray | None = None
    label: int | None = None

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("an observation needs a 1-D array of at least 2 samples")
        if not np.all(np.isfinite(x)):
            raise ValueError("observation contains NaN or Inf")
        mask = np.ones(x.size, dtype=bool) if self.mask is None else np.asarray(self.mask, dtype=bool)
        if mask.shape != x.shape:
            raise ValueError("mask and samples differ in length")
        if np.any(x[~mask] != 0):
            raise ValueError("masked-out samples must be stored as 0")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "mask", mask)

    def __len__(self):
        return self.samples.size

    @property
    def observed_fraction(self) -> float:
        return float(self.mask.mean())


@dataclass(frozen=True)
class WindowFunction:
    """Even lag window stored one-sided: ``weights[m] = g[m] = g[-m]``."""

    weights: np.ndarray
    dtft_bound: float = field(default=np.nan)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("window weights must be a non-empty 1-D array")
        object.__setattr__(self, "weights", w)
        if np.isnan(self.dtft_bound):
            object.__setattr__(self, "dtft_bound", dense_dtft_sup(w))

    @property
    def half_support(self) -> int:
        return self.weights.size - 1

    def __getitem__(self, m: int) -> float:
        m = abs(int(m))
        return float(self.weights[m]) if m <= self.half_support else 0.0

    def two_sided(self) -> np.ndarray:
        """Weights for lags ``-K..K``."""
        return np.concatenate([self.weights[:0:-1], self.weights])

    def dtft(self, freqs: np.ndarray) -> np.ndarray:
        """Real DTFT ``g[0] + 2 sum_m g[m] cos(2 pi f m)`` at ``freqs``."""
        m = np.arange(1, self.weights.size)
        f = np.atleast_1d(np.asarray(freqs, dtype=float))
        return self.weights[0] + 2.0 * np.cos(2 * np.pi * np.outer(f, m)) @ self.weights[1:]


def dense_dtft_sup(weights: np.ndarray, grid: int = DENSE_GRID) -> float:
    """Max of ``|G(f)|`` for a one-sided even window over a dense grid."""
    w = np.asarray(weights, dtype=float)
    grid = max(grid, 2 * w.size)
    seq = np.zeros(grid)
    seq[: w.size] = w
    seq[grid - w.size + 1 :] = w[:0:-1]
    return float(np.max(np.abs(np.fft.rfft(seq))))


def bartlett_window(W: int) -> WindowFunction:
    """Triangular lag window ``1 - |m| / floor(W/2)`` for ``|m| <= floor(W/2)``."""
    if int(W) != W or W < 3:
        raise ValueError(f"Bartlett window length must be an integer >= 3, got {W}")
    K = int(W) // 2
    m = np.arange(K + 1)
    # Fejer kernel peaks at f = 0 with height sum(g) = K
    return WindowFunction(1.0 - m / K, dtft_bound=float(K))


def rectangular_window(half_support: int) -> WindowFunction:
    return WindowFunction(np.ones(int(half_support) + 1))


def bias_corrected_window(g: WindowFunction, p: float) -> WindowFunction:
    """Divide ``g`` by ``p`` at lag 0 and by ``p**2`` at every other lag."""
    if not 0 < p <= 1:
        raise ValueError(f"sampling probability must lie in (0, 1], got {p}")
    if p == 1:
        return g
    w = g.weights / p**2
    w[0] = g.weights[0] / p
    # G_hat(f) = G(f) / p^2 - g[0] (1 - p) / p^2 <= A / p^2
    return WindowFunction(w, dtft_bound=g.dtft_bound / p**2)


@dataclass(frozen=True)
class AcfEstimate:
    """Biased sample ACF ``r[m]`` for lags ``0..M-1``."""

    values: np.ndarray

    @property
    def length(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class PsdEstimate:
    """PSD values on the uniform grid ``k / F``, ``k = 0..F-1``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("PSD values must be a 1-D array with at least 2 entries")
        if not np.all(np.isfinite(v)):
            raise ValueError("PSD values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def grid_size(self) -> int:
        return self.values.size

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(self.grid_size) / self.grid_size

    @property
    def power(self) -> float:
        return float(self.values.mean())


def default_grid_size(M: int) -> int:
    """Smallest power of two that is at least ``max(2M - 1, 4096)``."""
    need = max(2 * int(M) - 1, MIN_GRID)
    return 1 << (need - 1).bit_length()


def _acf_values(x: np.ndarray) -> np.ndarray:
    M = x.shape[-1]
    n = 1 << (2 * M - 1).bit_length()
    X = np.fft.rfft(x, n=n, axis=-1)
    return np.fft.irfft(X.real**2 + X.imag**2, n=n, axis=-1)[..., :M] / M


def estimate_acf(obs: Observation | np.ndarray) -> AcfEstimate:
    """``r[m] = (1/M) sum_{n=0}^{M-m-1} x[n+m] x[n]`` for ``0 <= m < M``."""
    x = obs.samples if isinstance(obs, Observation) else np.asarray(obs, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a 1-D series with at least 2 samples")
    return AcfEstimate(_acf_values(x))


def _check_bt_args(M: int, K: int, F: int):
    if F < 2 * M - 1:
        raise ValueError(f"grid size F={F} is below 2M-1={2 * M - 1}")
    if K >= M:
        raise ValueError(f"window half-support {K} must be smaller than M={M}")


def _bt_from_acf(r: np.ndarray, w: np.ndarray, F: int) -> np.ndarray:
    # r: (..., K+1) leading lags, w: (K+1,)
    K = w.size - 1
    seq = np.zeros(r.shape[:-1] + (F,))
    lagged = r[..., : K + 1] * w
    seq[..., : K + 1] = lagged
    if K:
        seq[..., F - K :] = lagged[..., :0:-1]
    spec = np.fft.fft(seq, axis=-1)
    scale = np.max(np.abs(spec.real)) if spec.size else 0.0
    if np.max(np.abs(spec.imag), initial=0.0) > 1e-9 * max(scale, 1e-300):
        raise ArithmeticError("BT transform has a non-negligible imaginary part")
    return spec.real


def bt_psd(acf: AcfEstimate, window: WindowFunction, F: int | None = None) -> PsdEstimate:
    """Blackman-Tukey estimate ``sum_{|m|<M} g[m] r[m] exp(-i 2 pi k m / F)``."""
    M = acf.length
    F = default_grid_size(M) if F is None else int(F)
    _check_bt_args(M, window.half_support, F)
    return PsdEstimate(_bt_from_acf(acf.values, window.weights, F))


def normalize_power(psd: PsdEstimate) -> PsdEstimate:
    """Rescale so that the grid mean (total power) equals 1."""
    power = psd.power
    if not power > 0:
        raise ValueError(f"cannot normalize a PSD with total power {power}")
    return PsdEstimate(psd.values / power)


def estimate_psds(
    observations,
    window: WindowFunction,
    p: float = 1.0,
    F: int | None = None,
    normalize: bool = False,
    center: bool = False,
) -> np.ndarray:
    """BT estimates for a batch of equal-length observations, one row each.

    ``p < 1`` applies the missing-data window correction. Returns an
    ``(N, F)`` array, which every downstream routine accepts in place of a
    list of :class:`PsdEstimate`.
    """
    X = np.stack(
        [o.samples if isinstance(o, Observation) else np.asarray(o, dtype=float) for o in observations]
    )
    if center:
        X = X - X.mean(axis=1, keepdims=True)
    M = X.shape[1]
    F = default_grid_size(M) if F is None else int(F)
    g = bias_corrected_window(window, p)
    _check_bt_args(M, g.half_support, F)
    out = _bt_from_acf(_acf_values(X), g.weights, F)
    if normalize:
        power = out.mean(axis=1, keepdims=True)
        if np.any(power <= 0):
            raise ValueError("cannot normalize a PSD with non-positive total power")
        out = out / power
    return out
