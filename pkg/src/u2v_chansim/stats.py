"""Correlation statistics of the transfer function.

The time-frequency correlation is estimated as an ensemble average over
independent stochastic realizations of the channel (same geometry, new
random draws).  The time autocorrelation and frequency correlation are its
zero-frequency-offset and zero-time-offset restrictions; the Doppler power
spectral density is the discrete Fourier transform of the autocorrelation
over the lag axis.

Spectrum magnitude convention: density values are the magnitude of the DFT
of the (optionally tapered) lag sequence; the mean over bins then equals the
zero-lag correlation for untapered transforms of positive-definite lag
sequences, which is the mass identity checked in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channel import ChannelGeometry, ChannelRealization, realize, transfer_function


@dataclass(frozen=True)
class CorrelationSurface:
    """Sampled correlation values over time/frequency offset grids."""

    anchor_t: float
    anchor_f: float
    dt_offsets: np.ndarray
    df_offsets: np.ndarray
    values: np.ndarray = field(repr=False)  # (n_dt, n_df) complex
    n_realizations: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (len(self.dt_offsets), len(self.df_offsets)):
            raise ValueError("correlation surface shape mismatch")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Spectrum:
    """One-dimensional power spectrum over a Doppler frequency grid."""

    frequencies: np.ndarray  # Hz, fftshifted so the grid brackets zero
    values: np.ndarray       # magnitudes, >= 0
    resolution: float        # Hz, 1 / (N * dt)

    @property
    def peak_frequency(self) -> float:
        return float(self.frequencies[int(np.argmax(self.values))])

    @property
    def mass(self) -> float:
        """Mean-bin spectral mass; equals the zero-lag correlation for
        rectangular-window transforms of positive-definite sequences."""
        return float(self.values.sum() / self.values.size)


Realizer = Callable[[object], ChannelRealization]


def make_realizer(geometry: ChannelGeometry) -> Realizer:
    def realizer(seed) -> ChannelRealization:
        return realize(geometry, seed)
    return realizer


def _spawn_seeds(seed, n: int) -> list:
    return list(np.random.SeedSequence(seed).spawn(n))


def tfcf(realizer: Realizer, anchor_t: float, anchor_f: float,
         dt_offsets: Sequence[float], df_offsets: Sequence[float],
         n_realizations: int = 50, seed=0) -> CorrelationSurface:
    """Monte-Carlo time-frequency correlation at one anchor.

    Averages conj(H(t, f)) * H(t + dt, f + df) over independent
    realizations; deterministic for a given seed.
    """
    if n_realizations < 1:
        raise ValueError("need at least one realization")
    dt_offsets = np.asarray(dt_offsets, dtype=float)
    df_offsets = np.asarray(df_offsets, dtype=float)
    acc = np.zeros((dt_offsets.size, df_offsets.size), dtype=complex)
    for child in _spawn_seeds(seed, n_realizations):
        realization = realizer(child)
        # anchor and offsets must land on the snapshot grid
        base = realization.transfer(anchor_t, anchor_f)
        for i, dt in enumerate(dt_offsets):
            k = realization.time_index(anchor_t + dt)
            taps = realization.taps[k]
            for j, df in enumerate(df_offsets):
                acc[i, j] += np.conj(base) * transfer_function(
                    taps, anchor_f + df, realization.rf)
    return CorrelationSurface(anchor_t, anchor_f, dt_offsets, df_offsets,
                              acc / n_realizations, n_realizations)


def tacf(realizer: Realizer, anchor_t: float, anchor_f: float,
         dt_offsets: Sequence[float], n_realizations: int = 50, seed=0,
         normalized: bool = True, estimator: str = "ensemble") -> np.ndarray:
    """Time autocorrelation: the correlation surface restricted to df = 0.

    The normalized variant divides by the zero-offset value (the offset grid
    must then start at 0).  estimator "time" averages the lag products over
    the snapshot axis of one realization instead of over the ensemble.
    """
    dt_offsets = np.asarray(dt_offsets, dtype=float)
    if estimator == "ensemble":
        surface = tfcf(realizer, anchor_t, anchor_f, dt_offsets, [0.0],
                       n_realizations, seed)
        values = surface.values[:, 0]
    elif estimator == "time":
        values = _time_average_tacf(realizer(np.random.SeedSequence(seed)),
                                    anchor_f, dt_offsets)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    if normalized:
        values = _normalize_at_zero(values, dt_offsets)
    return values


def fcf(realizer: Realizer, anchor_t: float, anchor_f: float,
        df_offsets: Sequence[float], n_realizations: int = 50, seed=0,
        normalized: bool = True, estimator: str = "ensemble") -> np.ndarray:
    """Frequency correlation: the correlation surface restricted to dt = 0."""
    df_offsets = np.asarray(df_offsets, dtype=float)
    if estimator == "ensemble":
        surface = tfcf(realizer, anchor_t, anchor_f, [0.0], df_offsets,
                       n_realizations, seed)
        values = surface.values[0, :]
    elif estimator == "time":
        realization = realizer(np.random.SeedSequence(seed))
        products = []
        for t in realization.times:
            taps = realization.taps[realization.time_index(float(t))]
            if not taps:
                continue
            base = transfer_function(taps, anchor_f, realization.rf)
            products.append([np.conj(base) * transfer_function(
                taps, anchor_f + df, realization.rf) for df in df_offsets])
        values = np.mean(np.asarray(products, dtype=complex), axis=0)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    if normalized:
        values = _normalize_at_zero(values, df_offsets)
    return values


def _normalize_at_zero(values: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    if offsets[0] != 0.0:
        raise ValueError("normalized correlations need a zero first offset")
    denom = values[0].real
    if denom == 0.0:
        raise ValueError("zero-offset correlation vanishes; cannot normalize")
    # componentwise scaling keeps the zero-offset value exactly one
    # (complex division would round x / x.real away from 1)
    return values.real / denom + 1j * (values.imag / denom)


def _time_average_tacf(realization: ChannelRealization, anchor_f: float,
                       dt_offsets: np.ndarray) -> np.ndarray:
    times = realization.times
    h = np.array([transfer_function(realization.taps[k], anchor_f, realization.rf)
                  if realization.taps[k] else np.nan
                  for k in range(times.size)])
    dt = float(times[1] - times[0]) if times.size > 1 else 1.0
    lags = np.rint(dt_offsets / dt).astype(int)
    if not np.allclose(lags * dt, dt_offsets, atol=1e-9):
        raise ValueError("dt offsets must be multiples of the snapshot interval")
    out = np.empty(lags.size, dtype=complex)
    for i, lag in enumerate(lags):
        prod = np.conj(h[: times.size - lag]) * h[lag:] if lag > 0 else np.conj(h) * h
        prod = prod[np.isfinite(prod)]
        if prod.size == 0:
            raise ValueError("no overlapping in-window samples for this lag")
        out[i] = prod.mean()
    return out


def direct_dft(x: np.ndarray) -> np.ndarray:
    """O(N^2) direct DFT used as the independent oracle for the FFT path."""
    x = np.asarray(x, dtype=complex)
    n = x.size
    k = np.arange(n)
    kernel = np.exp(-2j * math.pi * np.outer(k, k) / n)
    return kernel @ x


def _taper(n: int, window: str) -> np.ndarray:
    if window == "rectangular":
        return np.ones(n)
    if window == "hann":
        return np.hanning(n)
    raise ValueError(f"unknown window {window!r}")


def _spectrum_from_transform(transform: np.ndarray, dt: float) -> Spectrum:
    n = transform.size
    freqs = np.fft.fftshift(np.fft.fftfreq(n, d=dt))
    values = np.abs(np.fft.fftshift(transform))
    return Spectrum(freqs, values, resolution=1.0 / (n * dt))


def dpsd(tacf_values: Sequence[complex], dt: float,
         window: str = "rectangular") -> Spectrum:
    """Doppler spectrum: magnitude of the DFT of the lag sequence."""
    x = np.asarray(tacf_values, dtype=complex)
    if x.size < 2:
        raise ValueError("dpsd needs at least two lag samples")
    if not dt > 0:
        raise ValueError("dt must be positive")
    return _spectrum_from_transform(np.fft.fft(x * _taper(x.size, window)), dt)


def dpsd_oracle(tacf_values: Sequence[complex], dt: float,
                window: str = "rectangular") -> Spectrum:
    """Same pipeline as dpsd but with the direct O(N^2) transform."""
    x = np.asarray(tacf_values, dtype=complex)
    if x.size == 1:
        return Spectrum(np.zeros(1), np.abs(x), resolution=1.0 / dt)
    return _spectrum_from_transform(direct_dft(x * _taper(x.size, window)), dt)
