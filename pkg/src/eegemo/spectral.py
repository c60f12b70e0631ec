"""Welch power-spectral-density estimation and band-power integration.

The estimator averages one-sided modified periodograms over overlapping
segments. With a segment length of 256 at 128 Hz the frequency grid has
df = 0.5 Hz, which resolves the band edges used downstream: theta [4, 8),
alpha [8, 12), beta [12, 30), gamma [30, 64). Band edges are half-open
and left-inclusive, so an 8.0 Hz bin belongs to alpha, not theta, and a
set of bands tiling the grid partitions the total power exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_SEGMENT_LEN = 256
DEFAULT_OVERLAP = 128

CANONICAL_BANDS = None  # assigned below, after BandDef is defined


@dataclass(frozen=True)
class WelchParams:
    """Estimator parameters. Only the periodic Hann window is supported."""

    segment_len: int = DEFAULT_SEGMENT_LEN
    overlap: int = DEFAULT_OVERLAP
    window: str = "hann-periodic"
    sample_rate_hz: float = 128.0

    def __post_init__(self):
        if self.segment_len < 2 or self.segment_len % 2 != 0:
            raise ValueError(f"segment_len must be even and >= 2, got {self.segment_len}")
        if not 0 <= self.overlap < self.segment_len:
            raise ValueError(f"overlap must be in [0, segment_len), got {self.overlap}")
        if self.window != "hann-periodic":
            raise ValueError(f"unsupported window {self.window!r}")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")

    @property
    def step(self) -> int:
        return self.segment_len - self.overlap

    @property
    def df(self) -> float:
        return self.sample_rate_hz / self.segment_len


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided PSD (signal-units^2/Hz) on the grid 0..fs/2, step df."""

    freqs: np.ndarray
    power: np.ndarray
    params: WelchParams
    n_segments_averaged: int

    def __post_init__(self):
        object.__setattr__(self, "freqs", np.asarray(self.freqs, dtype=np.float64))
        object.__setattr__(self, "power", np.asarray(self.power, dtype=np.float64))
        if self.freqs.shape != self.power.shape:
            raise ValueError("freqs and power must have matching shapes")
        if len(self.freqs) != self.params.segment_len // 2 + 1:
            raise ValueError("frequency grid does not match segment_len/2 + 1")

    def total_power(self) -> float:
        """Rectangular integral over the whole grid (signal-units^2)."""
        return float(np.sum(self.power) * self.params.df)


@dataclass(frozen=True)
class BandDef:
    """Half-open frequency band [low_hz, high_hz)."""

    name: str
    low_hz: float
    high_hz: float

    def __post_init__(self):
        if not 0 < self.low_hz < self.high_hz:
            raise ValueError(f"band {self.name}: need 0 < low < high, "
                             f"got [{self.low_hz}, {self.high_hz})")


CANONICAL_BANDS = (
    BandDef("theta", 4.0, 8.0),
    BandDef("alpha", 8.0, 12.0),
    BandDef("beta", 12.0, 30.0),
    BandDef("gamma", 30.0, 64.0),
)


def band_by_name(name: str) -> BandDef:
    for band in CANONICAL_BANDS:
        if band.name == name:
            return band
    raise KeyError(f"unknown band {name!r}")


def hann_window(n: int) -> np.ndarray:
    """Periodic (DFT-even) Hann weights w[k] = 0.5*(1 - cos(2*pi*k/n))."""
    if n < 2:
        raise ValueError(f"window length must be >= 2, got {n}")
    k = np.arange(n)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * k / n))


def _periodogram_batch(segments: np.ndarray, window: np.ndarray, fs: float) -> np.ndarray:
    """Modified one-sided periodograms for each row of `segments`.

    P[k] = |DFT(w*x)[k]|^2 / (fs * sum(w^2)), with interior bins doubled
    (DC and Nyquist are unpaired and stay single).
    """
    spectrum = np.fft.rfft(segments * window, axis=-1)
    scale = 1.0 / (fs * np.sum(window * window))
    power = (spectrum.real**2 + spectrum.imag**2) * scale
    power[..., 1:-1] *= 2.0
    return power


def periodogram(segment, window, fs: float) -> PsdEstimate:
    """One-sided modified periodogram of a single segment.

    `window` may be any weight vector of the segment's length (the
    rectangular all-ones vector turns this into the plain periodogram).
    """
    segment = np.asarray(segment, dtype=np.float64)
    window = np.asarray(window, dtype=np.float64)
    if segment.ndim != 1 or segment.shape != window.shape:
        raise ValueError(f"segment {segment.shape} and window {window.shape} lengths differ")
    n = len(segment)
    if n < 2 or n % 2 != 0:
        raise ValueError(f"segment length must be even and >= 2, got {n}")
    params = WelchParams(segment_len=n, overlap=0, sample_rate_hz=fs)
    power = _periodogram_batch(segment[None, :], window, fs)[0]
    freqs = np.arange(n // 2 + 1) * (fs / n)
    return PsdEstimate(freqs=freqs, power=power, params=params, n_segments_averaged=1)


def welch_psd(signal, params: WelchParams) -> PsdEstimate:
    """Mean of modified periodograms over overlapping Hann-windowed segments.

    Segments start at multiples of (segment_len - overlap); trailing
    samples that do not fill a segment are dropped.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim != 1:
        raise ValueError("signal must be 1-D")
    n = len(signal)
    if n < params.segment_len:
        raise ValueError(f"signal of {n} samples shorter than one "
                         f"{params.segment_len}-sample segment")
    n_seg = (n - params.segment_len) // params.step + 1
    starts = np.arange(n_seg) * params.step
    segments = np.stack([signal[s:s + params.segment_len] for s in starts])
    window = hann_window(params.segment_len)
    power = _periodogram_batch(segments, window, params.sample_rate_hz)
    mean_power = power.sum(axis=0) / n_seg
    freqs = np.arange(params.segment_len // 2 + 1) * params.df
    return PsdEstimate(freqs=freqs, power=mean_power,
                       params=params, n_segments_averaged=n_seg)


def band_power(psd: PsdEstimate, band: BandDef) -> float:
    """Rectangular integral of the PSD over bins with low <= f < high."""
    nyquist = psd.params.sample_rate_hz / 2.0
    if band.high_hz > nyquist:
        raise ValueError(f"band {band.name} [{band.low_hz}, {band.high_hz}) "
                         f"exceeds the Nyquist frequency {nyquist}")
    mask = (psd.freqs >= band.low_hz) & (psd.freqs < band.high_hz)
    return float(np.sum(psd.power[mask]) * psd.params.df)
