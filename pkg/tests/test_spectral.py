"""Welch/periodogram estimators against definition-level oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegemo import rng
from eegemo.spectral import (BandDef, CANONICAL_BANDS, WelchParams, band_by_name,
                             band_power, hann_window, periodogram, welch_psd)

from oracles import hann_sum_sq, naive_periodogram

FS = 128.0


def sine(freq, amp, n=8064, fs=FS):
    return amp * np.sin(2.0 * np.pi * freq * np.arange(n) / fs)


# ---------------------------------------------------------------- window

def test_hann_quarter_period_values():
    assert np.allclose(hann_window(4), [0.0, 0.5, 1.0, 0.5], atol=1e-15, rtol=0)
    assert np.allclose(hann_window(2), [0.0, 1.0], atol=1e-15, rtol=0)


def test_hann_energy_matches_loop_oracle():
    w = hann_window(256)
    assert abs(np.sum(w * w) - hann_sum_sq(256)) < 1e-12


def test_hann_rejects_short():
    with pytest.raises(ValueError):
        hann_window(1)


# ---------------------------------------------------------------- periodogram

def test_periodogram_constant_signal_all_dc():
    n, c = 64, 3.0
    psd = periodogram(np.full(n, c), np.ones(n), FS)
    assert abs(psd.power[0] - n * c * c / FS) < 1e-9
    assert np.all(np.abs(psd.power[1:]) < 1e-12)


def test_periodogram_zero_signal():
    psd = periodogram(np.zeros(128), hann_window(128), FS)
    assert np.all(psd.power == 0.0)


def test_periodogram_matches_naive_dft():
    for seed in range(5):
        x = rng.gaussians(seed, 0, 256)
        w = hann_window(256)
        ours = periodogram(x, w, FS).power
        ref = naive_periodogram(x, w, FS)
        rel = np.abs(ours - ref) / np.maximum(np.abs(ref), 1e-30)
        mask = np.abs(ref) > 1e-20  # relative error on non-degenerate bins
        assert rel[mask].max() < 1e-9


def test_periodogram_length_mismatch():
    with pytest.raises(ValueError):
        periodogram(np.zeros(64), np.ones(32), FS)


def test_periodogram_grid():
    psd = periodogram(np.zeros(256), hann_window(256), FS)
    assert len(psd.freqs) == 129
    assert psd.freqs[1] - psd.freqs[0] == pytest.approx(0.5)
    assert psd.freqs[-1] == pytest.approx(64.0)


# ---------------------------------------------------------------- welch

def test_welch_single_segment_degenerates_to_periodogram():
    x = rng.gaussians(7, 0, 256)
    params = WelchParams(segment_len=256, overlap=0, sample_rate_hz=FS)
    ours = welch_psd(x, params)
    ref = periodogram(x, hann_window(256), FS)
    assert ours.n_segments_averaged == 1
    assert np.array_equal(ours.power, ref.power)


def test_welch_segment_count_8064():
    params = WelchParams(segment_len=256, overlap=128, sample_rate_hz=FS)
    psd = welch_psd(np.zeros(8064), params)
    assert psd.n_segments_averaged == (8064 - 256) // 128 + 1 == 62


def test_welch_trailing_samples_dropped():
    params = WelchParams(segment_len=256, overlap=0, sample_rate_hz=FS)
    assert welch_psd(np.zeros(256 * 3 + 255), params).n_segments_averaged == 3


def test_welch_sine_total_power():
    params = WelchParams(sample_rate_hz=FS)
    psd = welch_psd(sine(10.0, np.sqrt(2.0)), params)
    assert psd.total_power() == pytest.approx(1.0, rel=0.02)


def test_welch_rejects_short_signal():
    with pytest.raises(ValueError, match="shorter"):
        welch_psd(np.zeros(255), WelchParams(sample_rate_hz=FS))


def test_welch_parseval_white_noise():
    noise = rng.gaussians(42, 0, 8064)  # sigma^2 = 1
    psd = welch_psd(noise, WelchParams(sample_rate_hz=FS))
    assert 0.95 <= psd.total_power() <= 1.05


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_psd_nonnegative(seed):
    x = rng.gaussians(seed, 0, 640)
    psd = welch_psd(x, WelchParams(sample_rate_hz=FS))
    assert np.all(psd.power >= 0.0)
    assert np.all(np.isfinite(psd.power))


# ---------------------------------------------------------------- bands

def test_band_power_zero_psd():
    psd = welch_psd(np.zeros(8064), WelchParams(sample_rate_hz=FS))
    assert band_power(psd, band_by_name("alpha")) == 0.0


def test_band_definitions():
    edges = [(b.name, b.low_hz, b.high_hz) for b in CANONICAL_BANDS]
    assert edges == [("theta", 4.0, 8.0), ("alpha", 8.0, 12.0),
                     ("beta", 12.0, 30.0), ("gamma", 30.0, 64.0)]


def test_sine_concentrates_in_alpha():
    psd = welch_psd(sine(10.0, np.sqrt(2.0)), WelchParams(sample_rate_hz=FS))
    total = psd.total_power()
    alpha = band_power(psd, band_by_name("alpha"))
    rest = sum(band_power(psd, band_by_name(b)) for b in ("theta", "beta", "gamma"))
    assert alpha / total >= 0.95
    assert rest / total <= 0.05


def test_half_open_edges_left_inclusive():
    # an exact 8.0 Hz tone lands in alpha, not theta
    psd = welch_psd(sine(8.0, 1.0), WelchParams(sample_rate_hz=FS))
    assert band_power(psd, band_by_name("alpha")) > band_power(psd, band_by_name("theta"))
    # and the 8.0 Hz bin itself is counted exactly once
    bin8 = int(8.0 / psd.params.df)
    assert psd.freqs[bin8] == 8.0


def test_band_partition_sums_to_total():
    x = rng.gaussians(3, 0, 8064) + sine(10.0, 1.0)
    psd = welch_psd(x, WelchParams(sample_rate_hz=FS))
    residual_low = BandDef("low", 0.5, 4.0)  # bands tiling (0, fs/2)
    parts = [band_power(psd, residual_low)]
    parts += [band_power(psd, b) for b in CANONICAL_BANDS]
    dc_and_nyquist = (psd.power[0] + psd.power[-1]) * psd.params.df
    total = psd.total_power()
    assert abs(sum(parts) + dc_and_nyquist - total) <= 1e-12 * max(total, 1.0)


def test_band_outside_range_rejected():
    psd = welch_psd(np.zeros(8064), WelchParams(sample_rate_hz=FS))
    with pytest.raises(ValueError, match="Nyquist"):
        band_power(psd, BandDef("high", 60.0, 80.0))


def test_welch_params_validation():
    with pytest.raises(ValueError):
        WelchParams(segment_len=255)
    with pytest.raises(ValueError):
        WelchParams(segment_len=256, overlap=256)
    with pytest.raises(ValueError):
        WelchParams(window="hamming")
