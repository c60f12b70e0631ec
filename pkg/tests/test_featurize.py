"""Feature building, label splits, regions, and the standardizer."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegemo.featurize import (FeatureMatrix, REGION_CHANNELS, REGION_ORDER,
                              apply_standardizer, build_features, fit_standardizer,
                              fit_standardizer_values, labels_for_scheme,
                              median_split_labels, quadrant_labels, rating_stats)
from eegemo.ingest import (ChannelMap, DEAP_CHANNEL_NAMES, Dataset, RatingRecord,
                           SynthSpec, synth_dataset)
from eegemo.spectral import CANONICAL_BANDS, WelchParams, band_by_name, band_power, welch_psd

PARAMS = WelchParams(sample_rate_hz=128.0)


def ratings(pairs):
    return [RatingRecord(valence=v, arousal=a) for v, a in pairs]


@pytest.fixture(scope="module")
def tiny_ds():
    return synth_dataset(SynthSpec(n_trials=4, seed=21))


# ---------------------------------------------------------------- regions

def test_region_definitions_and_sizes():
    assert REGION_CHANNELS["left"] == ("Fp1", "AF3", "F7", "FC5", "T7")
    assert REGION_CHANNELS["right"] == ("Fp2", "AF4", "F8", "FC6", "T8")
    assert REGION_CHANNELS["frontal"] == ("F3", "FC1", "Fz", "F4", "FC2")
    assert REGION_CHANNELS["parietal"] == ("P3", "P7", "Pz", "P4", "P8")
    assert REGION_CHANNELS["occipital"] == ("O1", "Oz", "O2", "PO3", "PO4")
    assert REGION_CHANNELS["central"] == ("CP5", "CP1", "Cz", "C4", "C3", "CP6", "CP2")
    for name, chans in REGION_CHANNELS.items():
        assert len(chans) == (7 if name == "central" else 5)
        assert all(ch in DEAP_CHANNEL_NAMES for ch in chans)
    assert set(REGION_ORDER) == set(REGION_CHANNELS)


# ---------------------------------------------------------------- features

def test_full_grid_gives_128_columns(tiny_ds):
    fm = build_features(tiny_ds, tiny_ds.channels.names, CANONICAL_BANDS, PARAMS)
    assert fm.values.shape == (4, 128)
    assert fm.column_meta[:4] == (("Fp1", "theta"), ("Fp1", "alpha"),
                                  ("Fp1", "beta"), ("Fp1", "gamma"))
    assert fm.column_meta[4][0] == "AF3"  # channel-major ordering


def test_region_single_band_gives_5_columns(tiny_ds):
    fm = build_features(tiny_ds, REGION_CHANNELS["left"], [band_by_name("alpha")], PARAMS)
    assert fm.values.shape == (4, 5)
    assert [m[0] for m in fm.column_meta] == list(REGION_CHANNELS["left"])


def test_zero_signal_dataset_all_zero_features():
    ds = Dataset(sample_rate_hz=128.0, samples=np.zeros((2, 32, 8064)),
                 ratings=ratings([(5, 5), (5, 5)]), channels=ChannelMap())
    fm = build_features(ds, ds.channels.names[:3], CANONICAL_BANDS, PARAMS)
    assert np.all(fm.values == 0.0)


def test_features_match_direct_computation(tiny_ds):
    fm = build_features(tiny_ds, ("Fz", "Cz"), CANONICAL_BANDS, PARAMS)
    for t in (0, 3):
        for ci, ch in enumerate(("Fz", "Cz")):
            psd = welch_psd(tiny_ds.samples[t, tiny_ds.channels.index(ch)], PARAMS)
            for bi, band in enumerate(CANONICAL_BANDS):
                assert fm.values[t, ci * 4 + bi] == band_power(psd, band)


def test_build_features_deterministic(tiny_ds):
    a = build_features(tiny_ds, REGION_CHANNELS["left"], CANONICAL_BANDS, PARAMS)
    b = build_features(tiny_ds, REGION_CHANNELS["left"], CANONICAL_BANDS, PARAMS)
    assert a.column_meta == b.column_meta
    assert np.array_equal(a.values, b.values)


def test_unknown_channel_rejected(tiny_ds):
    with pytest.raises(KeyError):
        build_features(tiny_ds, ("Fp1", "XX"), CANONICAL_BANDS, PARAMS)


def test_select_columns(tiny_ds):
    fm = build_features(tiny_ds, tiny_ds.channels.names, CANONICAL_BANDS, PARAMS)
    sub = fm.select_columns(REGION_CHANNELS["left"], ["alpha"])
    direct = build_features(tiny_ds, REGION_CHANNELS["left"], [band_by_name("alpha")], PARAMS)
    assert sub.column_meta == direct.column_meta
    assert np.array_equal(sub.values, direct.values)


# ---------------------------------------------------------------- labels

def test_median_split_even_count():
    lv = median_split_labels(ratings([(1, 5), (2, 5), (3, 5), (9, 5)]), "valence")
    assert lv.split_thresholds["valence"] == 2.5
    assert lv.labels.tolist() == [0, 0, 1, 1]


def test_median_split_all_equal_ties_low():
    lv = median_split_labels(ratings([(5, 5)] * 4), "valence")
    assert lv.labels.tolist() == [0, 0, 0, 0]


def test_median_split_odd_count_brute_force():
    vals = [5, 1, 8, 8, 3]
    # order-statistics oracle: middle element of the sorted list
    median = sorted(vals)[len(vals) // 2]
    lv = median_split_labels(ratings([(v, 5) for v in vals]), "valence")
    assert lv.split_thresholds["valence"] == median == 5
    assert lv.labels.tolist() == [int(v > median) for v in vals] == [0, 0, 1, 1, 0]


def test_median_split_empty_rejected():
    with pytest.raises(ValueError):
        median_split_labels([], "valence")
    with pytest.raises(ValueError):
        median_split_labels(ratings([(5, 5)]), "dominance")


def test_quadrant_corners():
    recs = ratings([(9, 9), (1, 9), (9, 1), (1, 1)])
    assert quadrant_labels(recs).labels.tolist() == [0, 2, 1, 3]


def test_quadrant_equal_classes_from_synth():
    ds = synth_dataset(SynthSpec(n_trials=40, seed=5))
    counts = quadrant_labels(ds.ratings).class_counts()
    assert counts == {0: 10, 1: 10, 2: 10, 3: 10}


def test_quadrant_single_quadrant_input():
    lv = quadrant_labels(ratings([(7.0, 7.0)] * 5))
    # equal ratings tie to the low side on both axes
    assert lv.class_counts() == {3: 5}


def test_quadrant_consistent_with_binary_splits():
    recs = synth_dataset(SynthSpec(n_trials=24, seed=9)).ratings
    q = quadrant_labels(recs).labels
    v = median_split_labels(recs, "valence").labels
    a = median_split_labels(recs, "arousal").labels
    expect = np.where(a == 1, np.where(v == 1, 0, 2), np.where(v == 1, 1, 3))
    assert np.array_equal(q, expect)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 9, allow_nan=False), min_size=1, max_size=50))
def test_binary_labels_definition_property(vals):
    lv = median_split_labels(ratings([(v, 4.5) for v in vals]), "valence")
    median = float(np.median(vals))
    assert lv.labels.tolist() == [int(v > median) for v in vals]
    both_sides = any(v > median for v in vals) and any(v <= median for v in vals)
    assert (len(set(lv.labels.tolist())) == 2) == both_sides


def test_labels_for_scheme_dispatch(tiny_ds):
    assert labels_for_scheme(tiny_ds.ratings, "arousal-binary").scheme == "arousal-binary"
    assert labels_for_scheme(tiny_ds.ratings, "quadrant-4").scheme == "quadrant-4"
    with pytest.raises(ValueError):
        labels_for_scheme(tiny_ds.ratings, "liking-binary")


# ---------------------------------------------------------------- scaler

def test_standardizer_zero_mean_unit_std():
    gen = np.random.Generator(np.random.PCG64(1))
    x = gen.normal(5.0, 3.0, size=(40, 6))
    fm = FeatureMatrix(values=x, column_meta=tuple(("c", str(i)) for i in range(6)),
                       welch_params=PARAMS)
    s = fit_standardizer(fm)
    z = apply_standardizer(s, fm)
    assert np.all(np.abs(z.values.mean(axis=0)) < 1e-12)
    assert np.all(np.abs(z.values.std(axis=0) - 1.0) < 1e-12)
    assert not s.degenerate.any()


def test_standardizer_constant_column_flagged():
    x = np.ones((10, 2))
    x[:, 1] = np.arange(10)
    s = fit_standardizer_values(x)
    assert s.degenerate.tolist() == [True, False]
    z = s.transform(x)
    assert np.all(z[:, 0] == 0.0)  # unchanged values minus mean


def test_standardizer_roundtrip():
    gen = np.random.Generator(np.random.PCG64(2))
    x = gen.normal(0, 2, size=(25, 4))
    s = fit_standardizer_values(x)
    back = s.inverse_transform(s.transform(x))
    assert np.max(np.abs(back - x)) < 1e-12


def test_standardizer_empty_rejected():
    with pytest.raises(ValueError):
        fit_standardizer_values(np.zeros((0, 3)))


# ---------------------------------------------------------------- stats

def test_rating_stats_fields():
    recs = ratings([(9, 1), (1, 9), (9, 9), (1, 1)])
    stats = rating_stats(recs)
    assert stats["n_trials"] == 4
    assert stats["valence_median"] == 5.0
    assert stats["std_difference"] == 0.0
    assert sum(stats["quadrant_counts"].values()) == 4
