"""Feature matrices and labels: per-channel band powers, median-split classes.

Labels follow the global-median convention: the median is computed over
all provided trials (even counts average the two middle order
statistics), a rating strictly above the median is "high", and ties go
to the low class. Quadrant classes combine the two binary splits as
0=HAHV, 1=LAHV, 2=HALV, 3=LALV.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ingest import Dataset, RatingRecord
from .spectral import BandDef, WelchParams, band_power, welch_psd

# region -> channels, in the column order used by the published result tables
REGION_CHANNELS = {
    "left": ("Fp1", "AF3", "F7", "FC5", "T7"),
    "frontal": ("F3", "FC1", "Fz", "F4", "FC2"),
    "right": ("Fp2", "AF4", "F8", "FC6", "T8"),
    "central": ("CP5", "CP1", "Cz", "C4", "C3", "CP6", "CP2"),
    "parietal": ("P3", "P7", "Pz", "P4", "P8"),
    "occipital": ("O1", "Oz", "O2", "PO3", "PO4"),
}

REGION_ORDER = tuple(REGION_CHANNELS)

LABEL_SCHEMES = ("arousal-binary", "valence-binary", "quadrant-4")
QUADRANT_NAMES = ("HAHV", "LAHV", "HALV", "LALV")


class RegionMap:
    """Named channel groups; defaults to the six scalp regions above."""

    def __init__(self, regions: dict[str, tuple[str, ...]] | None = None):
        self._regions = {k: tuple(v) for k, v in (regions or REGION_CHANNELS).items()}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._regions)

    def channels(self, name: str) -> tuple[str, ...]:
        try:
            return self._regions[name]
        except KeyError:
            raise KeyError(f"unknown region {name!r}") from None


@dataclass(frozen=True)
class FeatureMatrix:
    """Trials-by-features matrix with (channel, band) column provenance."""

    values: np.ndarray
    column_meta: tuple[tuple[str, str], ...]  # (channel, band) per column
    welch_params: WelchParams

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError("values must be 2-D (trials x features)")
        if vals.shape[1] != len(self.column_meta):
            raise ValueError(f"{vals.shape[1]} columns but {len(self.column_meta)} column_meta")
        if vals.size and not np.all(np.isfinite(vals)):
            raise ValueError("feature values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "column_meta", tuple(tuple(m) for m in self.column_meta))

    @property
    def n_trials(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def column_names(self) -> list[str]:
        return [f"{ch}_{band}" for ch, band in self.column_meta]

    def select_columns(self, channels, bands) -> "FeatureMatrix":
        """Sub-matrix for the given channels x band names, channel-major."""
        wanted = [(ch, b) for ch in channels for b in bands]
        index = {meta: i for i, meta in enumerate(self.column_meta)}
        try:
            cols = [index[m] for m in wanted]
        except KeyError as exc:
            raise KeyError(f"column {exc.args[0]} not present") from None
        return FeatureMatrix(values=self.values[:, cols].copy(),
                             column_meta=tuple(wanted),
                             welch_params=self.welch_params)


@dataclass(frozen=True)
class LabelVector:
    """Integer class labels plus the split rule that produced them."""

    labels: np.ndarray
    scheme: str
    split_thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if self.scheme not in LABEL_SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        hi = 3 if self.scheme == "quadrant-4" else 1
        if labels.size and (labels.min() < 0 or labels.max() > hi):
            raise ValueError(f"labels out of range for scheme {self.scheme}")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def class_counts(self) -> dict[int, int]:
        vals, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}


def build_features(ds: Dataset, channels, bands, params: WelchParams) -> FeatureMatrix:
    """Band powers per (trial, channel, band), channel-major columns.

    Row t, column (c, b) is band_power(welch_psd(ds[t, c]), b).
    """
    channels = list(channels)
    bands = list(bands)
    ch_idx = [ds.channels.index(c) for c in channels]  # raises on unknown name
    if not bands:
        raise ValueError("need at least one band")
    values = np.empty((ds.n_trials, len(channels) * len(bands)))
    for t in range(ds.n_trials):
        col = 0
        for ci in ch_idx:
            psd = welch_psd(ds.samples[t, ci], params)
            for band in bands:
                values[t, col] = band_power(psd, band)
                col += 1
    meta = tuple((ch, band.name) for ch in channels for band in bands)
    return FeatureMatrix(values=values, column_meta=meta, welch_params=params)


def _ratings_axis(ratings, dimension: str) -> np.ndarray:
    if dimension not in ("valence", "arousal"):
        raise ValueError(f"dimension must be 'valence' or 'arousal', got {dimension!r}")
    return np.array([getattr(r, dimension) for r in ratings], dtype=np.float64)


def median_split_labels(ratings, dimension: str) -> LabelVector:
    """1 where the rating exceeds the global median, else 0 (ties -> low)."""
    scores = _ratings_axis(ratings, dimension)
    if scores.size == 0:
        raise ValueError("cannot split an empty rating list")
    median = float(np.median(scores))
    return LabelVector(labels=(scores > median).astype(np.int64),
                       scheme=f"{dimension}-binary",
                       split_thresholds={dimension: median})


def quadrant_labels(ratings) -> LabelVector:
    """Four-class labels from the two median splits (0=HAHV .. 3=LALV)."""
    v = median_split_labels(ratings, "valence")
    a = median_split_labels(ratings, "arousal")
    # (arousal_high, valence_high): (1,1)->0 (0,1)->1 (1,0)->2 (0,0)->3
    quadrant = np.where(a.labels == 1,
                        np.where(v.labels == 1, 0, 2),
                        np.where(v.labels == 1, 1, 3))
    thresholds = {**v.split_thresholds, **a.split_thresholds}
    return LabelVector(labels=quadrant, scheme="quadrant-4", split_thresholds=thresholds)


def labels_for_scheme(ratings, scheme: str) -> LabelVector:
    if scheme == "arousal-binary":
        return median_split_labels(ratings, "arousal")
    if scheme == "valence-binary":
        return median_split_labels(ratings, "valence")
    if scheme == "quadrant-4":
        return quadrant_labels(ratings)
    raise ValueError(f"unknown label scheme {scheme!r}")


@dataclass(frozen=True)
class Standardizer:
    """Per-column z-scoring statistics learned from a training split.

    Columns whose spread is indistinguishable from rounding noise are
    flagged degenerate and given std 1 so they pass through unscaled.
    """

    means: np.ndarray
    stds: np.ndarray
    degenerate: np.ndarray

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.means) / self.stds

    def inverse_transform(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values, dtype=np.float64) * self.stds + self.means


def fit_standardizer_values(train_values: np.ndarray) -> Standardizer:
    train_values = np.asarray(train_values, dtype=np.float64)
    if train_values.ndim != 2 or train_values.shape[0] == 0:
        raise ValueError("need a nonempty 2-D training matrix")
    means = train_values.mean(axis=0)
    stds = train_values.std(axis=0)
    degenerate = stds < 1e-12 * (1.0 + np.abs(means))
    stds = np.where(degenerate, 1.0, stds)
    return Standardizer(means=means, stds=stds, degenerate=degenerate)


def fit_standardizer(train: FeatureMatrix) -> Standardizer:
    return fit_standardizer_values(train.values)


def apply_standardizer(s: Standardizer, m: FeatureMatrix) -> FeatureMatrix:
    return FeatureMatrix(values=s.transform(m.values),
                         column_meta=m.column_meta,
                         welch_params=m.welch_params)


def rating_stats(ratings) -> dict:
    """Descriptive stats for the two rating axes, for the stats printout."""
    if not ratings:
        raise ValueError("no ratings")
    v = _ratings_axis(ratings, "valence")
    a = _ratings_axis(ratings, "arousal")
    quad = quadrant_labels(ratings)
    counts = {QUADRANT_NAMES[k]: v2 for k, v2 in sorted(quad.class_counts().items())}
    return {
        "n_trials": len(ratings),
        "valence_median": float(np.median(v)),
        "arousal_median": float(np.median(a)),
        "valence_std": float(np.std(v)),
        "arousal_std": float(np.std(a)),
        "std_difference": float(abs(np.std(v) - np.std(a))),
        "quadrant_counts": counts,
    }
