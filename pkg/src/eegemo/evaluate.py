"""Seeded (stratified) k-fold cross-validation and the region x band grids.

Fold assignment, standardization, training, and scoring are pure
functions of (data, config, seed); cells are independent, and results
are reduced in fold-index order, so a grid run reproduces byte-for-byte.
Per-fold standardizers and classifiers see training rows only.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .classify import TrainConfig
from .classify.knn import KnnModel, knn_predict
from .classify.mlp import mlp_predict, mlp_train
from .classify.svm import svm_predict, svm_train
from .featurize import (FeatureMatrix, LabelVector, REGION_CHANNELS, REGION_ORDER,
                        build_features, fit_standardizer_values, labels_for_scheme)
from .ingest import Dataset
from .spectral import CANONICAL_BANDS, WelchParams, band_by_name

BAND_ORDER = tuple(b.name for b in CANONICAL_BANDS)


@dataclass(frozen=True)
class FoldPlan:
    """k disjoint trial-index folds partitioning 0..n-1."""

    folds: tuple
    seed: int
    stratified: bool

    def __post_init__(self):
        folds = tuple(tuple(int(i) for i in f) for f in self.folds)
        flat = sorted(i for f in folds for i in f)
        if flat != list(range(len(flat))):
            raise ValueError("folds must partition 0..n-1 exactly")
        sizes = [len(f) for f in folds]
        if sizes and max(sizes) - min(sizes) > 1:
            raise ValueError("fold sizes must differ by at most 1")
        object.__setattr__(self, "folds", folds)

    @property
    def n(self) -> int:
        return sum(len(f) for f in self.folds)

    def train_indices(self, fold_idx: int) -> np.ndarray:
        held = set(self.folds[fold_idx])
        return np.array([i for i in range(self.n) if i not in held], dtype=np.int64)


def kfold_split(n: int, k: int, labels=None, seed: int = 0,
                stratified: bool = True) -> FoldPlan:
    """Deterministic fold assignment; stratified keeps per-fold class
    counts within 1 of proportionality."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    gen = np.random.Generator(np.random.PCG64(seed))
    if stratified:
        if labels is None:
            raise ValueError("stratified split needs labels")
        labels = np.asarray(labels)
        if len(labels) != n:
            raise ValueError(f"{len(labels)} labels for n={n}")
        stream = []
        for cls in np.unique(labels):
            members = np.flatnonzero(labels == cls)
            stream.extend(members[gen.permutation(len(members))])
        stream = np.asarray(stream)
    else:
        stream = gen.permutation(n)
    folds = [sorted(int(v) for v in stream[f::k]) for f in range(k)]
    return FoldPlan(folds=tuple(tuple(f) for f in folds), seed=seed, stratified=stratified)


@dataclass(frozen=True)
class CvReport:
    """Per-fold and mean accuracy for one (classifier, region, band) cell."""

    classifier: str
    region: str
    band: str
    fold_accuracies: tuple
    mean_accuracy: float
    config: dict = field(default_factory=dict)
    valid: bool = True
    diagnostic: str = ""


def accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if pred.size == 0:
        raise ValueError("cannot score an empty prediction set")
    return 100.0 * float(np.count_nonzero(pred == truth)) / pred.size


def fit_fold(values: np.ndarray, labels: np.ndarray, train_idx: np.ndarray,
             classifier: str, config: TrainConfig, standardize: bool = True):
    """Standardizer + model fitted on training rows only (the leakage
    boundary: nothing here may read rows outside train_idx)."""
    train_x = values[train_idx]
    train_y = labels[train_idx]
    scaler = fit_standardizer_values(train_x) if standardize else None
    if scaler is not None:
        train_x = scaler.transform(train_x)
    if classifier == "knn":
        model = KnnModel(train_x=train_x, train_y=train_y,
                         k=min(config.knn_k, len(train_idx)))
    elif classifier == "svm":
        model = svm_train(train_x, 2.0 * train_y - 1.0, config)
    elif classifier == "mlp":
        model = mlp_train(train_x, train_y, config)
    else:
        raise ValueError(f"unknown classifier {classifier!r}")
    return scaler, model


def _predict(classifier: str, model, rows: np.ndarray) -> np.ndarray:
    if classifier == "knn":
        return knn_predict(model, rows)
    if classifier == "svm":
        return (svm_predict(model, rows) + 1) // 2  # back to {0, 1}
    return mlp_predict(model, rows)


def cross_validate(features: FeatureMatrix, labels: LabelVector, classifier: str,
                   config: TrainConfig, folds: FoldPlan,
                   standardize: bool = True) -> CvReport:
    """10-fold protocol for one cell; never scores an untrainable fold."""
    values = features.values
    y = labels.labels
    if values.shape[0] != len(y):
        raise ValueError(f"{values.shape[0]} feature rows vs {len(y)} labels")
    if folds.n != len(y):
        raise ValueError("fold plan does not cover the label vector")
    base = CvReport(classifier=classifier, region="", band="",
                    fold_accuracies=(), mean_accuracy=float("nan"),
                    config=config.to_dict())
    n_classes = len(np.unique(y))
    if classifier == "svm" and n_classes > 2:
        return replace(base, valid=False,
                       diagnostic=f"svm is binary-only; got {n_classes} classes")
    fold_acc = []
    for fi in range(len(folds.folds)):
        train_idx = folds.train_indices(fi)
        test_idx = np.asarray(folds.folds[fi], dtype=np.int64)
        if len(np.unique(y[train_idx])) < 2:
            return replace(base, valid=False,
                           diagnostic=f"fold {fi}: training rows contain a single class")
        scaler, model = fit_fold(values, y, train_idx, classifier, config, standardize)
        test_x = scaler.transform(values[test_idx]) if scaler is not None else values[test_idx]
        fold_acc.append(accuracy(_predict(classifier, model, test_x), y[test_idx]))
    return replace(base, fold_accuracies=tuple(fold_acc),
                   mean_accuracy=float(np.mean(fold_acc)))


@dataclass(frozen=True)
class GridReport:
    """All CvReports for a scheme, plus per-classifier top regions/bands."""

    scheme: str
    classifiers: tuple
    regions: tuple
    bands: tuple
    cells: dict            # (classifier, region, band) -> CvReport
    config: dict
    top_regions: dict      # classifier -> ((region, score), ...) top 3
    top_bands: dict        # classifier -> ((band, score), ...) top 2

    def cell(self, classifier: str, region: str, band: str) -> CvReport:
        return self.cells[(classifier, region, band)]


def _top_k(scores: dict, order, k: int):
    ranked = [(name, scores[name]) for name in order if scores.get(name) is not None]
    ranked.sort(key=lambda item: -item[1])  # stable: ties keep table order
    return tuple(ranked[:k])


def run_grid(ds: Dataset, classifiers, regions, bands, welch_params: WelchParams,
             scheme: str, config: TrainConfig | None = None, seed: int = 0,
             k_folds: int = 10, stratified: bool = True, standardize: bool = True,
             extra_config: dict | None = None) -> GridReport:
    """One cross-validated cell per (classifier, region, band).

    Welch features are computed once over the union of region channels
    and shared by every cell; each cell selects its own columns.
    """
    classifiers = tuple(classifiers)
    regions = tuple(regions)
    band_defs = [band_by_name(b) if isinstance(b, str) else b for b in bands]
    band_names = tuple(b.name for b in band_defs)
    for r in regions:
        if r not in REGION_CHANNELS:
            raise ValueError(f"unknown region {r!r}")

    wanted = {ch for r in regions for ch in REGION_CHANNELS[r]}
    ordered_channels = [ch for ch in ds.channels.names if ch in wanted]
    features = build_features(ds, ordered_channels, band_defs, welch_params)
    labels = labels_for_scheme(ds.ratings, scheme)
    folds = kfold_split(ds.n_trials, k_folds, labels.labels, seed, stratified)

    train_config = config or TrainConfig(seed=seed)
    cells = {}
    for clf in classifiers:
        for region in regions:
            for band in band_defs:
                sub = features.select_columns(REGION_CHANNELS[region], [band.name])
                report = cross_validate(sub, labels, clf, train_config, folds, standardize)
                cells[(clf, region, band.name)] = replace(
                    report, region=region, band=band.name)

    top_regions, top_bands = {}, {}
    for clf in classifiers:
        region_scores = {
            r: max((cells[(clf, r, b)].mean_accuracy
                    for b in band_names if cells[(clf, r, b)].valid), default=None)
            for r in regions
        }
        band_scores = {
            b: max((cells[(clf, r, b)].mean_accuracy
                    for r in regions if cells[(clf, r, b)].valid), default=None)
            for b in band_names
        }
        top_regions[clf] = _top_k(region_scores, regions, 3)
        top_bands[clf] = _top_k(band_scores, band_names, 2)

    echo = {
        "scheme": scheme,
        "classifiers": list(classifiers),
        "regions": list(regions),
        "bands": list(band_names),
        "welch": {"segment_len": welch_params.segment_len,
                  "overlap": welch_params.overlap,
                  "window": welch_params.window,
                  "sample_rate_hz": welch_params.sample_rate_hz},
        "seed": seed,
        "k_folds": k_folds,
        "stratified": stratified,
        "standardize": standardize,
        "train_config": train_config.to_dict(),
    }
    if extra_config:
        echo.update(extra_config)
    return GridReport(scheme=scheme, classifiers=classifiers, regions=regions,
                      bands=band_names, cells=cells, config=echo,
                      top_regions=top_regions, top_bands=top_bands)


def default_grid_args():
    """Canonical (classifiers, regions, bands) in published-table order."""
    return ("knn", "svm", "mlp"), REGION_ORDER, BAND_ORDER
