"""Fold plans, cross-validation, leakage guard, and the grid runner."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegemo.classify import TrainConfig, load_model, save_model
from eegemo.evaluate import (FoldPlan, accuracy, cross_validate, default_grid_args,
                             fit_fold, kfold_split, run_grid)
from eegemo.featurize import FeatureMatrix, LabelVector
from eegemo.ingest import Dataset, SynthSpec, synth_dataset
from eegemo.spectral import WelchParams

PARAMS = WelchParams(sample_rate_hz=128.0)

FAST_CONFIG = TrainConfig(seed=0, mlp_epochs=3, svm_max_passes=3)


def feature_matrix(values):
    values = np.asarray(values, dtype=np.float64)
    meta = tuple(("c", str(i)) for i in range(values.shape[1]))
    return FeatureMatrix(values=values, column_meta=meta, welch_params=PARAMS)


def cluster_features(labels, gap=10.0, noise=0.1, seed=0, d=3):
    gen = np.random.Generator(np.random.PCG64(seed))
    centers = {lab: gen.normal(gap * (i + 1), 0.0, d)
               for i, lab in enumerate(sorted(set(labels)))}
    rows = [centers[lab] + gen.normal(0, noise, d) for lab in labels]
    return feature_matrix(np.array(rows))


# ---------------------------------------------------------------- folds

def test_ten_singleton_folds():
    plan = kfold_split(10, 10, labels=np.arange(10) % 2, seed=0)
    assert sorted(len(f) for f in plan.folds) == [1] * 10


def test_stratified_balanced_binary():
    labels = np.array([0, 1] * 20)
    plan = kfold_split(40, 10, labels, seed=1)
    for fold in plan.folds:
        vals = labels[list(fold)]
        assert (vals == 0).sum() == 2 and (vals == 1).sum() == 2


def test_fold_sizes_123_by_10():
    plan = kfold_split(123, 10, labels=np.zeros(123, dtype=int) % 1, seed=2,
                       stratified=False)
    sizes = sorted((len(f) for f in plan.folds), reverse=True)
    assert sizes == [13, 13, 13] + [12] * 7


def test_kfold_determinism_and_seed_sensitivity():
    labels = np.arange(30) % 3
    a = kfold_split(30, 5, labels, seed=7)
    b = kfold_split(30, 5, labels, seed=7)
    c = kfold_split(30, 5, labels, seed=8)
    assert a.folds == b.folds
    assert a.folds != c.folds


def test_kfold_bounds():
    with pytest.raises(ValueError):
        kfold_split(5, 6, labels=np.zeros(5), seed=0)
    with pytest.raises(ValueError):
        kfold_split(5, 1, labels=np.zeros(5), seed=0)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_fold_plan_partition_property(data):
    n = data.draw(st.integers(4, 120))
    k = data.draw(st.integers(2, min(n, 12)))
    n_classes = data.draw(st.integers(1, 4))
    labels = np.array(data.draw(st.lists(st.integers(0, n_classes - 1),
                                         min_size=n, max_size=n)))
    stratified = data.draw(st.booleans())
    seed = data.draw(st.integers(0, 2**32))
    plan = kfold_split(n, k, labels, seed, stratified)
    flat = sorted(i for f in plan.folds for i in f)
    assert flat == list(range(n))
    sizes = [len(f) for f in plan.folds]
    assert max(sizes) - min(sizes) <= 1
    if stratified:
        for cls in np.unique(labels):
            counts = [sum(labels[i] == cls for i in f) for f in plan.folds]
            assert max(counts) - min(counts) <= 1


def test_fold_plan_validates_partition():
    with pytest.raises(ValueError):
        FoldPlan(folds=((0, 1), (1, 2)), seed=0, stratified=False)
    with pytest.raises(ValueError):
        FoldPlan(folds=((0, 1, 2, 3), (4,)), seed=0, stratified=False)


# ---------------------------------------------------------------- accuracy

def test_accuracy_values():
    assert accuracy([1, 1, 1], [1, 1, 1]) == 100.0
    assert accuracy([0, 0], [1, 1]) == 0.0
    assert accuracy([1, 1, 0], [1, 1, 1]) == pytest.approx(200.0 / 3.0)
    with pytest.raises(ValueError):
        accuracy([], [])


def test_constant_predictor_scores_fifty_on_balanced_folds():
    labels = np.array([0, 1] * 20)
    plan = kfold_split(40, 10, labels, seed=3)
    fold_accs = [accuracy(np.zeros(len(f), dtype=int), labels[list(f)])
                 for f in plan.folds]
    assert np.mean(fold_accs) == 50.0


# ---------------------------------------------------------------- cv

def test_knn_k1_separable_scores_100():
    labels = LabelVector(labels=np.array([0, 1] * 20), scheme="arousal-binary")
    features = cluster_features(labels.labels, seed=4)
    plan = kfold_split(40, 10, labels.labels, seed=4)
    report = cross_validate(features, labels, "knn",
                            TrainConfig(seed=4, knn_k=1), plan)
    assert report.valid
    assert report.mean_accuracy == 100.0
    assert report.fold_accuracies == (100.0,) * 10


def test_mean_consistency():
    labels = LabelVector(labels=np.array([0, 1] * 15), scheme="arousal-binary")
    features = cluster_features(labels.labels, noise=8.0, seed=5)
    plan = kfold_split(30, 5, labels.labels, seed=5)
    report = cross_validate(features, labels, "knn", TrainConfig(seed=5), plan)
    assert report.mean_accuracy == float(np.mean(report.fold_accuracies))


def test_permutation_oracle():
    """Permuting trials with the equivalently-permuted plan keeps the mean."""
    labels = np.array([0, 1] * 20)
    features = cluster_features(labels, noise=6.0, seed=6)
    plan = kfold_split(40, 10, labels, seed=6)
    config = TrainConfig(seed=6, knn_k=3)
    lv = LabelVector(labels=labels, scheme="arousal-binary")
    base = cross_validate(features, lv, "knn", config, plan)

    perm = np.random.Generator(np.random.PCG64(60)).permutation(40)
    inverse = np.empty(40, dtype=int)
    inverse[perm] = np.arange(40)
    perm_features = feature_matrix(features.values[perm])
    perm_labels = LabelVector(labels=labels[perm], scheme="arousal-binary")
    perm_plan = FoldPlan(folds=tuple(tuple(sorted(int(inverse[i]) for i in f))
                                     for f in plan.folds),
                         seed=plan.seed, stratified=plan.stratified)
    permuted = cross_validate(perm_features, perm_labels, "knn", config, perm_plan)
    assert permuted.mean_accuracy == base.mean_accuracy


def test_single_class_training_fold_marked_invalid():
    labels = np.array([1] + [0] * 9)
    lv = LabelVector(labels=labels, scheme="arousal-binary")
    features = feature_matrix(np.arange(20.0).reshape(10, 2))
    plan = kfold_split(10, 2, labels, seed=7)
    report = cross_validate(features, lv, "knn", TrainConfig(seed=7, knn_k=1), plan)
    assert not report.valid
    assert "single class" in report.diagnostic
    assert report.fold_accuracies == ()


def test_svm_multiclass_cell_marked_invalid():
    labels = LabelVector(labels=np.arange(20) % 4, scheme="quadrant-4")
    features = cluster_features(labels.labels, seed=8)
    plan = kfold_split(20, 5, labels.labels, seed=8)
    report = cross_validate(features, labels, "svm", FAST_CONFIG, plan)
    assert not report.valid
    assert "binary-only" in report.diagnostic


@pytest.mark.parametrize("classifier", ["knn", "svm", "mlp"])
def test_leakage_guard_bitwise(classifier):
    """Mutating held-out rows must not move trained parameters at all."""
    gen = np.random.Generator(np.random.PCG64(9))
    values = gen.normal(size=(24, 4))
    labels = np.array([0, 1] * 12)
    train_idx = np.arange(12)
    scaler_a, model_a = fit_fold(values, labels, train_idx, classifier, FAST_CONFIG)
    mutated = values.copy()
    mutated[12:] += gen.normal(5.0, 3.0, size=(12, 4))
    scaler_b, model_b = fit_fold(mutated, labels, train_idx, classifier, FAST_CONFIG)
    assert np.array_equal(scaler_a.means, scaler_b.means)
    assert np.array_equal(scaler_a.stds, scaler_b.stds)
    if classifier == "knn":
        pairs = [(model_a.train_x, model_b.train_x)]
    elif classifier == "svm":
        pairs = [(model_a.support_vectors, model_b.support_vectors),
                 (model_a.dual_coef, model_b.dual_coef),
                 (np.array([model_a.bias]), np.array([model_b.bias]))]
    else:
        pairs = list(zip(model_a.weights + model_a.biases,
                         model_b.weights + model_b.biases))
    for a, b in pairs:
        assert np.array_equal(a, b)


# ---------------------------------------------------------------- grid

@pytest.fixture(scope="module")
def grid_ds():
    return synth_dataset(SynthSpec(n_trials=24, seed=31))


def test_grid_has_72_cells(grid_ds):
    classifiers, regions, bands = default_grid_args()
    report = run_grid(grid_ds, classifiers, regions, bands, PARAMS,
                      scheme="arousal-binary", config=FAST_CONFIG,
                      seed=1, k_folds=4)
    assert len(report.cells) == 3 * 6 * 4 == 72
    assert all(c.valid for c in report.cells.values())
    assert report.config["seed"] == 1


def test_grid_matches_cell_recomputation(grid_ds):
    """A grid cell equals a standalone build_features + cross_validate."""
    from eegemo.featurize import REGION_CHANNELS, build_features, labels_for_scheme
    from eegemo.spectral import band_by_name

    report = run_grid(grid_ds, ("knn",), ("left",), ("alpha",), PARAMS,
                      scheme="valence-binary", config=FAST_CONFIG, seed=2, k_folds=4)
    cell = report.cell("knn", "left", "alpha")
    features = build_features(grid_ds, REGION_CHANNELS["left"],
                              [band_by_name("alpha")], PARAMS)
    labels = labels_for_scheme(grid_ds.ratings, "valence-binary")
    plan = kfold_split(grid_ds.n_trials, 4, labels.labels, seed=2)
    direct = cross_validate(features, labels, "knn", FAST_CONFIG, plan)
    assert cell.fold_accuracies == direct.fold_accuracies


def test_grid_top_cell_on_spliced_dataset():
    """When only alpha x left separates the classes, it must rank first."""
    alpha_amps = (
        (1.0, 2.6, 1.0, 1.0),  # HAHV: high arousal -> strong alpha
        (1.0, 0.4, 1.0, 1.0),  # LAHV
        (1.0, 2.6, 1.0, 1.0),  # HALV
        (1.0, 0.4, 1.0, 1.0),  # LALV
    )
    flat_amps = tuple(tuple(1.0 for _ in range(4)) for _ in range(4))
    signal = synth_dataset(SynthSpec(n_trials=40, seed=32, band_amps=alpha_amps))
    flat = synth_dataset(SynthSpec(n_trials=40, seed=32, band_amps=flat_amps))
    left_idx = [signal.channels.index(c) for c in
                ("Fp1", "AF3", "F7", "FC5", "T7")]
    samples = flat.samples.copy()
    samples[:, left_idx, :] = signal.samples[:, left_idx, :]
    spliced = Dataset(sample_rate_hz=128.0, samples=samples,
                      ratings=signal.ratings, channels=signal.channels,
                      provenance="spliced alpha-left fixture")

    classifiers, regions, bands = default_grid_args()
    config = TrainConfig(seed=33, mlp_epochs=40)
    report = run_grid(spliced, classifiers, regions, bands, PARAMS,
                      scheme="arousal-binary", config=config, seed=33, k_folds=5)
    for clf in classifiers:
        assert report.top_regions[clf][0][0] == "left"
        assert report.top_bands[clf][0][0] == "alpha"
        best = max(report.cells[(clf, r, b)].mean_accuracy
                   for r in regions for b in bands)
        assert report.cell(clf, "left", "alpha").mean_accuracy == best


def test_grid_unknown_region_rejected(grid_ds):
    with pytest.raises(ValueError, match="unknown region"):
        run_grid(grid_ds, ("knn",), ("temporal",), ("alpha",), PARAMS,
                 scheme="arousal-binary", config=FAST_CONFIG, k_folds=4)


# ---------------------------------------------------------------- persistence

def test_model_save_load_roundtrip(tmp_path):
    from eegemo.classify import (KnnModel, knn_predict, mlp_predict, mlp_train,
                                 svm_predict, svm_train)

    gen = np.random.Generator(np.random.PCG64(11))
    x = gen.normal(size=(20, 3))
    y = np.array([0, 1] * 10)

    knn = KnnModel(train_x=x, train_y=y, k=3)
    save_model(knn, tmp_path / "knn.json", TrainConfig())
    back = load_model(tmp_path / "knn.json")
    assert np.array_equal(knn_predict(back, x), knn_predict(knn, x))

    svm = svm_train(x, 2.0 * y - 1.0, FAST_CONFIG)
    save_model(svm, tmp_path / "svm.json", FAST_CONFIG)
    back = load_model(tmp_path / "svm.json")
    assert np.array_equal(svm_predict(back, x), svm_predict(svm, x))

    mlp = mlp_train(x, y, FAST_CONFIG)
    save_model(mlp, tmp_path / "mlp.json", FAST_CONFIG)
    back = load_model(tmp_path / "mlp.json")
    assert np.array_equal(mlp_predict(back, x), mlp_predict(mlp, x))
