"""EEG emotion classification toolkit.

Welch band-power feature extraction from 32-channel trial EEG,
median-split valence/arousal labeling, and from-scratch KNN/SVM/MLP
classification under seeded stratified 10-fold cross-validation, with
region x band accuracy grid reports and a fully synthetic data path.
"""

__version__ = "0.1.0"

from .classify import (TrainConfig, KnnModel, knn_predict, SvmModel, svm_train,
                       svm_predict, svm_decision, MlpModel, mlp_train, mlp_predict,
                       mlp_predict_proba, save_model, load_model)
from .evaluate import (CvReport, FoldPlan, GridReport, accuracy, cross_validate,
                       kfold_split, run_grid)
from .featurize import (FeatureMatrix, LabelVector, RegionMap, Standardizer,
                        apply_standardizer, build_features, fit_standardizer,
                        labels_for_scheme, median_split_labels, quadrant_labels)
from .ingest import (ChannelMap, Dataset, FormatError, RatingRecord, SynthSpec,
                     load_dataset, synth_dataset, trim_baseline, write_dataset)
from .spectral import (BandDef, CANONICAL_BANDS, PsdEstimate, WelchParams,
                       band_power, hann_window, periodogram, welch_psd)

__all__ = [name for name in dir() if not name.startswith("_")]
