"""From-scratch classifiers: KNN, SMO-trained kernel SVM, backprop MLP.

All trainers are pure functions of (data, TrainConfig): the seed fixes
partner selection in the SMO sweep and initialization/batch order in the
MLP. Trained models are immutable and can be shared across threads.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .knn import KnnModel, knn_predict
from .mlp import MlpModel, mlp_predict, mlp_predict_proba, mlp_train
from .svm import SvmModel, svm_decision, svm_predict, svm_train

CLASSIFIER_NAMES = ("knn", "svm", "mlp")

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for all three trainers; defaults are recorded here
    so grid reports are fully auditable."""

    seed: int = 0
    knn_k: int = 5
    svm_c: float = 1.0
    svm_kernel: str = "rbf"
    svm_gamma: float | None = None  # None -> 1/(d * mean column variance)
    svm_tol: float = 1e-3
    svm_max_passes: int = 10
    mlp_hidden: int = 64
    mlp_epochs: int = 200
    mlp_batch: int = 32
    mlp_lr: float = 1e-3

    def __post_init__(self):
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.knn_k < 1:
            raise ValueError("knn_k must be positive")
        if self.svm_c <= 0 or self.svm_tol <= 0 or self.svm_max_passes < 1:
            raise ValueError("svm_c, svm_tol, svm_max_passes must be positive")
        if self.svm_kernel not in ("rbf", "linear"):
            raise ValueError(f"unknown kernel {self.svm_kernel!r}")
        if self.svm_gamma is not None and self.svm_gamma <= 0:
            raise ValueError("svm_gamma must be positive when set")
        if self.mlp_hidden < 1 or self.mlp_epochs < 0 or self.mlp_batch < 1 or self.mlp_lr <= 0:
            raise ValueError("mlp_hidden/mlp_batch must be >= 1, mlp_epochs >= 0, mlp_lr > 0")

    def to_dict(self) -> dict:
        return asdict(self)


def save_model(model, path, config: TrainConfig | None = None) -> None:
    """Audit-oriented JSON serialization (not a performance path)."""
    if isinstance(model, KnnModel):
        payload = {"kind": "knn", "k": model.k,
                   "train_x": model.train_x.tolist(), "train_y": model.train_y.tolist()}
    elif isinstance(model, SvmModel):
        payload = {"kind": "svm", "kernel": model.kernel, "gamma": model.gamma,
                   "c": model.c, "bias": model.bias,
                   "support_vectors": model.support_vectors.tolist(),
                   "dual_coef": model.dual_coef.tolist()}
    elif isinstance(model, MlpModel):
        payload = {"kind": "mlp", "output": model.output, "classes": list(model.classes),
                   "weights": [w.tolist() for w in model.weights],
                   "biases": [b.tolist() for b in model.biases],
                   "loss_history": list(model.loss_history)}
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    payload["format_version"] = MODEL_FORMAT_VERSION
    payload["config"] = config.to_dict() if config is not None else None
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_model(path):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    kind = payload.get("kind")
    if kind == "knn":
        return KnnModel(train_x=np.array(payload["train_x"], dtype=np.float64),
                        train_y=np.array(payload["train_y"], dtype=np.int64),
                        k=int(payload["k"]))
    if kind == "svm":
        return SvmModel(support_vectors=np.array(payload["support_vectors"], dtype=np.float64),
                        dual_coef=np.array(payload["dual_coef"], dtype=np.float64),
                        bias=float(payload["bias"]), kernel=payload["kernel"],
                        gamma=float(payload["gamma"]), c=float(payload["c"]))
    if kind == "mlp":
        return MlpModel(weights=tuple(np.array(w) for w in payload["weights"]),
                        biases=tuple(np.array(b) for b in payload["biases"]),
                        output=payload["output"], classes=tuple(payload["classes"]),
                        loss_history=tuple(payload["loss_history"]))
    raise ValueError(f"unknown model kind {kind!r}")


__all__ = [
    "CLASSIFIER_NAMES", "TrainConfig",
    "KnnModel", "knn_predict",
    "SvmModel", "svm_train", "svm_predict", "svm_decision",
    "MlpModel", "mlp_train", "mlp_predict", "mlp_predict_proba",
    "save_model", "load_model",
]
