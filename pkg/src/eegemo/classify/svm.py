"""Binary kernel SVM trained with sequential minimal optimization.

The trainer is the classic two-at-a-time coordinate ascent on the dual:
sweep the training set, and for every multiplier violating the KKT
conditions beyond `tol`, pick a partner index (seeded, so training is a
pure function of data + config), solve the two-variable subproblem
analytically, clip to the box [0, C], and update the bias from the
margin conditions. Training stops after `max_passes` consecutive full
sweeps without an accepted update.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import SplitMix64

MIN_ALPHA_STEP = 1e-5  # reject tiny subproblem moves; guarantees progress


@dataclass(frozen=True)
class SvmModel:
    """Support vectors with dual coefficients alpha_i*y_i and bias."""

    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i, one per stored row
    bias: float
    kernel: str
    gamma: float
    c: float
    objective_history: tuple = ()

    def __post_init__(self):
        sv = np.ascontiguousarray(self.support_vectors, dtype=np.float64)
        dc = np.asarray(self.dual_coef, dtype=np.float64)
        if sv.ndim != 2 or len(dc) != sv.shape[0]:
            raise ValueError("support vectors and dual coefficients disagree")
        alphas = np.abs(dc)
        if np.any(alphas > self.c + 1e-9):
            raise ValueError("a dual coefficient exceeds the box constraint")
        sv.setflags(write=False)
        dc.setflags(write=False)
        object.__setattr__(self, "support_vectors", sv)
        object.__setattr__(self, "dual_coef", dc)


def _kernel_matrix(a: np.ndarray, b: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return a @ b.T
    if kernel == "rbf":
        sq = (np.sum(a * a, axis=1)[:, None]
              + np.sum(b * b, axis=1)[None, :]
              - 2.0 * (a @ b.T))
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


def resolve_gamma(x: np.ndarray, gamma: float | None) -> float:
    """Default RBF width 1/(d * mean column variance) when unset."""
    if gamma is not None:
        return float(gamma)
    mean_var = float(np.mean(np.var(x, axis=0)))
    if mean_var <= 0.0:
        return 1.0
    return 1.0 / (x.shape[1] * mean_var)


def _dual_objective(alphas, y, k_matrix):
    coef = alphas * y
    return float(np.sum(alphas) - 0.5 * coef @ k_matrix @ coef)


def svm_train(x, y, config, track_objective: bool = False) -> SvmModel:
    """SMO training on labels in {-1, +1}.

    With `track_objective` the dual objective is recorded after every
    accepted update (test instrumentation; quadratic cost per step).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or len(y) != x.shape[0]:
        raise ValueError("x and y row counts differ")
    if not np.all(np.isfinite(x)):
        raise ValueError("training matrix must be finite")
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise ValueError("labels must contain both classes, coded -1/+1")

    n = x.shape[0]
    c = float(config.svm_c)
    tol = float(config.svm_tol)
    gamma = resolve_gamma(x, config.svm_gamma)
    k_matrix = _kernel_matrix(x, x, config.svm_kernel, gamma)

    alphas = np.zeros(n)
    bias = 0.0
    picker = SplitMix64(config.seed)
    objective = [_dual_objective(alphas, y, k_matrix)] if track_objective else None

    def error(i: int) -> float:
        return float((alphas * y) @ k_matrix[:, i] + bias - y[i])

    quiet_passes = 0
    while quiet_passes < config.svm_max_passes:
        changed = 0
        for i in range(n):
            e_i = error(i)
            if not ((y[i] * e_i < -tol and alphas[i] < c)
                    or (y[i] * e_i > tol and alphas[i] > 0)):
                continue
            j = (i + 1 + picker.next_uint64() % (n - 1)) % n
            e_j = error(j)
            a_i_old, a_j_old = alphas[i], alphas[j]
            if y[i] != y[j]:
                low = max(0.0, a_j_old - a_i_old)
                high = min(c, c + a_j_old - a_i_old)
            else:
                low = max(0.0, a_i_old + a_j_old - c)
                high = min(c, a_i_old + a_j_old)
            if low == high:
                continue
            eta = 2.0 * k_matrix[i, j] - k_matrix[i, i] - k_matrix[j, j]
            if eta >= 0:
                continue
            a_j = np.clip(a_j_old - y[j] * (e_i - e_j) / eta, low, high)
            if abs(a_j - a_j_old) < MIN_ALPHA_STEP:
                continue
            a_i = a_i_old + y[i] * y[j] * (a_j_old - a_j)
            alphas[i], alphas[j] = a_i, a_j
            b1 = (bias - e_i - y[i] * (a_i - a_i_old) * k_matrix[i, i]
                  - y[j] * (a_j - a_j_old) * k_matrix[i, j])
            b2 = (bias - e_j - y[i] * (a_i - a_i_old) * k_matrix[i, j]
                  - y[j] * (a_j - a_j_old) * k_matrix[j, j])
            if 0 < a_i < c:
                bias = b1
            elif 0 < a_j < c:
                bias = b2
            else:
                bias = (b1 + b2) / 2.0
            changed += 1
            if objective is not None:
                objective.append(_dual_objective(alphas, y, k_matrix))
        quiet_passes = quiet_passes + 1 if changed == 0 else 0

    keep = alphas > 0
    return SvmModel(
        support_vectors=x[keep],
        dual_coef=alphas[keep] * y[keep],
        bias=bias,
        kernel=config.svm_kernel,
        gamma=gamma,
        c=c,
        objective_history=tuple(objective) if objective is not None else (),
    )


def svm_decision(model: SvmModel, rows) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if rows.shape[1] != model.support_vectors.shape[1]:
        raise ValueError(f"query dimension {rows.shape[1]} != "
                         f"model dimension {model.support_vectors.shape[1]}")
    k = _kernel_matrix(rows, model.support_vectors, model.kernel, model.gamma)
    return k @ model.dual_coef + model.bias


def svm_predict(model: SvmModel, rows) -> np.ndarray:
    """Sign of the decision function; the boundary f(x)=0 maps to +1."""
    f = svm_decision(model, rows)
    return np.where(f >= 0.0, 1, -1).astype(np.int64)
