"""One-hidden-layer ReLU perceptron trained by backprop with mini-batch Adam.

Binary problems use a single sigmoid output unit; multiclass uses
softmax. Both losses are cross-entropy computed from logits in the
numerically stable form, and the same loss/gradient routine drives both
training and the finite-difference checks in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class MlpModel:
    weights: tuple  # (w1: d x h, w2: h x k_out)
    biases: tuple   # (b1: h, b2: k_out)
    output: str     # "sigmoid" | "softmax"
    classes: tuple  # original labels, sorted; output units map onto these
    loss_history: tuple = ()

    def __post_init__(self):
        if self.output not in ("sigmoid", "softmax"):
            raise ValueError(f"unknown output kind {self.output!r}")
        ws = tuple(np.ascontiguousarray(w, dtype=np.float64) for w in self.weights)
        bs = tuple(np.ascontiguousarray(b, dtype=np.float64) for b in self.biases)
        if ws[0].shape[1] != bs[0].shape[0] or ws[1].shape[1] != bs[1].shape[0]:
            raise ValueError("weight/bias shapes do not chain")
        if ws[0].shape[1] != ws[1].shape[0]:
            raise ValueError("hidden layer shapes do not chain")
        for arr in ws + bs:
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def layer_sizes(self) -> tuple[int, int, int]:
        return (self.weights[0].shape[0], self.weights[0].shape[1], self.weights[1].shape[1])


def encode_targets(classes: tuple, y, output: str) -> np.ndarray:
    """Targets for the loss: 0/1 column for sigmoid, one-hot for softmax."""
    index = {label: i for i, label in enumerate(classes)}
    idx = np.array([index[int(v)] for v in np.asarray(y).ravel()], dtype=np.int64)
    if output == "sigmoid":
        return idx.astype(np.float64)[:, None]
    onehot = np.zeros((len(idx), len(classes)))
    onehot[np.arange(len(idx)), idx] = 1.0
    return onehot


def loss_and_gradients(weights, biases, x, target, output: str):
    """Mean cross-entropy and its gradients for one batch.

    Returns (loss, (dw1, dw2), (db1, db2)). The output-layer gradient is
    (p - target)/batch for both heads, so backprop below is shared.
    """
    w1, w2 = weights
    b1, b2 = biases
    z1 = x @ w1 + b1
    hidden = np.maximum(z1, 0.0)
    logits = hidden @ w2 + b2
    n = x.shape[0]
    if output == "sigmoid":
        # mean(max(z,0) - z*t + log1p(exp(-|z|)))
        loss = float(np.mean(np.maximum(logits, 0.0) - logits * target
                             + np.log1p(np.exp(-np.abs(logits)))))
        probs = 1.0 / (1.0 + np.exp(-logits))
    else:
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
        loss = float(-np.mean(np.sum(target * (shifted - log_norm), axis=1)))
        probs = np.exp(shifted - log_norm)
    d_logits = (probs - target) / n
    dw2 = hidden.T @ d_logits
    db2 = d_logits.sum(axis=0)
    d_hidden = (d_logits @ w2.T) * (z1 > 0.0)
    dw1 = x.T @ d_hidden
    db1 = d_hidden.sum(axis=0)
    return loss, (dw1, dw2), (db1, db2)


def init_params(n_features: int, n_hidden: int, n_out: int, seed: int):
    """He-uniform weights, zero biases; a pure function of the seed."""
    gen = np.random.Generator(np.random.PCG64(seed))
    lim1 = np.sqrt(6.0 / n_features)
    lim2 = np.sqrt(6.0 / n_hidden)
    w1 = gen.uniform(-lim1, lim1, size=(n_features, n_hidden))
    w2 = gen.uniform(-lim2, lim2, size=(n_hidden, n_out))
    return [w1, w2], [np.zeros(n_hidden), np.zeros(n_out)]


def mlp_train(x, y, config) -> MlpModel:
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or len(y) != x.shape[0]:
        raise ValueError("x and y row counts differ")
    if not np.all(np.isfinite(x)):
        raise ValueError("training matrix must be finite")
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise ValueError("training labels contain a single class")
    output = "sigmoid" if len(classes) == 2 else "softmax"
    n_out = 1 if output == "sigmoid" else len(classes)
    target = encode_targets(classes, y, output)

    weights, biases = init_params(x.shape[1], config.mlp_hidden, n_out, config.seed)
    params = weights + biases
    adam_m = [np.zeros_like(p) for p in params]
    adam_v = [np.zeros_like(p) for p in params]
    gen = np.random.Generator(np.random.PCG64(config.seed))

    history = [loss_and_gradients(weights, biases, x, target, output)[0]]
    step = 0
    n = x.shape[0]
    for _ in range(config.mlp_epochs):
        order = gen.permutation(n)
        for start in range(0, n, config.mlp_batch):
            batch = order[start:start + config.mlp_batch]
            _, dws, dbs = loss_and_gradients(weights, biases, x[batch], target[batch], output)
            step += 1
            for p, grad, m, v in zip(params, list(dws) + list(dbs), adam_m, adam_v):
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * grad
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * grad * grad
                m_hat = m / (1.0 - ADAM_BETA1**step)
                v_hat = v / (1.0 - ADAM_BETA2**step)
                p -= config.mlp_lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        history.append(loss_and_gradients(weights, biases, x, target, output)[0])

    return MlpModel(weights=tuple(weights), biases=tuple(biases), output=output,
                    classes=classes, loss_history=tuple(history))


def mlp_predict_proba(model: MlpModel, rows) -> np.ndarray:
    """Sigmoid: column of P(classes[1]); softmax: rows over model.classes."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    if rows.shape[1] != model.weights[0].shape[0]:
        raise ValueError(f"query dimension {rows.shape[1]} != "
                         f"model dimension {model.weights[0].shape[0]}")
    hidden = np.maximum(rows @ model.weights[0] + model.biases[0], 0.0)
    logits = hidden @ model.weights[1] + model.biases[1]
    if model.output == "sigmoid":
        return 1.0 / (1.0 + np.exp(-logits))
    shifted = logits - logits.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def mlp_predict(model: MlpModel, rows) -> np.ndarray:
    """Argmax class (softmax) or 0.5 threshold (sigmoid; 0.5 -> class 1)."""
    probs = mlp_predict_proba(model, rows)
    classes = np.asarray(model.classes, dtype=np.int64)
    if model.output == "sigmoid":
        return classes[(probs[:, 0] >= 0.5).astype(np.int64)]
    return classes[np.argmax(probs, axis=1)]
