"""Independent oracles used by the tests.

Everything here is deliberately written from definitions (explicit sums,
exhaustive sorting, finite differences) and stays decoupled from the
library's implementation paths.
"""

from __future__ import annotations

import math

import numpy as np


def naive_dft(x):
    """Direct evaluation of X[k] = sum_j x[j] exp(-2*pi*i*j*k/n)."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    out = np.empty(n, dtype=np.complex128)
    j = np.arange(n)
    for k in range(n):
        out[k] = np.sum(x * np.exp(-2j * np.pi * j * k / n))
    return out


def naive_periodogram(segment, window, fs):
    """One-sided modified periodogram built on the naive DFT."""
    segment = np.asarray(segment, dtype=np.float64)
    window = np.asarray(window, dtype=np.float64)
    n = len(segment)
    spectrum = naive_dft(segment * window)[: n // 2 + 1]
    power = np.abs(spectrum) ** 2 / (fs * np.sum(window**2))
    power[1:-1] *= 2.0
    return power


def hann_sum_sq(n):
    """Window energy via an explicit python loop."""
    total = 0.0
    for k in range(n):
        w = 0.5 * (1.0 - math.cos(2.0 * math.pi * k / n))
        total += w * w
    return total


def brute_knn_predict(train_x, train_y, queries, k):
    """Exhaustive-sort KNN with the documented tie rules."""
    preds = []
    for q in queries:
        scored = sorted(
            (sum((a - b) ** 2 for a, b in zip(row, q)), idx)
            for idx, row in enumerate(train_x)
        )
        top = [int(train_y[idx]) for _, idx in scored[:k]]
        votes = {}
        for label in top:
            votes[label] = votes.get(label, 0) + 1
        best = max(votes.values())
        winners = [label for label, c in votes.items() if c == best]
        preds.append(winners[0] if len(winners) == 1 else top[0])
    return preds


def central_difference(loss_fn, params, indices, eps=1e-5):
    """Numeric d(loss)/d(params[i]) at the given flat indices.

    `params` is a list of arrays; `indices` are (param_idx, flat_idx)
    pairs; loss_fn takes the (possibly perturbed) list of arrays.
    """
    grads = []
    for pi, fi in indices:
        bumped = [p.copy() for p in params]
        bumped[pi].flat[fi] += eps
        hi = loss_fn(bumped)
        bumped[pi].flat[fi] -= 2 * eps
        lo = loss_fn(bumped)
        grads.append((hi - lo) / (2 * eps))
    return grads


def relative_error(a, b, floor=1e-8):
    return abs(a - b) / max(abs(a) + abs(b), floor)
