"""Fully-connected networks with equal-width tanh hidden layers.

One code path serves both the classifier (logistic loss on a single logit)
and the survival-time regressor (weighted mean squared error against the
observed times). tanh keeps the loss smooth so finite-difference gradient
checks are exact to first order everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class MlpState:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    task: str  # "classify" or "regress"


def _init_params(n_in: int, width: int, n_hidden: int,
                 rng: np.random.Generator) -> tuple[list, list]:
    sizes = [n_in] + [width] * n_hidden + [1]
    weights, biases = [], []
    for a, b in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.standard_normal((a, b)) / np.sqrt(a))
        biases.append(np.zeros(b))
    return weights, biases


def _forward(weights, biases, x):
    """Returns the list of layer activations; last entry is the raw output."""
    acts = [x]
    h = x
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = h @ w + b
        h = z if i == len(weights) - 1 else np.tanh(z)
        acts.append(h)
    return acts


def _loss_and_output_grad(out: np.ndarray, y: np.ndarray, task: str,
                          sample_weight: np.ndarray):
    n = len(y)
    if task == "classify":
        y_pm = 2.0 * y - 1.0
        margins = y_pm * out
        loss = float(np.mean(sample_weight * np.logaddexp(0.0, -margins)))
        sig = 1.0 / (1.0 + np.exp(np.clip(margins, -500, 500)))
        dout = -(sample_weight * y_pm * sig) / n
    else:
        resid = y - out
        loss = float(np.mean(sample_weight * resid ** 2))
        dout = -2.0 * sample_weight * resid / n
    return loss, dout


def _backward(weights, acts, dout):
    """Backprop; returns (weight grads, bias grads) matching the param lists."""
    gw = [None] * len(weights)
    gb = [None] * len(weights)
    delta = dout[:, None] if dout.ndim == 1 else dout
    for i in range(len(weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (1.0 - acts[i] ** 2)
    return gw, gb


def loss_and_gradients(state: MlpState, x: np.ndarray, y: np.ndarray,
                       sample_weight: np.ndarray | None = None):
    if sample_weight is None:
        sample_weight = np.ones(len(y))
    acts = _forward(state.weights, state.biases, x)
    out = acts[-1][:, 0]
    loss, dout = _loss_and_output_grad(out, y, state.task, sample_weight)
    gw, gb = _backward(state.weights, acts, dout)
    return loss, gw, gb


def fit(x: np.ndarray, y: np.ndarray, params: dict, seed: int,
        task: str = "classify", sample_weight: np.ndarray | None = None) -> MlpState:
    n_hidden = int(params.get("n_hidden_layers", 2))
    width = int(params.get("width", 32))
    epochs = int(params.get("epochs", 200))
    lr = float(params.get("learning_rate", 0.01))
    batch_size = int(params.get("batch_size", 32))

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    weights, biases = _init_params(x.shape[1], width, n_hidden, rng)
    state = MlpState(weights=weights, biases=biases, task=task)
    if sample_weight is None:
        sample_weight = np.ones(len(y))
    yf = y.astype(np.float64)

    n = len(y)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    for _ in range(epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            acts = _forward(state.weights, state.biases, x[idx])
            out = acts[-1][:, 0]
            _, dout = _loss_and_output_grad(out, yf[idx], task, sample_weight[idx])
            gw, gb = _backward(state.weights, acts, dout)
            for w, b, dw, db in zip(state.weights, state.biases, gw, gb):
                w -= lr * dw
                b -= lr * db
    return state


def scores(state: MlpState, x: np.ndarray) -> np.ndarray:
    """Classifier: output logit. Regressor: predicted survival time."""
    return _forward(state.weights, state.biases, x)[-1][:, 0]


def epoch_losses(x, y, params, seed, task="classify", epochs=10):
    """Full-data loss after each of the first epochs; used by tests."""
    losses = []
    p = dict(params)
    for e in range(1, epochs + 1):
        p["epochs"] = e
        state = fit(x, y, p, seed, task=task)
        loss, _, _ = loss_and_gradients(state, x, y.astype(np.float64))
        losses.append(loss)
    return losses


def to_jsonable(state: MlpState) -> dict:
    return {
        "weights": [w.tolist() for w in state.weights],
        "biases": [b.tolist() for b in state.biases],
        "task": state.task,
    }


def from_jsonable(d: dict) -> MlpState:
    return MlpState(
        weights=[np.array(w) for w in d["weights"]],
        biases=[np.array(b) for b in d["biases"]],
        task=d["task"],
    )
