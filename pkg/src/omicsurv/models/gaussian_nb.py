"""Gaussian naive Bayes with per-feature variances floored at 1e-9."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VAR_FLOOR = 1e-9


@dataclass
class GnbState:
    mean0: np.ndarray
    mean1: np.ndarray
    var0: np.ndarray
    var1: np.ndarray
    log_prior0: float
    log_prior1: float


def fit(x: np.ndarray, y: np.ndarray, params: dict, seed: int) -> GnbState:
    x0, x1 = x[y == 0], x[y == 1]
    return GnbState(
        mean0=x0.mean(axis=0),
        mean1=x1.mean(axis=0),
        var0=np.maximum(x0.var(axis=0), VAR_FLOOR),
        var1=np.maximum(x1.var(axis=0), VAR_FLOOR),
        log_prior0=float(np.log(len(x0) / len(x))),
        log_prior1=float(np.log(len(x1) / len(x))),
    )


def _class_loglik(x, mean, var):
    return -0.5 * np.sum(np.log(2.0 * np.pi * var) + (x - mean) ** 2 / var, axis=1)


def scores(state: GnbState, x: np.ndarray) -> np.ndarray:
    """Log-posterior difference, positive favors class 1."""
    ll1 = _class_loglik(x, state.mean1, state.var1) + state.log_prior1
    ll0 = _class_loglik(x, state.mean0, state.var0) + state.log_prior0
    return ll1 - ll0


def to_jsonable(state: GnbState) -> dict:
    return {
        "mean0": state.mean0.tolist(),
        "mean1": state.mean1.tolist(),
        "var0": state.var0.tolist(),
        "var1": state.var1.tolist(),
        "log_prior0": state.log_prior0,
        "log_prior1": state.log_prior1,
    }


def from_jsonable(d: dict) -> GnbState:
    return GnbState(
        mean0=np.array(d["mean0"]),
        mean1=np.array(d["mean1"]),
        var0=np.array(d["var0"]),
        var1=np.array(d["var1"]),
        log_prior0=d["log_prior0"],
        log_prior1=d["log_prior1"],
    )
