"""Exact O(N^2) t-SNE to arbitrary output dimension.

Input affinities use per-point Gaussian bandwidths found by bisection on the
precision until each conditional's perplexity matches the target. The
embedding is optimized by plain gradient descent with momentum (0.5 for the
first 250 iterations, 0.8 after) and early exaggeration. Initial coordinates
are drawn per point from a generator keyed by (seed, patient-id hash), so
permuting the input rows permutes the embedding identically.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .dataio import ClinicalRecord, FeatureMatrix
from .errors import ConfigError, DataError

_EPS = 1e-12
_MOMENTUM_SWITCH_ITER = 250


@dataclass(frozen=True)
class TsneConfig:
    output_dims: int = 2
    perplexity: float = 30.0
    learning_rate: float = 200.0
    iterations: int = 1000
    early_exaggeration_factor: float = 12.0
    early_exaggeration_iters: int = 250
    seed: int = 0

    def __post_init__(self):
        if self.output_dims < 1:
            raise ConfigError("output_dims must be >= 1")
        if self.perplexity <= 0 or self.learning_rate <= 0:
            raise ConfigError("perplexity and learning_rate must be > 0")
        if self.iterations < 1 or self.early_exaggeration_iters < 0:
            raise ConfigError("iteration counts must be non-negative")
        if self.early_exaggeration_factor < 1:
            raise ConfigError("early_exaggeration_factor must be >= 1")


@dataclass(frozen=True)
class Embedding:
    patient_ids: list[str]
    coords: np.ndarray      # (N, output_dims)
    kl_trace: np.ndarray    # KL divergence recorded at every iteration


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _conditional_row(d2_row: np.ndarray, beta: float) -> tuple[np.ndarray, float]:
    """Conditional distribution for one point at precision beta, and its
    perplexity 2^H."""
    logits = -beta * d2_row
    logits -= logits.max()
    p = np.exp(logits)
    z = p.sum()
    p /= z
    h_nats = -np.sum(p * np.log(np.maximum(p, _EPS)))
    return p, float(np.exp(h_nats))


def input_affinities(features: FeatureMatrix | np.ndarray,
                     perplexity: float,
                     tol: float = 1e-4) -> np.ndarray:
    """Symmetric t-SNE affinity matrix P (zero diagonal, sums to 1)."""
    x = features.values if isinstance(features, FeatureMatrix) else np.asarray(features)
    n = x.shape[0]
    if n < 4:
        raise DataError("input_affinities needs at least 4 points")
    if perplexity >= (n - 1) / 3:
        raise ConfigError(
            f"perplexity {perplexity} too large for {n} points "
            f"(must be < (N-1)/3)"
        )
    d2 = _pairwise_sq_dists(x)
    cond = np.zeros((n, n))
    for i in range(n):
        row = np.delete(d2[i], i)
        lo, hi = 0.0, 1.0
        # expand until the bracket contains the target perplexity
        for _ in range(64):
            _, perp = _conditional_row(row, hi)
            if perp <= perplexity:
                break
            lo, hi = hi, hi * 4.0
        else:
            raise DataError(f"failed to bracket bandwidth for point {i}")
        p, perp = _conditional_row(row, hi)
        for _ in range(200):
            if abs(perp - perplexity) < tol:
                break
            mid = 0.5 * (lo + hi)
            p, perp = _conditional_row(row, mid)
            if perp > perplexity:
                lo = mid
            else:
                hi = mid
        if abs(perp - perplexity) >= tol:
            raise DataError(
                f"bandwidth search did not reach perplexity tolerance for point {i}"
            )
        cond[i, np.arange(n) != i] = p
    return (cond + cond.T) / (2.0 * n)


def _q_matrix(coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    num = 1.0 / (1.0 + _pairwise_sq_dists(coords))
    np.fill_diagonal(num, 0.0)
    q = num / num.sum()
    return q, num


def kl_divergence(p: np.ndarray, coords: np.ndarray) -> float:
    q, _ = _q_matrix(coords)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], _EPS))))


def kl_gradient(p: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """Gradient of KL(P||Q) with the Student-t(1) low-dimensional kernel."""
    if p.shape[0] != coords.shape[0]:
        raise DataError("P and coords disagree on the number of points")
    q, num = _q_matrix(coords)
    w = (p - q) * num
    return 4.0 * (np.diag(w.sum(axis=1)) @ coords - w @ coords)


def _init_coords(patient_ids: list[str], dims: int, seed: int) -> np.ndarray:
    """Per-point Gaussian init keyed by (seed, patient id hash): row order
    does not matter."""
    coords = np.empty((len(patient_ids), dims))
    for i, pid in enumerate(patient_ids):
        digest = hashlib.blake2b(pid.encode("utf-8"), digest_size=8).digest()
        rng = np.random.default_rng(
            np.random.SeedSequence([seed, int.from_bytes(digest, "big")])
        )
        coords[i] = 1e-4 * rng.standard_normal(dims)
    return coords


def tsne(features: FeatureMatrix, config: TsneConfig) -> Embedding:
    """Run exact t-SNE; the returned trace records KL(P||Q) per iteration
    against the un-exaggerated P."""
    p = input_affinities(features, config.perplexity)
    coords = _init_coords(features.patient_ids, config.output_dims, config.seed)
    velocity = np.zeros_like(coords)
    trace = np.empty(config.iterations)
    for it in range(config.iterations):
        exaggerate = it < config.early_exaggeration_iters
        p_eff = p * config.early_exaggeration_factor if exaggerate else p
        q, num = _q_matrix(coords)
        w = (p_eff - q) * num
        grad = 4.0 * (np.diag(w.sum(axis=1)) @ coords - w @ coords)
        momentum = 0.5 if it < _MOMENTUM_SWITCH_ITER else 0.8
        velocity = momentum * velocity - config.learning_rate * grad
        coords = coords + velocity
        q_new, _ = _q_matrix(coords)
        mask = p > 0
        trace[it] = np.sum(p[mask] * np.log(p[mask] / np.maximum(q_new[mask], _EPS)))
    return Embedding(patient_ids=list(features.patient_ids), coords=coords,
                     kl_trace=trace)


def project_with_age(features: FeatureMatrix, clinical: list[ClinicalRecord],
                     config: TsneConfig) -> FeatureMatrix:
    """t-SNE the features, then append the raw age column."""
    by_id = {r.patient_id: r for r in clinical}
    ages = []
    for pid in features.patient_ids:
        record = by_id.get(pid)
        if record is None or record.age_years is None:
            raise DataError(f"age missing for patient {pid}")
        ages.append(record.age_years)
    embedding = tsne(features, config)
    values = np.hstack([embedding.coords, np.array(ages)[:, None]])
    names = [f"tsne_{k}" for k in range(config.output_dims)] + ["age"]
    return FeatureMatrix(patient_ids=list(features.patient_ids),
                         feature_names=names, values=values)
