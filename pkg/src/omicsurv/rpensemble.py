"""Random-projection ensemble classifier.

For each of B1 groups, B2 Haar-distributed row-orthonormal projections are
drawn; the base classifier is fit on the projected training split and the
projection with the lowest holdout misclassification wins its group. The
winners are refit on the full data and vote; the score is the fraction of
groups voting class 1 and the hard label thresholds that fraction at alpha.

Feature importance sums, over the selected projections, each feature's
squared projection weights scaled by its training variance (so constant and
all-zero columns get exactly zero importance), normalized to sum to 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import models
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class RpConfig:
    b1_groups: int = 100
    b2_per_group: int = 20
    projected_dim: int = 5
    base_family: str = "gaussian_nb"
    base_hyperparameters: dict = field(default_factory=dict)
    vote_threshold_alpha: float | None = None
    selection_holdout_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.b1_groups < 1 or self.b2_per_group < 1:
            raise ConfigError("b1_groups and b2_per_group must be >= 1")
        if self.projected_dim < 1:
            raise ConfigError("projected_dim must be >= 1")
        if self.vote_threshold_alpha is not None and not (
            0.0 < self.vote_threshold_alpha < 1.0
        ):
            raise ConfigError("vote_threshold_alpha must lie in (0,1)")
        if not 0.0 < self.selection_holdout_fraction < 1.0:
            raise ConfigError("selection_holdout_fraction must lie in (0,1)")


@dataclass
class RpModel:
    config: RpConfig
    projections: list[np.ndarray]       # B1 matrices, each d x M
    base_models: list[models.TrainedModel]
    alpha: float
    feature_importance: np.ndarray      # length M, sums to 1
    # holdout errors per group, shape (B1, B2); selected index per group
    group_errors: np.ndarray = None
    selected_indices: np.ndarray = None


def sample_projection(m: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x m matrix with orthonormal rows."""
    if d > m:
        raise ConfigError(f"projected dim {d} exceeds ambient dim {m}")
    for _ in range(8):
        g = rng.standard_normal((m, d))
        q, r = np.linalg.qr(g)
        diag = np.diag(r)
        if np.min(np.abs(diag)) < 1e-12:
            continue  # rank deficient draw; resample
        return (q * np.sign(diag)).T
    raise DataError("failed to draw a full-rank projection in 8 attempts")


def _stratified_holdout(y: np.ndarray, fraction: float,
                        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    train_idx, hold_idx = [], []
    for cls in (0, 1):
        cls_idx = np.flatnonzero(y == cls)
        perm = rng.permutation(cls_idx)
        n_hold = max(1, int(round(fraction * len(cls_idx))))
        if n_hold >= len(cls_idx):
            raise DataError("holdout split leaves a single-class training set")
        hold_idx.extend(perm[:n_hold])
        train_idx.extend(perm[n_hold:])
    return np.sort(np.array(train_idx)), np.sort(np.array(hold_idx))


def train(x: np.ndarray, y: np.ndarray, config: RpConfig) -> RpModel:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    m = x.shape[1]
    if config.projected_dim > m:
        raise ConfigError("projected_dim must not exceed the feature count")
    if len(np.unique(y)) < 2:
        raise DataError("both classes must be present")

    split_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 999]))
    train_idx, hold_idx = _stratified_holdout(
        y, config.selection_holdout_fraction, split_rng
    )
    x_tr, y_tr = x[train_idx], y[train_idx]
    x_ho, y_ho = x[hold_idx], y[hold_idx]

    base_spec = models.ModelSpec(
        family=config.base_family,
        hyperparameters=config.base_hyperparameters,
        seed=config.seed,
    )

    errors = np.empty((config.b1_groups, config.b2_per_group))
    selected = np.empty(config.b1_groups, dtype=np.int64)
    projections: list[np.ndarray] = []
    for g in range(config.b1_groups):
        best_proj = None
        for b in range(config.b2_per_group):
            rng = np.random.default_rng(np.random.SeedSequence([config.seed, g, b]))
            proj = sample_projection(m, config.projected_dim, rng)
            fitted = models.fit(base_spec, x_tr @ proj.T, y_tr)
            err = float(np.mean(models.predict_labels(fitted, x_ho @ proj.T) != y_ho))
            errors[g, b] = err
            if best_proj is None or err < errors[g, selected[g]]:
                selected[g] = b
                best_proj = proj
        projections.append(best_proj)

    base_models = [
        models.fit(base_spec, x @ proj.T, y) for proj in projections
    ]

    votes = _vote_matrix(base_models, projections, x)
    score = votes.mean(axis=0)
    if config.vote_threshold_alpha is not None:
        alpha = config.vote_threshold_alpha
    else:
        grid = np.arange(config.b1_groups + 1) / config.b1_groups
        errs = [float(np.mean((score >= a).astype(np.int64) != y)) for a in grid]
        alpha = float(grid[int(np.argmin(errs))])

    var = x.var(axis=0)
    raw = np.zeros(m)
    for proj in projections:
        raw += np.sum(proj ** 2, axis=0) * var
    total = raw.sum()
    importance = raw / total if total > 0 else np.full(m, 1.0 / m)

    return RpModel(
        config=config,
        projections=projections,
        base_models=base_models,
        alpha=alpha,
        feature_importance=importance,
        group_errors=errors,
        selected_indices=selected,
    )


def _vote_matrix(base_models, projections, x) -> np.ndarray:
    votes = np.empty((len(base_models), len(x)), dtype=np.int64)
    for i, (fitted, proj) in enumerate(zip(base_models, projections)):
        votes[i] = models.predict_labels(fitted, x @ proj.T)
    return votes


def predict_scores(model: RpModel, x: np.ndarray) -> np.ndarray:
    """Fraction of the B1 selected base models voting class 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] != model.projections[0].shape[1]:
        raise DataError(
            f"feature width {x.shape[1]} does not match training width "
            f"{model.projections[0].shape[1]}"
        )
    return _vote_matrix(model.base_models, model.projections, x).mean(axis=0)


def predict_labels(model: RpModel, x: np.ndarray) -> np.ndarray:
    return (predict_scores(model, x) >= model.alpha).astype(np.int64)
