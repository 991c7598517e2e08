"""ROC/AUC computation and stratified cross-validation.

AUC is defined by pair counting (the Mann-Whitney statistic, with ties worth
half a pair), computed via average ranks; trapezoidal integration of the ROC
curve is the independent cross-check and must agree to 1e-12.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models, rpensemble
from .errors import ConfigError, DataError
from .survival import LabeledDataset


@dataclass(frozen=True)
class RocCurve:
    thresholds: np.ndarray  # descending, one per distinct score
    fpr: np.ndarray         # starts at 0, ends at 1
    tpr: np.ndarray


@dataclass(frozen=True)
class CvPlan:
    k_folds: int = 10
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.k_folds < 2:
            raise ConfigError("k_folds must be >= 2")


@dataclass(frozen=True)
class EvalRow:
    model: str
    data: str
    fold: int
    auc: float
    n_test: int


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def aggregates(self) -> dict[tuple[str, str], tuple[float, float]]:
        """(model, data) -> (mean AUC, std AUC over folds)."""
        grouped: dict[tuple[str, str], list[float]] = {}
        for row in self.rows:
            grouped.setdefault((row.model, row.data), []).append(row.auc)
        return {
            key: (float(np.mean(v)), float(np.std(v)))
            for key, v in grouped.items()
        }

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "data", "fold", "auc", "n_test"])
            for r in self.rows:
                writer.writerow([r.model, r.data, r.fold, repr(r.auc), r.n_test])
            writer.writerow([])
            writer.writerow(["model", "data", "mean_auc", "std_auc", ""])
            for (model, data), (mean, std) in sorted(self.aggregates().items()):
                writer.writerow([model, data, repr(mean), repr(std), ""])


def _check_two_classes(labels: np.ndarray):
    if labels.min() == labels.max():
        raise DataError("both classes must be present")


def _average_ranks(x: np.ndarray) -> np.ndarray:
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sx = x[order]
    i = 0
    while i < len(sx):
        j = i
        while j + 1 < len(sx) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # 1-based average rank
        i = j + 1
    return ranks


def auc(scores, labels) -> float:
    """Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 * P(tie)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(scores) != len(labels):
        raise DataError("scores and labels must have equal length")
    _check_two_classes(labels)
    ranks = _average_ranks(scores)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_curve(scores, labels) -> RocCurve:
    """One point per distinct threshold, endpoints (0,0) and (1,1) included."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    _check_two_classes(labels)
    order = np.argsort(-scores, kind="stable")
    s, y = scores[order], labels[order]
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos

    thresholds, tpr, fpr = [math.inf], [0.0], [0.0]
    tp = fp = 0
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[j + 1] == s[i]:
            j += 1
        tp += int(y[i:j + 1].sum())
        fp += (j + 1 - i) - int(y[i:j + 1].sum())
        thresholds.append(s[i])
        tpr.append(tp / n_pos)
        fpr.append(fp / n_neg)
        i = j + 1
    return RocCurve(thresholds=np.array(thresholds), fpr=np.array(fpr),
                    tpr=np.array(tpr))


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def roc_auc(curve: RocCurve) -> float:
    """Trapezoidal area under the ROC curve."""
    return float(_trapezoid(curve.tpr, curve.fpr))


def stratified_kfold(labels, plan: CvPlan) -> list[np.ndarray]:
    """Disjoint index folds covering all samples; per-fold class counts are
    within 1 of proportional allocation. Deterministic given the seed."""
    labels = np.asarray(labels, dtype=np.int64)
    rng = np.random.default_rng(np.random.SeedSequence([plan.seed, 7]))
    folds: list[list[int]] = [[] for _ in range(plan.k_folds)]
    if plan.stratified:
        counts = np.bincount(labels, minlength=2)
        if counts.min() < plan.k_folds:
            raise DataError(
                f"k_folds={plan.k_folds} exceeds minority class count {counts.min()}"
            )
        for cls in np.unique(labels):
            idx = rng.permutation(np.flatnonzero(labels == cls))
            for pos, sample in enumerate(idx):
                folds[pos % plan.k_folds].append(int(sample))
    else:
        idx = rng.permutation(len(labels))
        for pos, sample in enumerate(idx):
            folds[pos % plan.k_folds].append(int(sample))
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def _fit_and_score(spec, x_train, y_train, x_test):
    if isinstance(spec, rpensemble.RpConfig):
        model = rpensemble.train(x_train, y_train, spec)
        return rpensemble.predict_scores(model, x_test)
    model = models.fit(spec, x_train, y_train)
    return models.predict_scores(model, x_test)


def describe_model(spec) -> str:
    if isinstance(spec, rpensemble.RpConfig):
        return f"rp_ensemble({spec.base_family})"
    return spec.family


def cross_validate(spec, data: LabeledDataset | tuple, plan: CvPlan,
                   data_descriptor: str = "data") -> EvalReport:
    """Per-fold fit/score/AUC for a ModelSpec or RpConfig.

    ``data`` is a LabeledDataset or a plain ``(x, y)`` pair. Any transductive
    preprocessing (t-SNE) is assumed already applied to the features.
    """
    if isinstance(data, LabeledDataset):
        x, y = data.features.values, data.labels
    else:
        x, y = data
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    folds = stratified_kfold(y, plan)
    report = EvalReport()
    name = describe_model(spec)
    for fold_idx, test_idx in enumerate(folds):
        train_mask = np.ones(len(y), dtype=bool)
        train_mask[test_idx] = False
        scores = _fit_and_score(spec, x[train_mask], y[train_mask], x[test_idx])
        report.rows.append(EvalRow(
            model=name,
            data=data_descriptor,
            fold=fold_idx,
            auc=auc(scores, y[test_idx]),
            n_test=len(test_idx),
        ))
    return report
