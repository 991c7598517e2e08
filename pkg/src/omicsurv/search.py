"""Seeded random hyperparameter search over declarative distributions.

Each trial's hyperparameters derive deterministically from (seed, trial
index), so results are identical for any worker count or scheduling order.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import evaluation, models, rpensemble
from .errors import ConfigError


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def sample(self, rng):
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class LogUniform:
    low: float
    high: float

    def __post_init__(self):
        if self.low <= 0 or self.high <= self.low:
            raise ConfigError("loguniform needs 0 < low < high")

    def sample(self, rng):
        return float(np.exp(rng.uniform(np.log(self.low), np.log(self.high))))


@dataclass(frozen=True)
class IntUniform:
    low: int
    high: int  # inclusive

    def sample(self, rng):
        return int(rng.integers(self.low, self.high + 1))


@dataclass(frozen=True)
class Categorical:
    choices: tuple

    def sample(self, rng):
        return self.choices[int(rng.integers(len(self.choices)))]


def parse_distribution(text: str):
    """Parse a CLI distribution spec like ``uniform:0.1,10`` or ``cat:a,b``."""
    kind, _, args = text.partition(":")
    parts = [a.strip() for a in args.split(",")] if args else []
    try:
        if kind == "uniform":
            return Uniform(float(parts[0]), float(parts[1]))
        if kind == "loguniform":
            return LogUniform(float(parts[0]), float(parts[1]))
        if kind == "int":
            return IntUniform(int(parts[0]), int(parts[1]))
        if kind == "cat":
            return Categorical(tuple(_coerce(p) for p in parts))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed distribution spec {text!r}") from exc
    raise ConfigError(f"unknown distribution kind {kind!r}")


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


@dataclass(frozen=True)
class SearchSpace:
    """A model family plus fixed values and/or distributions per parameter."""

    family: str  # a models.FAMILIES entry or "rp_ensemble"
    params: dict = field(default_factory=dict)

    def sample(self, seed: int, trial_index: int):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial_index]))
        sampled = {}
        for name in sorted(self.params):
            value = self.params[name]
            sampled[name] = value.sample(rng) if hasattr(value, "sample") else value
        model_seed = int(
            np.random.SeedSequence([seed, trial_index, 1]).generate_state(1)[0]
        )
        if self.family == "rp_ensemble":
            return rpensemble.RpConfig(seed=model_seed, **sampled)
        return models.ModelSpec(family=self.family, hyperparameters=sampled,
                                seed=model_seed)


@dataclass
class TrialRecord:
    index: int
    params: dict
    fold_aucs: list[float]
    mean_auc: float
    wall_time: float


def _run_trial(space: SearchSpace, x, y, plan, seed: int, index: int) -> TrialRecord:
    start = time.perf_counter()
    spec = space.sample(seed, index)
    report = evaluation.cross_validate(spec, (x, y), plan)
    aucs = [row.auc for row in report.rows]
    if isinstance(spec, rpensemble.RpConfig):
        params = {k: getattr(spec, k) for k in
                  ("b1_groups", "b2_per_group", "projected_dim", "base_family")}
    else:
        params = dict(spec.hyperparameters)
    return TrialRecord(
        index=index,
        params=params,
        fold_aucs=aucs,
        mean_auc=float(np.mean(aucs)),
        wall_time=time.perf_counter() - start,
    )


def random_search(space: SearchSpace, x, y, plan: evaluation.CvPlan,
                  budget: int, seed: int,
                  worker_count: int = 1) -> tuple[TrialRecord, list[TrialRecord]]:
    """Evaluate ``budget`` sampled configurations; return (best, all trials).

    The best trial maximizes mean fold AUC, ties broken by lower index.
    """
    if budget < 1:
        raise ConfigError("search budget must be >= 1")
    if worker_count < 1:
        raise ConfigError("worker_count must be >= 1")

    failures: list[tuple[int, Exception]] = []
    trials: list[TrialRecord] = []
    if worker_count == 1:
        for i in range(budget):
            try:
                trials.append(_run_trial(space, x, y, plan, seed, i))
            except Exception as exc:  # noqa: BLE001 - aggregated below
                failures.append((i, exc))
    else:
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            futures = {
                i: pool.submit(_run_trial, space, x, y, plan, seed, i)
                for i in range(budget)
            }
            for i in range(budget):
                try:
                    trials.append(futures[i].result())
                except Exception as exc:  # noqa: BLE001
                    failures.append((i, exc))

    if not trials:
        details = "; ".join(f"trial {i}: {exc}" for i, exc in failures)
        raise ConfigError(f"all {budget} search trials failed: {details}")
    trials.sort(key=lambda t: t.index)
    best = max(trials, key=lambda t: (t.mean_auc, -t.index))
    return best, trials
