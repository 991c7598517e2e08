"""Batch command-line interface.

Subcommands: synth, merge, normalize, label, project, train, cv, search,
report, km. Exit codes: 0 success, 2 config error, 3 data error, 4 runtime
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import (dataio, evaluation, models, normalize, pipeline, project,
               rpensemble, search, survival, synth)
from .errors import ConfigError, DataError, OmicsurvError


def _parse_kv(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {pair!r}")
        out[key] = _coerce(value)
    return out


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text in ("true", "false"):
        return text == "true"
    return text


def _default_workers() -> int:
    return int(os.environ.get(pipeline.WORKERS_ENV_VAR, "1"))


def _cmd_synth(args) -> int:
    config = synth.SynthConfig(
        n_patients=args.n_patients,
        n_genes=args.n_genes,
        n_informative_genes=args.n_informative,
        seed=args.seed,
        censoring_fraction_target=args.censoring,
    )
    latent = synth.gen_latent(config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataio.save_expression(synth.gen_microarray(config, latent), out / "microarray.csv")
    dataio.save_expression(synth.gen_rnaseq(config, latent), out / "rnaseq.csv")
    dataio.save_cna(synth.gen_cna(config, latent), out / "cna.csv")
    records, truth = synth.gen_clinical(config, latent)
    dataio.save_clinical(records, out / "clinical.csv")
    with open(out / "truth.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["patient_id", "true_death_time", "true_risk"])
        for pid, death, risk in zip(truth.patient_ids, truth.death_times, truth.risk):
            writer.writerow([pid, repr(float(death)), repr(float(risk))])
    print(f"wrote synthetic cohort to {out}")
    return 0


def _cmd_merge(args) -> int:
    sources = [dataio.load_expression(p, platform_id=p) for p in args.inputs]
    merged, report = dataio.merge(sources)
    dataio.save_expression(merged, args.output)
    print(f"merged {report.union_patient_count} patients x "
          f"{report.intersection_gene_count} genes; "
          f"{len(report.resolutions)} duplicate patients resolved")
    return 0


def _cmd_normalize(args) -> int:
    scale = "linear" if args.log2 else "log2"
    target = dataio.load_expression(args.target, platform_id="target", scale=scale)
    reference = dataio.load_expression(args.reference, platform_id="reference",
                                       scale=scale)
    if args.log2:
        target = normalize.log2_transform(target)
        reference = normalize.log2_transform(reference)
    dataio.save_expression(normalize.fsqn(target, reference), args.output)
    return 0


def _cmd_label(args) -> int:
    records = dataio.load_clinical(args.clinical)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["patient_id", "label"])
        for record in records:
            label = survival.make_label(record, args.t)
            if label is survival.SurvivalLabel.DROPPED:
                continue
            writer.writerow([record.patient_id, label.value])
    return 0


def _cmd_km(args) -> int:
    records = dataio.load_clinical(args.clinical)
    curves = survival.kaplan_meier(records, group_by=args.group_by)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "time", "survival", "at_risk"])
        for curve in curves:
            for t, s, r in zip(curve.event_times, curve.survival_probabilities,
                               curve.at_risk_counts):
                writer.writerow([curve.group_label or "", repr(float(t)),
                                 repr(float(s)), int(r)])
    return 0


def _cmd_project(args) -> int:
    features = dataio.load_features(args.features)
    config = project.TsneConfig(
        output_dims=args.dims,
        perplexity=args.perplexity,
        iterations=args.iterations,
        seed=args.seed,
    )
    if args.append_age:
        if not args.clinical:
            raise ConfigError("--append-age requires --clinical")
        clinical = dataio.load_clinical(args.clinical)
        out = project.project_with_age(features, clinical, config)
    else:
        embedding = project.tsne(features, config)
        out = dataio.FeatureMatrix(
            patient_ids=embedding.patient_ids,
            feature_names=[f"tsne_{k}" for k in range(args.dims)],
            values=embedding.coords,
        )
    dataio.save_expression(out, args.output)
    return 0


def _load_xy(features_path, labels_path):
    features = dataio.load_features(features_path)
    labels_by_id = {}
    with open(labels_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["patient_id", "label"]:
            raise DataError(f"{labels_path}: expected header patient_id,label")
        for row in reader:
            if row:
                labels_by_id[row[0]] = int(row[1])
    keep = [i for i, pid in enumerate(features.patient_ids) if pid in labels_by_id]
    if not keep:
        raise DataError("no overlap between features and labels")
    x = features.values[np.array(keep)]
    y = np.array([labels_by_id[features.patient_ids[i]] for i in keep])
    return x, y


def _cmd_train(args) -> int:
    x, y = _load_xy(args.features, args.labels)
    params = _parse_kv(args.param)
    if args.family == "rp_ensemble":
        config = rpensemble.RpConfig(
            b1_groups=args.b1, b2_per_group=args.b2, projected_dim=args.d,
            base_family=args.base, seed=args.seed,
        )
        model = rpensemble.train(x, y, config)
        if args.importance:
            features = dataio.load_features(args.features)
            order = np.argsort(-model.feature_importance)
            with open(args.importance, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["feature", "importance"])
                for j in order:
                    writer.writerow([features.feature_names[j],
                                     repr(float(model.feature_importance[j]))])
        print(f"trained rp_ensemble; vote threshold alpha={model.alpha}")
        return 0
    spec = models.ModelSpec(family=args.family, hyperparameters=params,
                            seed=args.seed)
    model = models.fit(spec, x, y)
    models.save_model(model, args.model_out)
    print(f"saved {args.family} model to {args.model_out}")
    return 0


def _cmd_cv(args) -> int:
    x, y = _load_xy(args.features, args.labels)
    spec = models.ModelSpec(family=args.family,
                            hyperparameters=_parse_kv(args.param), seed=args.seed)
    plan = evaluation.CvPlan(k_folds=args.k, stratified=True, seed=args.seed)
    report = evaluation.cross_validate(spec, (x, y), plan,
                                       data_descriptor=args.features)
    report.to_csv(args.output)
    for key, (mean, std) in report.aggregates().items():
        print(f"{key[0]}: mean AUC {mean:.4f} +- {std:.4f}")
    return 0


def _cmd_search(args) -> int:
    x, y = _load_xy(args.features, args.labels)
    params = {}
    for pair in args.param or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {pair!r}")
        params[key] = (search.parse_distribution(value)
                       if ":" in value else _coerce(value))
    space = search.SearchSpace(family=args.family, params=params)
    plan = evaluation.CvPlan(k_folds=args.k, stratified=True, seed=args.seed)
    best, trials = search.random_search(space, x, y, plan, args.budget,
                                        args.seed, worker_count=args.workers)
    print(f"best trial {best.index}: mean AUC {best.mean_auc:.4f} "
          f"params {json.dumps(best.params, sort_keys=True)}")
    if args.output:
        with open(args.output, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["trial", "mean_auc", "params"])
            for t in trials:
                writer.writerow([t.index, repr(t.mean_auc),
                                 json.dumps(t.params, sort_keys=True)])
    return 0


def _cmd_report(args) -> int:
    overrides = {}
    for pair in args.override or []:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {pair!r}")
        overrides[key] = _coerce(value)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.output is not None:
        overrides["output"] = args.output
    config = pipeline.load_config(args.config, overrides)
    result = pipeline.run_experiment(config)
    print(f"report written to {result['report_path']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omicsurv")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    p.add_argument("--n-patients", type=int, default=400)
    p.add_argument("--n-genes", type=int, default=100)
    p.add_argument("--n-informative", type=int, default=5)
    p.add_argument("--censoring", type=float, default=0.446)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("merge", help="merge expression matrices")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_merge)

    p = sub.add_parser("normalize", help="FSQN a target onto a reference")
    p.add_argument("--target", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--log2", action="store_true",
                   help="log2(v+1)-transform both matrices before FSQN")
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("label", help="censoring-aware horizon labels")
    p.add_argument("--clinical", required=True)
    p.add_argument("--t", type=float, required=True, help="horizon in months")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("km", help="Kaplan-Meier curves")
    p.add_argument("--clinical", required=True)
    p.add_argument("--group-by", action="store_true")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_km)

    p = sub.add_parser("project", help="t-SNE projection")
    p.add_argument("--features", required=True)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--perplexity", type=float, default=30.0)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--append-age", action="store_true")
    p.add_argument("--clinical")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("train", help="train one model")
    p.add_argument("--family", required=True,
                   choices=list(models.FAMILIES) + ["rp_ensemble"])
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", default="model.json")
    p.add_argument("--b1", type=int, default=100, help="rp_ensemble groups")
    p.add_argument("--b2", type=int, default=20, help="projections per group")
    p.add_argument("--d", type=int, default=5, help="projected dimension")
    p.add_argument("--base", default="gaussian_nb", help="rp_ensemble base family")
    p.add_argument("--importance", help="write feature importances CSV here")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("cv", help="cross-validate one model")
    p.add_argument("--family", required=True, choices=models.FAMILIES)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default="cv_report.csv")
    p.set_defaults(func=_cmd_cv)

    p = sub.add_parser("search", help="seeded random hyperparameter search")
    p.add_argument("--family", required=True,
                   choices=list(models.FAMILIES) + ["rp_ensemble"])
    p.add_argument("--param", action="append", metavar="KEY=SPEC",
                   help="fixed value or distribution, e.g. C=loguniform:0.01,100")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--budget", type=int, default=10)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=_default_workers())
    p.add_argument("--output")
    p.set_defaults(func=_cmd_search)

    p = sub.add_parser("report", help="run a full experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--output")
    p.add_argument("--override", action="append", metavar="KEY=VALUE",
                   help="override any config key, e.g. cv.k_folds=5")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (OmicsurvError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
