# main.py

import json
import logging
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
import pandas as pd
import yaml

from assumptions.checks import (
    kernel_feature_check, oracle_equivalence_check, reduction_limits_check,
)
from bound import BoundInputs, bound_terms, per_output_bounds
from config import (
    KKT_TOL, LEARNERS, N_FOLDS, NOISE_DBW, RANGE_KEYS, SYNTHETIC_ROWS, UCI_DATASETS,
    config_hash, parse_value_or_range, resolve_run_config,
)
from data_loader import (
    TASKS, apply_l1_scale, drop_privileged, fit_l1_scale, load_csv, load_features,
    make_folds, make_synthetic_lupi, normalize_l1, split_privileged,
)
from enhancement import ACTIVATIONS, apply
from errors import ConfigError, DataError, RvflError
from experiments import (
    LearnerConfig, SearchSpace, ValidationSpec, fit_learner, format_table,
    predict_learner, random_search, reports_to_frame, run_cv, run_noise_experiment,
    run_trials, select_activation, sensitivity_grid, trial_seeds,
)
from model_io import load_model, save_model, write_atomic
from plotting import plot_activation_comparison, plot_report_comparison, plot_sensitivity_grid
from prediction import metrics, predict_labels

logger = logging.getLogger(__name__)


# ============================================================
# 1) Click plumbing: exit codes and parameter types
# ============================================================

class ExitCodeGroup(click.Group):
    """
    Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.

    Click reports usage errors with status 2; they are remapped to 1 so
    that 2 always means a data error. A command may return an int status.
    """

    def main(self, *args, **kwargs):
        kwargs["standalone_mode"] = False
        try:
            rv = super().main(*args, **kwargs)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        except click.UsageError as exc:
            exc.show()
            sys.exit(1)
        except click.ClickException as exc:
            exc.show()
            sys.exit(exc.exit_code)
        except RvflError as exc:
            click.echo(f"Error: {exc}", err=True)
            sys.exit(exc.exit_code)
        sys.exit(rv if isinstance(rv, int) else 0)


class ValueOrRange(click.ParamType):
    name = "value|lo:hi"

    def convert(self, value, param, ctx):
        try:
            return parse_value_or_range(value)
        except ConfigError as exc:
            self.fail(str(exc), param, ctx)


class GridAxis(click.ParamType):
    """NAME=v1,v2,... for sensitivity sweeps."""
    name = "name=v1,v2,..."

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        name, sep, values = str(value).partition("=")
        if not sep or name not in RANGE_KEYS:
            self.fail(f"expected one of {RANGE_KEYS} followed by =v1,v2,..., got {value!r}",
                      param, ctx)
        try:
            grid = [float(v) for v in values.split(",") if v.strip()]
        except ValueError:
            self.fail(f"non-numeric grid value in {value!r}", param, ctx)
        if not grid:
            self.fail(f"empty grid in {value!r}", param, ctx)
        return name, grid


VALUE_OR_RANGE = ValueOrRange()
GRID_AXIS = GridAxis()


def _apply_options(options, f):
    for option in reversed(options):
        f = option(f)
    return f


def data_options(f):
    return _apply_options([
        click.option("--task", type=click.Choice(TASKS), default=None),
        click.option("--label-column", default=None,
                     help="Label column name or zero-based index (default: last)."),
        click.option("--no-header", is_flag=True, help="CSV has no header row."),
        click.option("--normal-count", type=click.IntRange(min=1), default=None,
                     help="Leading feature columns kept as normal features."),
        click.option("--joint-normalization", is_flag=True,
                     help="Fit L1 scales on all rows instead of training folds."),
    ], f)


def learner_options(f):
    return _apply_options([
        click.option("--learner", type=click.Choice(LEARNERS), default=None),
        click.option("--C", "C", type=VALUE_OR_RANGE, default=None),
        click.option("--gamma", type=VALUE_OR_RANGE, default=None),
        click.option("--u", "u", type=VALUE_OR_RANGE, default=None),
        click.option("--tau", type=VALUE_OR_RANGE, default=None),
        click.option("--P", "P", type=click.IntRange(min=0), default=None),
        click.option("--activation", type=click.Choice(list(ACTIVATIONS)), default=None),
        click.option("--kernel", type=click.Choice(["gaussian", "polynomial", "none"]),
                     default=None),
        click.option("--seed", type=int, default=None),
    ], f)


# ============================================================
# 2) Shared helpers
# ============================================================

def _resolve(ctx, params, **extra):
    overrides = {
        "learner": params.get("learner"),
        "C": params.get("C"),
        "gamma": params.get("gamma"),
        "u": params.get("u"),
        "tau": params.get("tau"),
        "P": params.get("P"),
        "activation": params.get("activation"),
        "kernel": params.get("kernel"),
        "seed": params.get("seed"),
        "task": params.get("task"),
        "label_column": params.get("label_column"),
        "normal_count": params.get("normal_count"),
        "header": False if params.get("no_header") else None,
        "joint_normalization": True if params.get("joint_normalization") else None,
    }
    for key in ("folds", "trials", "budget", "validation", "noise_dbw"):
        overrides[key] = params.get(key)
    overrides.update(extra)
    cfg = resolve_run_config(overrides, ctx.obj.get("config_path"))
    cfg["label_column"] = _label_column(cfg["label_column"])
    return cfg


def _label_column(value):
    if isinstance(value, str) and value.lstrip("-").isdigit():
        return int(value)
    return value


def _has_ranges(cfg):
    return any(isinstance(cfg[k], tuple) for k in RANGE_KEYS)


def _normalization(cfg):
    return "joint" if cfg["joint_normalization"] else "train"


def _first_set(*values):
    """First value that is not None; 0 counts as set."""
    return next((v for v in values if v is not None), None)


def _load_dataset(cfg, dataset, split=True):
    """
    Returns (Dataset, name, registry info). "synthetic" selects the
    built-in LUPI generator; any other value is a CSV path.
    """
    if dataset == "synthetic":
        data = make_synthetic_lupi(n_rows=SYNTHETIC_ROWS, task=cfg["task"], seed=cfg["seed"])
        return (data if split else drop_privileged(data)), "synthetic", {}

    name = Path(dataset).stem.lower()
    info = UCI_DATASETS.get(name, {})
    data = load_csv(dataset, label_column=cfg["label_column"], task=cfg["task"],
                    header=cfg["header"])
    if split:
        data = split_privileged(data, _first_set(cfg["normal_count"], info.get("normal")))
    return data, name, info


def _fold_count(cfg, info, n_rows):
    k = _first_set(cfg["folds"], info.get("folds"), N_FOLDS)
    k = int(k)
    if not 2 <= k <= n_rows:
        raise DataError(f"fold count {k} out of range for {n_rows} rows")
    return k


def _validation(cfg, k):
    return ValidationSpec(kind=cfg["validation"], k=k, seed=cfg["seed"])


def _search_space(cfg, open_keys=()):
    """
    Ranges stay ranges; fixed values collapse their dimension. Keys in
    `open_keys` fall back to the default search ranges.
    """
    dims = {}
    for key in ("C", "gamma", "tau"):
        if key in open_keys:
            continue
        v = cfg[key]
        dims[key] = v if isinstance(v, tuple) else (float(v), float(v))
    if "u" not in open_keys:
        dims["u"] = cfg["u"] if isinstance(cfg["u"], tuple) else [float(cfg["u"])]
    return SearchSpace(kind=cfg["learner"], activation=[cfg["activation"]],
                       P=int(cfg["P"]), budget=int(cfg["budget"]), **dims)


def _learner(cfg, data, k, name):
    """Fixed hyperparameters are used as given; ranges go through random search."""
    if not _has_ranges(cfg):
        return LearnerConfig.from_run_config(cfg)
    fixed = {key: (cfg[key][0] if isinstance(cfg[key], tuple) else cfg[key])
             for key in RANGE_KEYS}
    base = LearnerConfig.from_run_config({**cfg, **fixed})
    best, _ = random_search(data, _search_space(cfg), _validation(cfg, k),
                            seed=cfg["seed"], normalize=_normalization(cfg), base=base,
                            name=name)
    logger.info("search selected %s", best)
    return best


def _learner_configs(ctx, params, kinds):
    return [_resolve(ctx, params, learner=kind) for kind in kinds]


def _out_dir(out):
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _save_figure(plot_fn, path, *args, **kwargs):
    tmp = path.with_name(f".{path.stem}.tmp{path.suffix}")
    try:
        plot_fn(*args, save_path=tmp, **kwargs)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _emit(reports, out, stem):
    click.echo(format_table(reports))
    if out is None:
        return
    out = _out_dir(out)
    write_atomic(out / f"{stem}.csv", reports_to_frame(reports).to_csv(index=False))
    trials = pd.concat([r.to_frame().assign(learner=r.learner) for r in reports],
                       ignore_index=True)
    write_atomic(out / f"{stem}_trials.csv", trials.to_csv(index=False))


# ============================================================
# 3) Commands
# ============================================================

@click.group(cls=ExitCodeGroup)
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"],
                                               case_sensitive=False),
              default="WARNING", show_default=True)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="YAML run config (explicit flags take precedence).")
@click.pass_context
def cli(ctx, log_level, config_path):
    """RVFL, RVFL+ and KRVFL+ with learning using privileged information."""
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )
    ctx.obj = {"config_path": config_path}


@cli.command()
@click.argument("dataset")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@data_options
@learner_options
@click.pass_context
def train(ctx, dataset, out, **params):
    """Train one learner on DATASET and write model.json plus a report."""
    cfg = _resolve(ctx, params)
    if _has_ranges(cfg):
        raise ConfigError("train needs fixed hyperparameters; use `search` for ranges")

    data, name, _ = _load_dataset(cfg, dataset)
    scale = fit_l1_scale(data.x)
    scale_priv = None if data.x_priv is None else fit_l1_scale(data.x_priv)
    data = normalize_l1(data, scale=scale, scale_priv=scale_priv)

    start = time.perf_counter()
    learner = LearnerConfig.from_run_config(cfg)
    model = fit_learner(learner, data)
    raw = predict_learner(model, data.x)
    elapsed = time.perf_counter() - start
    train_metrics = metrics(predict_labels(raw, data.task), data)

    metadata = {
        "dataset": name,
        "task": data.task,
        "class_labels": data.class_labels,
        "normal_count": data.n_features,
        "n_attributes": data.n_features + data.n_privileged,
        "scale": scale.tolist(),
        "config": cfg,
        "config_hash": config_hash(cfg),
    }
    report = {
        "learner": learner.kind,
        "dataset": name,
        "train": train_metrics,
        "time_s": elapsed,
        "config": cfg,
        "config_hash": config_hash(cfg),
    }

    out = _out_dir(out)
    save_model(out / "model.json", model, metadata)
    write_atomic(out / "train_report.json",
                 json.dumps(report, indent=2, sort_keys=True, default=str))

    for key, value in train_metrics.items():
        click.echo(f"{learner.kind} on {name}: train {key} = {value:.4f}")
    click.echo(f"config: {json.dumps(cfg, sort_keys=True, default=str)}")


@cli.command()
@click.argument("model_path")
@click.argument("features")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Predictions CSV.")
@click.option("--no-header", is_flag=True, help="Feature CSV has no header row.")
def predict(model_path, features, out, no_header):
    """
    Predict with a saved model from a CSV of normal features. Rows with
    the full attribute count have their privileged columns dropped.
    """
    model, meta = load_model(model_path)
    x = load_features(features, header=not no_header)
    n, total = meta["normal_count"], meta["n_attributes"]
    if x.shape[1] == total and total != n:
        x = x[:, :n]
    elif x.shape[1] != n:
        raise DataError(f"model expects {n} normal feature columns, got {x.shape[1]}")

    raw = predict_learner(model, apply_l1_scale(x, np.asarray(meta["scale"], dtype=float)))
    pred = predict_labels(raw, meta["task"])

    frame = pd.DataFrame(pred.raw, columns=[f"raw_{j}" for j in range(pred.raw.shape[1])])
    labels = meta.get("class_labels")
    if pred.task == "multiclass":
        frame.insert(0, "label", [labels[i] for i in pred.decided] if labels else pred.decided)
    elif pred.task == "binary":
        frame.insert(0, "label", [labels[int(v > 0)] for v in pred.decided]
                     if labels else pred.decided)

    Path(out).parent.mkdir(parents=True, exist_ok=True)
    write_atomic(out, frame.to_csv(index=False))
    click.echo(f"wrote {len(frame)} predictions to {out}")


@cli.command()
@click.argument("dataset")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--folds", type=int, default=None)
@data_options
@learner_options
@click.pass_context
def cv(ctx, dataset, out, folds, **params):
    """k-fold cross-validation of one learner."""
    cfg = _resolve(ctx, params, folds=folds)
    data, name, info = _load_dataset(cfg, dataset)
    k = _fold_count(cfg, info, data.n_rows)
    learner = _learner(cfg, data, k, name)
    report = run_cv(data, learner, make_folds(data.n_rows, k, cfg["seed"]),
                    normalize=_normalization(cfg), name=name)
    _emit([report], out, "cv")


@cli.command()
@click.argument("dataset")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--budget", type=click.IntRange(min=1), default=None)
@click.option("--validation", type=click.Choice(["cv", "holdout"]), default=None)
@click.option("--folds", type=int, default=None)
@click.option("--select-activation", "pick_activation", is_flag=True,
              help="Also compare the five activations at the best configuration.")
@data_options
@learner_options
@click.pass_context
def search(ctx, dataset, out, budget, validation, folds, pick_activation, **params):
    """Random hyperparameter search; unset hyperparameters use the default ranges."""
    cfg = _resolve(ctx, params, budget=budget, validation=validation, folds=folds)
    data, name, info = _load_dataset(cfg, dataset)
    k = _fold_count(cfg, info, data.n_rows)
    open_keys = [key for key in RANGE_KEYS if params.get(key) is None]
    val = _validation(cfg, k)

    fixed = {key: (cfg[key][0] if isinstance(cfg[key], tuple) else cfg[key])
             for key in RANGE_KEYS}
    base = LearnerConfig.from_run_config({**cfg, **fixed})
    best, report = random_search(data, _search_space(cfg, open_keys), val,
                                 seed=cfg["seed"], normalize=_normalization(cfg),
                                 base=base, name=name)

    scores = None
    if pick_activation:
        activation, scores = select_activation(data, best, val,
                                               normalize=_normalization(cfg))
        best = replace(best, activation=activation)

    best_cfg = best.as_dict()
    best_cfg["learner"] = best_cfg.pop("kind")
    click.echo(report.to_frame().to_string(index=False))
    click.echo(f"best: {json.dumps(best_cfg, sort_keys=True)}")
    if scores is not None:
        click.echo(scores.to_string(index=False))

    if out is not None:
        out_path = _out_dir(out)
        write_atomic(out_path / "search.csv", report.to_frame().to_csv(index=False))
        write_atomic(out_path / "best_config.yaml", yaml.safe_dump(best_cfg, sort_keys=True))
        if scores is not None:
            write_atomic(out_path / "activations.csv", scores.to_csv(index=False))
            _save_figure(plot_activation_comparison, out_path / "activations.png", scores,
                         metric=report.metric)


def _run_noise(ctx, params, dataset, power, kinds, trials):
    cfgs = _learner_configs(ctx, params, kinds)
    cfg = cfgs[0]
    if _has_ranges(cfg):
        raise ConfigError("noise experiments need fixed hyperparameters")
    data, name, info = _load_dataset(cfg, dataset, split=False)
    k = _fold_count(cfg, info, data.n_rows)
    power = _first_set(power, cfg["noise_dbw"], NOISE_DBW)
    learners = [LearnerConfig.from_run_config(c) for c in cfgs]
    seeds = trial_seeds(cfg["seed"], trials or cfg["trials"])
    reports = run_noise_experiment(data, power, learners, seeds, k=k,
                                   normalize=_normalization(cfg), name=name)
    return list(reports.values())


@cli.command()
@click.argument("dataset")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--power", "power", type=float, default=None,
              help=f"Noise power in dBW (default {NOISE_DBW:g}).")
@click.option("--learners", "kinds", multiple=True, type=click.Choice(LEARNERS),
              default=("rvfl-ridge", "rvfl-plus"), show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=None)
@click.option("--folds", type=int, default=None)
@data_options
@learner_options
@click.pass_context
def noise(ctx, dataset, out, power, kinds, trials, folds, **params):
    """Noisy normal features, clean features as privileged information."""
    params["folds"] = folds
    reports = _run_noise(ctx, {**params}, dataset, power, kinds, trials)
    _emit(reports, out, "noise")


@cli.command()
@click.argument("dataset", default="synthetic")
@click.option("--out", type=click.Path(file_okay=False), default=None)
@click.option("--learners", "kinds", multiple=True, type=click.Choice(LEARNERS),
              default=("rvfl-ridge", "rvfl-plus"), show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=None)
@click.option("--folds", type=int, default=None)
@click.option("--noise-dbw", type=float, default=None,
              help="Run the noise protocol at this power instead of plain CV.")
@data_options
@learner_options
@click.pass_context
def bench(ctx, dataset, out, kinds, trials, folds, noise_dbw, **params):
    """Replicated trials per learner (mean ± std table, CSV, figure)."""
    cfg0 = _resolve(ctx, params, folds=folds, noise_dbw=noise_dbw)
    if cfg0["noise_dbw"] is not None:
        reports = _run_noise(ctx, {**params, "folds": folds}, dataset, cfg0["noise_dbw"],
                             kinds, trials)
    else:
        reports = []
        for cfg in _learner_configs(ctx, {**params, "folds": folds}, kinds):
            data, name, info = _load_dataset(cfg, dataset)
            k = _fold_count(cfg, info, data.n_rows)
            learner = _learner(cfg, data, k, name)
            seeds = trial_seeds(cfg["seed"], trials or cfg["trials"])
            reports.append(run_trials(data, learner, seeds, k=k,
                                      normalize=_normalization(cfg), name=name))

    _emit(reports, out, "bench")
    if out is not None:
        _save_figure(plot_report_comparison, Path(out) / "bench.png", reports)


@cli.command()
@click.option("--instances", "n_instances", type=click.IntRange(min=1), default=100,
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--tol", type=float, default=KKT_TOL, show_default=True)
@click.option("--flip-sign", is_flag=True,
              help="Debug: train with the flipped right-hand side (expected to fail).")
@click.option("--full", is_flag=True, help="Also run the kernel and reduction checks.")
def verify(n_instances, seed, tol, flip_sign, full):
    """Closed-form RVFL+ against the KKT oracle on random small instances."""
    res = oracle_equivalence_check(n_instances, seed=seed, tol=tol, flip_sign=flip_sign)
    click.echo(f"instances: {res['n_instances']}")
    click.echo(f"max relative error: {res['max_rel_error']:.3e}")
    click.echo(f"max KKT residual: {res['max_kkt_residual']:.3e}")
    passed = res["passed"]

    if full:
        k = kernel_feature_check(seed=seed, tol=tol)
        r = reduction_limits_check(seed=seed)
        click.echo(f"kernel/feature max relative error: {k['max_rel_error']:.3e}")
        click.echo(f"reduction limits: a={r['zero_privileged_error']:.3e} "
                   f"b={r['large_gamma_error']:.3e} c={r['large_C_error']:.3e}")
        passed = passed and k["passed"] and r["passed"]

    click.echo("PASS" if passed else "FAIL")
    return 0 if passed else 3


@cli.command()
@click.option("--loss", "empirical_loss", type=float, default=0.0, show_default=True)
@click.option("--K", "K", type=float, default=1.0, show_default=True)
@click.option("--Z", "Z", type=float, default=1.0, show_default=True)
@click.option("--B", "B", type=float, default=1.0, show_default=True)
@click.option("--M", "M", type=int, default=None, help="Training sample count.")
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--model", "model_path", default=None,
              help="Measure Z, B, M and the loss from a saved RVFL-type model.")
@click.option("--dataset", default=None, help="Training CSV of the saved model.")
def bound(empirical_loss, K, Z, B, M, delta, model_path, dataset):
    """Generalization bound, every term printed separately."""
    if model_path is None:
        if M is None:
            raise ConfigError("--M is required unless --model is given")
        terms = bound_terms(BoundInputs(K=K, Z=Z, B=B, M=M, delta=delta,
                                        empirical_loss=empirical_loss))
        for key in ("empirical_loss", "complexity", "confidence", "loss_bound_c", "bound"):
            click.echo(f"{key}: {terms[key]:.6g}")
        click.echo("assumes bounded loss: yes")
        return 0

    if dataset is None:
        raise ConfigError("--dataset is required with --model")
    model, meta = load_model(model_path)
    if getattr(model, "layer", None) is None:
        raise ConfigError("measured bounds need an RVFL-type model with an enhancement layer")
    cfg = meta["config"]
    data = load_csv(dataset, label_column=cfg["label_column"], task=meta["task"],
                    header=cfg["header"])
    x = apply_l1_scale(data.x[:, :meta["normal_count"]], np.asarray(meta["scale"]))
    res = per_output_bounds(model, apply(model.layer, x), data.y, K=K, delta=delta)
    for row in res["per_output"]:
        click.echo(f"output {row['output']}: Z={row['Z']:.6g} B={row['B']:.6g} "
                   f"loss={row['empirical_loss']:.6g} complexity={row['complexity']:.6g} "
                   f"confidence={row['confidence']:.6g} bound={row['bound']:.6g}")
    click.echo(f"bound: {res['max_bound']:.6g}")
    return 0


@cli.command()
@click.argument("dataset")
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--x-axis", "axis_a", type=GRID_AXIS, default="C=0.01,1,100", show_default=True)
@click.option("--y-axis", "axis_b", type=GRID_AXIS, default="gamma=10,1000,100000",
              show_default=True)
@click.option("--validation", type=click.Choice(["cv", "holdout"]), default=None)
@click.option("--folds", type=int, default=None)
@data_options
@learner_options
@click.pass_context
def sweep(ctx, dataset, out, axis_a, axis_b, validation, folds, **params):
    """Validation metric over a two-parameter grid (CSV and heatmap)."""
    cfg = _resolve(ctx, params, validation=validation, folds=folds)
    if _has_ranges(cfg):
        raise ConfigError("sweep takes grids through --x-axis/--y-axis, not ranges")
    if axis_a[0] == axis_b[0]:
        raise ConfigError("sweep axes must name different parameters")
    data, name, info = _load_dataset(cfg, dataset)
    k = _fold_count(cfg, info, data.n_rows)
    table = sensitivity_grid(data, LearnerConfig.from_run_config(cfg), axis_a, axis_b,
                             _validation(cfg, k), normalize=_normalization(cfg))
    metric = "rmse" if data.task == "regression" else "accuracy"
    click.echo(table.to_string())

    out = _out_dir(out)
    write_atomic(out / "sweep.csv", table.to_csv())
    _save_figure(plot_sensitivity_grid, out / "sweep.png", table, metric=metric,
                 title=f"{cfg['learner']} on {name}")


if __name__ == "__main__":
    cli()
