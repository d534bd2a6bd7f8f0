# experiments.py

import itertools
import logging
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import pandas as pd

from config import (
    ACTIVATION, C_RANGE, C_REG, GAMMA, GAMMA_RANGE, HOLDOUT_FRACTION, KRVFL_GAMMA,
    LEARNERS, N_FOLDS, N_NODES, SEARCH_BUDGET, TAU, TAU_RANGE, U_GRID, U_SCALE,
    config_hash,
)
from data_loader import (
    add_white_noise, apply_l1_scale, drop_privileged, fit_l1_scale, make_folds,
    make_holdout, normalize_l1, take_rows,
)
from enhancement import ACTIVATIONS
from errors import ConfigError, DataError
from krvfl import KernelSpec, KrvflPlusModel, predict_krvfl_plus, train_krvfl_plus
from prediction import metrics, predict_labels
from rvfl import RvflModel, RvflPlusModel, fit_rvfl, fit_rvfl_plus, predict_rvfl

logger = logging.getLogger(__name__)

NORMALIZATION = ("train", "joint", "none")


# ============================================================
# 1) Learner configuration and dispatch
# ============================================================

@dataclass(frozen=True)
class LearnerConfig:
    kind: str = "rvfl-plus"
    C: float = C_REG
    gamma: float = GAMMA
    u: float = U_SCALE
    P: int = N_NODES
    activation: str = ACTIVATION
    tau: float = TAU
    kernel: str = "gaussian"
    degree: int = 2
    coef: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in LEARNERS:
            raise ConfigError(f"unknown learner {self.kind!r}; expected one of {LEARNERS}")

    @property
    def uses_privileged(self):
        return self.kind in ("rvfl-plus", "krvfl-plus")

    def kernel_spec(self):
        return KernelSpec(mercer=self.kernel, tau=self.tau, degree=self.degree, coef=self.coef)

    def as_dict(self):
        return asdict(self)

    @classmethod
    def from_run_config(cls, cfg):
        fields_ = {k: cfg[k] for k in ("C", "gamma", "u", "P", "activation", "tau",
                                       "kernel", "degree", "coef", "seed") if k in cfg}
        fields_["P"] = int(fields_.get("P", N_NODES))
        return cls(kind=cfg["learner"], **fields_)


def fit_learner(config, train):
    """
    Train `config` on a Dataset. This is the only place privileged
    features are read.
    """
    if config.uses_privileged and train.x_priv is None:
        raise DataError(f"{config.kind} needs privileged features; dataset has none")

    if config.kind == "rvfl-pinv":
        return fit_rvfl(train.x, train.y, "pinv", P=config.P, activation=config.activation,
                        u=config.u, seed=config.seed)
    if config.kind == "rvfl-ridge":
        return fit_rvfl(train.x, train.y, "ridge", C=config.C, P=config.P,
                        activation=config.activation, u=config.u, seed=config.seed)
    if config.kind == "rvfl-plus":
        model, diag = fit_rvfl_plus(train.x, train.x_priv, train.y, C=config.C,
                                    gamma=config.gamma, P=config.P,
                                    activation=config.activation, u=config.u,
                                    seed=config.seed)
        logger.debug("rvfl-plus KKT residual %.2e", diag.kkt_residual)
        return model
    spec = config.kernel_spec()
    return train_krvfl_plus(train.x, train.x_priv, train.y, spec, spec,
                            C=config.C, gamma=config.gamma)


def predict_learner(model, x):
    """Raw outputs from normal features only."""
    if isinstance(model, (RvflModel, RvflPlusModel)):
        return predict_rvfl(model, x)
    if isinstance(model, KrvflPlusModel):
        return predict_krvfl_plus(model, x)
    raise ConfigError(f"not a trained model: {type(model).__name__}")


def metric_name(task):
    return "rmse" if task == "regression" else "accuracy"


def is_better(task, a, b):
    """Strict improvement of a over b."""
    return a < b if task == "regression" else a > b


def prepare_split(train, test, normalize="train"):
    """Fit L1 scales on the training rows and apply them to both sides."""
    if normalize not in NORMALIZATION:
        raise ConfigError(f"normalize must be one of {NORMALIZATION}, got {normalize!r}")
    if normalize != "train":
        return train, test

    scale = fit_l1_scale(train.x)
    scale_priv = None if train.x_priv is None else fit_l1_scale(train.x_priv)
    train = normalize_l1(train, scale=scale, scale_priv=scale_priv)
    test = replace(test, x=apply_l1_scale(test.x, scale))
    return train, test


def evaluate_split(config, train, test, normalize="train"):
    train, test = prepare_split(train, drop_privileged(test), normalize)
    start = time.perf_counter()
    model = fit_learner(config, train)
    raw = predict_learner(model, test.x)
    elapsed = time.perf_counter() - start
    value = metrics(predict_labels(raw, test.task), test)[metric_name(test.task)]
    return value, elapsed


# ============================================================
# 2) Reports
# ============================================================

@dataclass
class RunReport:
    """
    Per-trial metrics of one learner on one dataset.

    Trials are only ever appended; mean and std are computed from exactly
    the listed trials. Wall time is recorded but never used for decisions.
    """
    learner: str
    dataset: str
    metric: str
    config: dict
    trials: list = field(default_factory=list)
    seeds: list = field(default_factory=list)
    noise_dbw: float = None

    def add_trial(self, **row):
        self.trials.append(row)
        if "seed" in row and row["seed"] not in self.seeds:
            self.seeds.append(row["seed"])

    @property
    def values(self):
        return [t["metric"] for t in self.trials]

    @property
    def mean(self):
        return float(np.mean(self.values)) if self.trials else float("nan")

    @property
    def std(self):
        return float(np.std(self.values)) if self.trials else float("nan")

    @property
    def wall_time_s(self):
        return float(sum(t.get("time_s", 0.0) for t in self.trials))

    def summary(self):
        row = {
            "learner": self.learner,
            "dataset": self.dataset,
            "metric": self.metric,
            "mean": self.mean,
            "std": self.std,
            "time_s": self.wall_time_s,
            "seed": self.seeds[0] if self.seeds else self.config.get("seed"),
            "config_hash": config_hash(self.config),
        }
        if self.noise_dbw is not None:
            row["noise_dbw"] = self.noise_dbw
        return row

    def to_frame(self):
        return pd.DataFrame(self.trials)


def reports_to_frame(reports):
    return pd.DataFrame([r.summary() for r in reports])


def format_table(reports):
    """Human-readable table: learner, dataset, Acc./RMSE as mean +/- std, time."""
    rows = []
    for r in reports:
        label = "Acc." if r.metric == "accuracy" else "RMSE"
        prec = 2 if r.metric == "accuracy" else 4
        row = {
            "learner": r.learner,
            "dataset": r.dataset,
            label: f"{r.mean:.{prec}f} ± {r.std:.{prec}f}",
            "time (s)": f"{r.wall_time_s:.3f}",
        }
        if r.noise_dbw is not None:
            row["noise (dBW)"] = f"{r.noise_dbw:g}"
        rows.append(row)
    return pd.DataFrame(rows).fillna("").to_string(index=False)


# ============================================================
# 3) Cross-validation and replicated trials
# ============================================================

def run_cv(dataset, learner, folds, normalize="train", name="dataset"):
    """
    k-fold evaluation. Privileged features enter training folds only;
    each held-out fold is predicted from its normal features.
    """
    if len(folds.assignments) != dataset.n_rows:
        raise DataError(
            f"fold plan covers {len(folds.assignments)} rows, dataset has {dataset.n_rows}"
        )
    if normalize == "joint":
        dataset = normalize_l1(dataset)

    report = RunReport(learner=learner.kind, dataset=name,
                       metric=metric_name(dataset.task), config=learner.as_dict())
    for fold in range(folds.k):
        train_idx, test_idx = folds.split(fold)
        value, elapsed = evaluate_split(
            learner, take_rows(dataset, train_idx), take_rows(dataset, test_idx),
            normalize=normalize,
        )
        logger.info("%s fold %d/%d: %s=%.4f", learner.kind, fold + 1, folds.k,
                    report.metric, value)
        report.add_trial(trial=fold, seed=folds.seed, n_test=len(test_idx),
                         metric=value, time_s=elapsed)
    return report


def trial_seeds(master_seed, n_trials):
    """Independent per-trial seeds derived from (master_seed, trial_index)."""
    children = np.random.SeedSequence(master_seed).spawn(n_trials)
    return [int(c.generate_state(1)[0]) for c in children]


def run_trials(dataset, learner, seeds, k=N_FOLDS, normalize="train", name="dataset"):
    """One full k-fold CV per seed; the trial metric is the CV mean."""
    k = min(k, dataset.n_rows)
    report = RunReport(learner=learner.kind, dataset=name,
                       metric=metric_name(dataset.task), config=learner.as_dict())
    for i, seed in enumerate(seeds):
        cv = run_cv(dataset, replace(learner, seed=seed), make_folds(dataset.n_rows, k, seed),
                    normalize=normalize, name=name)
        report.add_trial(trial=i, seed=seed, metric=cv.mean, time_s=cv.wall_time_s)
    return report


def run_noise_experiment(dataset, power_dbw, learners, seeds, k=N_FOLDS,
                         normalize="train", name="dataset"):
    """
    Noisy normal features for train and test, clean training features as
    privileged information.

    Returns {label: RunReport}, one report per learner.
    """
    if dataset.x_priv is not None:
        raise DataError("noise experiment expects a dataset without a privileged split")

    k = min(k, dataset.n_rows)
    labels = []
    for cfg in learners:
        label = cfg.kind
        while label in labels:
            label += "'"
        labels.append(label)

    reports = {
        label: RunReport(learner=label, dataset=name, metric=metric_name(dataset.task),
                         config=cfg.as_dict(), noise_dbw=float(power_dbw))
        for label, cfg in zip(labels, learners)
    }

    for i, seed in enumerate(seeds):
        noisy = add_white_noise(dataset, power_dbw, seed)
        lupi = replace(noisy, x_priv=dataset.x)
        folds = make_folds(dataset.n_rows, k, seed)
        for label, cfg in zip(labels, learners):
            data = lupi if cfg.uses_privileged else drop_privileged(lupi)
            cv = run_cv(data, replace(cfg, seed=seed), folds, normalize=normalize, name=name)
            reports[label].add_trial(trial=i, seed=seed, metric=cv.mean,
                                     time_s=cv.wall_time_s)
    return reports


# ============================================================
# 4) Hyperparameter search
# ============================================================

@dataclass(frozen=True)
class ValidationSpec:
    kind: str = "cv"
    k: int = 5
    fraction: float = HOLDOUT_FRACTION
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("cv", "holdout"):
            raise ConfigError(f"validation must be 'cv' or 'holdout', got {self.kind!r}")


def evaluate_config(dataset, config, validation, normalize="train"):
    """Validation score of one configuration."""
    if validation.kind == "cv":
        folds = make_folds(dataset.n_rows, min(validation.k, dataset.n_rows), validation.seed)
        return run_cv(dataset, config, folds, normalize=normalize).mean
    if normalize == "joint":
        dataset = normalize_l1(dataset)
    train_idx, val_idx = make_holdout(dataset.n_rows, validation.fraction, validation.seed)
    value, _ = evaluate_split(config, take_rows(dataset, train_idx),
                              take_rows(dataset, val_idx), normalize=normalize)
    return value


@dataclass(frozen=True)
class SearchSpace:
    """
    Tuples (lo, hi) are log-uniform ranges, lists are discrete grids.
    A range with lo == hi fixes that dimension.
    """
    kind: str = "rvfl-plus"
    C: object = C_RANGE
    gamma: object = GAMMA_RANGE
    u: object = field(default_factory=lambda: list(U_GRID))
    tau: object = TAU_RANGE
    activation: object = field(default_factory=lambda: [ACTIVATION])
    P: int = N_NODES
    budget: int = SEARCH_BUDGET

    def __post_init__(self):
        if self.kind not in LEARNERS:
            raise ConfigError(f"unknown learner {self.kind!r}")
        if int(self.budget) < 1:
            raise ConfigError(f"search budget must be >= 1, got {self.budget}")
        for name in self.dimensions():
            dim = getattr(self, name)
            if isinstance(dim, list):
                if not dim:
                    raise ConfigError(f"empty search grid for {name}")
            elif name == "activation":
                raise ConfigError("activation must be given as a list")
            else:
                lo, hi = dim
                if not (0 < lo <= hi):
                    raise ConfigError(f"empty search range for {name}: {dim}")

    def dimensions(self):
        dims = []
        if self.kind != "rvfl-pinv":
            dims.append("C")
        if self.kind in ("rvfl-plus", "krvfl-plus"):
            dims.append("gamma")
        if self.kind == "krvfl-plus":
            dims.append("tau")
        else:
            dims += ["u", "activation"]
        return dims

    def is_discrete(self):
        return all(isinstance(getattr(self, d), list) for d in self.dimensions())


def _draw(dim, rng):
    if isinstance(dim, list):
        return dim[int(rng.integers(len(dim)))]
    lo, hi = dim
    if lo == hi:
        return float(lo)
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def draw_configs(space, seed=0):
    """
    Candidate draws. A fully discrete space whose grid fits in the budget
    is enumerated exhaustively; otherwise `budget` random draws.
    """
    dims = space.dimensions()
    if space.is_discrete():
        grid = list(itertools.product(*(getattr(space, d) for d in dims)))
        if len(grid) <= space.budget:
            return [dict(zip(dims, point)) for point in grid]

    rng = np.random.default_rng(seed)
    return [{d: _draw(getattr(space, d), rng) for d in dims} for _ in range(space.budget)]


def random_search(dataset, space, validation=None, seed=0, normalize="train",
                  base=None, name="dataset"):
    """
    Evaluate the drawn configurations on the validation spec and keep the
    best (max accuracy / min RMSE); ties go to the earliest draw.

    Returns (best LearnerConfig, RunReport over all draws).
    """
    validation = validation or ValidationSpec(seed=seed)
    base = base or LearnerConfig(kind=space.kind,
                                 gamma=KRVFL_GAMMA if space.kind == "krvfl-plus" else GAMMA)
    base = replace(base, kind=space.kind, P=int(space.P))

    draws = draw_configs(space, seed)
    report = RunReport(learner=space.kind, dataset=name, metric=metric_name(dataset.task),
                       config={"space": repr(space), "validation": asdict(validation),
                               "seed": seed})
    best, best_score = None, None
    for i, draw in enumerate(draws):
        cfg = replace(base, **draw)
        start = time.perf_counter()
        score = evaluate_config(dataset, cfg, validation, normalize)
        elapsed = time.perf_counter() - start
        report.add_trial(trial=i, seed=seed, metric=score, time_s=elapsed, **draw)
        logger.info("search draw %d/%d %s -> %.4f", i + 1, len(draws), draw, score)
        if best is None or is_better(dataset.task, score, best_score):
            best, best_score = cfg, score

    return best, report


def select_activation(dataset, base, validation=None, activations=None,
                      normalize="train"):
    """
    Evaluate every activation on the validation spec and keep the best.

    Returns (best activation, DataFrame of scores).
    """
    validation = validation or ValidationSpec(seed=base.seed)
    activations = list(activations or ACTIVATIONS)
    rows = []
    best, best_score = None, None
    for act in activations:
        score = evaluate_config(dataset, replace(base, activation=act), validation, normalize)
        rows.append({"activation": act, "metric": score})
        if best is None or is_better(dataset.task, score, best_score):
            best, best_score = act, score
    return best, pd.DataFrame(rows)


def sensitivity_grid(dataset, base, axis_a, axis_b, validation=None, normalize="train"):
    """
    Validation metric over a two-parameter grid, e.g. ("C", [...]) by
    ("gamma", [...]). Returns a DataFrame indexed by axis_a values with
    axis_b values as columns.
    """
    validation = validation or ValidationSpec(seed=base.seed)
    name_a, values_a = axis_a
    name_b, values_b = axis_b
    table = pd.DataFrame(index=pd.Index(values_a, name=name_a),
                         columns=pd.Index(values_b, name=name_b), dtype=float)
    for a in values_a:
        for b in values_b:
            cfg = replace(base, **{name_a: a, name_b: b})
            table.loc[a, b] = evaluate_config(dataset, cfg, validation, normalize)
    return table
