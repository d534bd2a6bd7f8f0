# config.py

import hashlib
import json
from pathlib import Path

import numpy as np
import yaml

from errors import ConfigError

# Enhancement layer
N_NODES = 1000            # P, enhancement nodes
U_SCALE = 2 ** 2.5        # weights ~ U[-u, u], biases ~ U[0, u]
ACTIVATION = "sigmoid"

# Regularization
C_REG = 1.0
GAMMA = 1000.0
KRVFL_GAMMA = 5000.0      # KRVFL+ is insensitive to gamma above ~5000
TAU = 0.025               # Gaussian kernel parameter, exp(-||u - v||^2 / tau)

# Random search
C_RANGE = (1e-5, 1e5)
GAMMA_RANGE = (1e-5, 1e5)
TAU_RANGE = (0.01, 1.0)
U_GRID = [float(2.0 ** e) for e in np.arange(-5.0, 5.0 + 0.25, 0.5)]
SEARCH_BUDGET = 30

# Protocol
NOISE_DBW = 10.0
N_TRIALS = 10
N_FOLDS = 10
HOLDOUT_FRACTION = 0.3
SEED = 0
SYNTHETIC_ROWS = 300     # rows of the built-in "synthetic" dataset

# Numerical tolerances
COND_WARN = 1e14
KKT_TOL = 1e-8

# Dataset statistics for the UCI benchmarks:
# name -> task, attributes, normal, privileged, classes (or targets), folds
UCI_DATASETS = {
    "glass":              {"task": "multiclass", "attributes": 9,  "normal": 5, "privileged": 4, "classes": 6, "folds": 10},
    "iris":               {"task": "multiclass", "attributes": 4,  "normal": 2, "privileged": 2, "classes": 3, "folds": 10},
    "wine":               {"task": "multiclass", "attributes": 13, "normal": 7, "privileged": 6, "classes": 3, "folds": 10},
    "abalone":            {"task": "multiclass", "attributes": 8,  "normal": 4, "privileged": 4, "classes": 3, "folds": 5},
    "red_wine_quality":   {"task": "multiclass", "attributes": 11, "normal": 6, "privileged": 5, "classes": 6, "folds": 5},
    "white_wine_quality": {"task": "multiclass", "attributes": 11, "normal": 6, "privileged": 5, "classes": 7, "folds": 5},
    "segment":            {"task": "multiclass", "attributes": 19, "normal": 10, "privileged": 9, "classes": 7, "folds": 10},
    "shuttle":            {"task": "multiclass", "attributes": 9,  "normal": 5, "privileged": 4, "classes": 7, "folds": 2},
    "edm":                {"task": "regression", "folds": 10},
    "slump":              {"task": "regression", "folds": 10},
    "andro":              {"task": "regression", "folds": 10},
    "scm1d":              {"task": "regression", "folds": 2},
    "scm20d":             {"task": "regression", "folds": 2},
}

LEARNERS = ("rvfl-pinv", "rvfl-ridge", "rvfl-plus", "krvfl-plus")

DEFAULTS = {
    "learner": "rvfl-plus",
    "task": "multiclass",
    "label_column": -1,
    "header": True,
    "C": C_REG,
    "gamma": GAMMA,
    "u": U_SCALE,
    "P": N_NODES,
    "activation": ACTIVATION,
    "tau": TAU,
    "kernel": "gaussian",
    "degree": 2,
    "coef": 1.0,
    "folds": None,            # None: registry fold count, else N_FOLDS
    "normal_count": None,
    "joint_normalization": False,
    "noise_dbw": None,
    "trials": N_TRIALS,
    "budget": SEARCH_BUDGET,
    "validation": "cv",
    "seed": SEED,
}


def load_run_config(path):
    """
    Read a YAML key-value run configuration.

    Unknown keys are rejected so that typos do not silently fall back
    to defaults.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")

    with path.open("r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}

    if not isinstance(data, dict):
        raise ConfigError(f"config file must hold key: value pairs: {path}")

    unknown = sorted(set(data) - set(DEFAULTS) - {"dataset", "out"})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    return data


RANGE_KEYS = ("C", "gamma", "u", "tau")


def parse_value_or_range(value):
    """
    A single positive value ("1.0", 1.0) or a log-search range
    ("1e-5:1e5", [1e-5, 1e5]) returned as a (lo, hi) tuple.
    """
    if isinstance(value, (list, tuple)):
        parts = list(value)
    elif isinstance(value, str):
        parts = value.split(":")
    else:
        parts = [value]

    try:
        nums = [float(p) for p in parts]
    except (TypeError, ValueError):
        raise ConfigError(f"{value!r} is not a number or a lo:hi range")
    if len(nums) not in (1, 2) or not all(np.isfinite(v) and v > 0 for v in nums):
        raise ConfigError(f"{value!r} must be a positive number or a lo:hi range")
    if len(nums) == 1:
        return nums[0]
    if nums[0] > nums[1]:
        raise ConfigError(f"empty range {value!r}: lo > hi")
    return (nums[0], nums[1])


def resolve_run_config(overrides=None, path=None):
    """
    Merge explicit overrides > config file > defaults.

    Returns a plain dict; every field is set so the dict can be echoed
    into reports and re-used to reproduce the run.
    """
    cfg = dict(DEFAULTS)
    explicit = set()
    if path is not None:
        from_file = load_run_config(path)
        cfg.update(from_file)
        explicit.update(from_file)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = value
            explicit.add(key)

    if cfg["learner"] == "krvfl-plus" and "gamma" not in explicit:
        cfg["gamma"] = KRVFL_GAMMA

    if cfg["learner"] not in LEARNERS:
        raise ConfigError(f"unknown learner {cfg['learner']!r}; expected one of {LEARNERS}")
    for key in RANGE_KEYS:
        cfg[key] = parse_value_or_range(cfg[key])

    return cfg


def config_hash(cfg):
    payload = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:12]
