# data_loader.py

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from errors import DataError

logger = logging.getLogger(__name__)

TASKS = ("binary", "multiclass", "regression")


# ============================================================
# 1) Dataset containers
# ============================================================

def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """
    Training/evaluation data for the RVFL family.

    x        : (N, n) normal features
    x_priv   : (N, d) privileged features, or None
    y        : (N, m) targets. One-hot for multiclass, +/-1 column for
               binary (sign rule) unless built with one-hot, real values
               for regression.
    task     : "binary", "multiclass" or "regression"
    class_labels : original label values in column order
    """
    x: np.ndarray
    y: np.ndarray
    task: str = "multiclass"
    x_priv: np.ndarray = None
    class_labels: tuple = None

    def __post_init__(self):
        x = _frozen(self.x)
        y = _frozen(self.y)
        if x.ndim == 1:
            x = _frozen(x.reshape(-1, 1))
        if y.ndim == 1:
            y = _frozen(y.reshape(-1, 1))
        if x.ndim != 2 or y.ndim != 2:
            raise DataError("x and y must be 2-D matrices")
        if self.task not in TASKS:
            raise DataError(f"unknown task {self.task!r}; expected one of {TASKS}")
        if x.shape[0] != y.shape[0]:
            raise DataError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        if x.shape[0] < 1:
            raise DataError("dataset must hold at least one row")

        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

        if self.x_priv is not None:
            xp = _frozen(self.x_priv)
            if xp.ndim == 1:
                xp = _frozen(xp.reshape(-1, 1))
            if xp.shape[0] != x.shape[0]:
                raise DataError(
                    f"x_priv has {xp.shape[0]} rows but x has {x.shape[0]}"
                )
            object.__setattr__(self, "x_priv", xp)

        if self.class_labels is not None:
            object.__setattr__(self, "class_labels", tuple(self.class_labels))

    @property
    def n_rows(self):
        return self.x.shape[0]

    @property
    def n_features(self):
        return self.x.shape[1]

    @property
    def n_privileged(self):
        return 0 if self.x_priv is None else self.x_priv.shape[1]

    @property
    def n_outputs(self):
        return self.y.shape[1]

    @property
    def is_classification(self):
        return self.task != "regression"


@dataclass(frozen=True)
class FoldPlan:
    """Shuffled k-fold assignment; fold sizes differ by at most one."""
    k: int
    assignments: np.ndarray = field(repr=False)
    seed: int = 0

    def split(self, fold):
        test_idx = np.flatnonzero(self.assignments == fold)
        train_idx = np.flatnonzero(self.assignments != fold)
        return train_idx, test_idx

    def sizes(self):
        return np.bincount(self.assignments, minlength=self.k)


# ============================================================
# 2) CSV loading and target encoding
# ============================================================

def _sorted_labels(values):
    uniq = pd.unique(values)
    numeric = pd.to_numeric(pd.Series(uniq), errors="coerce")
    if not numeric.isna().any():
        order = np.argsort(numeric.to_numpy(), kind="stable")
    else:
        order = np.argsort(np.array(uniq, dtype=str), kind="stable")
    return [uniq[i] for i in order]


def one_hot(labels, classes=None):
    """
    One-hot encode labels with columns in sorted label order.

    Returns (y, classes).
    """
    labels = np.asarray(labels, dtype=object)
    if classes is None:
        classes = _sorted_labels(labels)
    index = {c: j for j, c in enumerate(classes)}
    y = np.zeros((len(labels), len(classes)))
    for i, lab in enumerate(labels):
        if lab not in index:
            raise DataError(f"row {i}: label {lab!r} not among known classes")
        y[i, index[lab]] = 1.0
    return y, list(classes)


def signed_targets(labels, classes=None):
    """Binary labels to a +/-1 column (first sorted label -> -1)."""
    labels = np.asarray(labels, dtype=object)
    if classes is None:
        classes = _sorted_labels(labels)
    if len(classes) != 2:
        raise DataError(f"binary task needs exactly 2 classes, found {len(classes)}")
    y = np.where(labels == classes[1], 1.0, -1.0).reshape(-1, 1)
    return y, list(classes)


def _resolve_label_column(columns, label_column):
    if isinstance(label_column, str) and label_column in columns:
        return columns.index(label_column)
    try:
        idx = int(label_column)
    except (TypeError, ValueError):
        raise DataError(f"unknown label column {label_column!r}")
    if not -len(columns) <= idx < len(columns):
        raise DataError(
            f"label column index {idx} out of range for {len(columns)} columns"
        )
    return idx % len(columns)


def _read_frame(path, header):
    path = Path(path)
    if not path.exists():
        raise DataError(f"dataset not found: {path}")

    try:
        frame = pd.read_csv(
            path,
            header=0 if header else None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            encoding="utf-8",
        )
    except pd.errors.ParserError as exc:
        # pandas reports "Expected k fields in line L, saw j"
        raise DataError(f"malformed row in {path}: {exc}") from exc
    except pd.errors.EmptyDataError as exc:
        raise DataError(f"empty dataset: {path}") from exc

    if frame.shape[0] == 0:
        raise DataError(f"no data rows in {path}")

    # keep_default_na=False pads short rows with "", not NaN
    short = (frame.isna() | frame.eq("")).any(axis=1).to_numpy()
    if short.any():
        row = int(np.flatnonzero(short)[0])
        raise DataError(
            f"malformed row {row}: expected {frame.shape[1]} non-empty fields"
        )

    frame.columns = [str(c) for c in frame.columns]
    return path, frame


def _numeric_features(features):
    x = features.apply(pd.to_numeric, errors="coerce")
    bad = x.isna().to_numpy()
    if bad.any():
        row, col = (int(v[0]) for v in np.nonzero(bad))
        raise DataError(
            f"row {row}: non-numeric value {features.iat[row, col]!r} "
            f"in feature column {features.columns[col]!r}"
        )
    return x


def load_features(path, header=True):
    """Unlabelled feature matrix (prediction input)."""
    _, frame = _read_frame(path, header)
    return _numeric_features(frame).to_numpy(dtype=float)


def load_csv(path, label_column=-1, task="multiclass", header=True,
             binary_one_hot=False):
    """
    Load a comma-separated dataset.

    Parameters
    ----------
    path : str or Path
        UTF-8 CSV file.
    label_column : str or int
        Column name (when header=True) or zero-based index; negative
        indices count from the end.
    task : {"binary", "multiclass", "regression"}
    header : bool
        Whether the first line holds column names.
    binary_one_hot : bool
        Binary tasks get a +/-1 column by default (sign rule); set this to
        get an N x 2 one-hot matrix (one-vs-all rule) instead.

    Returns
    -------
    Dataset with x_priv absent.
    """
    if task not in TASKS:
        raise DataError(f"unknown task {task!r}")

    path, frame = _read_frame(path, header)
    columns = list(frame.columns)
    label_idx = _resolve_label_column(columns, label_column)
    label_name = columns[label_idx]

    features = frame.drop(columns=[label_name])
    x = _numeric_features(features)
    labels = frame[label_name].str.strip().to_numpy(dtype=object)

    if task == "regression":
        values = pd.to_numeric(pd.Series(labels), errors="coerce")
        if values.isna().any():
            row = int(np.flatnonzero(values.isna().to_numpy())[0])
            raise DataError(f"row {row}: non-numeric regression target {labels[row]!r}")
        y = values.to_numpy(dtype=float).reshape(-1, 1)
        classes = None
    elif task == "binary" and not binary_one_hot:
        y, classes = signed_targets(labels)
    else:
        y, classes = one_hot(labels)
        if task == "binary" and len(classes) != 2:
            raise DataError(f"binary task needs exactly 2 classes, found {len(classes)}")

    logger.info("loaded %s: %d rows, %d features, %d outputs",
                path.name, x.shape[0], x.shape[1], y.shape[1])

    return Dataset(x=x.to_numpy(dtype=float), y=y, task=task,
                   class_labels=classes)


# ============================================================
# 3) Pre-processing
# ============================================================

def fit_l1_scale(x):
    """Column absolute sums; all-zero columns get scale 1 (left unchanged)."""
    scale = np.abs(np.asarray(x, dtype=float)).sum(axis=0)
    zero = scale == 0
    if zero.any():
        logger.debug("%d all-zero column(s) left unnormalized", int(zero.sum()))
    scale[zero] = 1.0
    return scale


def apply_l1_scale(x, scale):
    return np.asarray(x, dtype=float) / scale


def normalize_l1(d, scale=None, scale_priv=None):
    """
    Per-feature-column L1 normalization of x (and x_priv).

    Without explicit scales the scales are fit on `d` itself (the joint
    form); pass scales fit on a training split to apply them to a test
    split.
    """
    if scale is None:
        scale = fit_l1_scale(d.x)
    x = apply_l1_scale(d.x, scale)

    x_priv = d.x_priv
    if x_priv is not None:
        if scale_priv is None:
            scale_priv = fit_l1_scale(x_priv)
        x_priv = apply_l1_scale(x_priv, scale_priv)

    return replace(d, x=x, x_priv=x_priv)


def split_privileged(d, normal_count=None):
    """
    Move the trailing feature columns into the privileged set.

    normal_count defaults to ceil(n / 2): odd attribute counts give the
    extra column to the normal side (Glass 9 -> 5 + 4).
    """
    if d.x_priv is not None:
        raise DataError("dataset already has privileged features")
    n = d.n_features
    if normal_count is None:
        normal_count = (n + 1) // 2
    if not 1 <= normal_count < n:
        raise DataError(f"normal_count must lie in [1, {n}), got {normal_count}")

    return replace(d, x=d.x[:, :normal_count], x_priv=d.x[:, normal_count:])


def concat_features(d):
    """[x | x_priv], the inverse of split_privileged."""
    if d.x_priv is None:
        return np.array(d.x)
    return np.hstack([d.x, d.x_priv])


def add_white_noise(d, power_dbw, seed=0):
    """
    Add i.i.d. zero-mean Gaussian noise of variance 10^(dBW/10) to x.

    x_priv and y are left untouched.
    """
    if not np.isfinite(power_dbw):
        raise DataError(f"noise power must be finite, got {power_dbw}")
    rng = np.random.default_rng(seed)
    sigma = np.sqrt(10.0 ** (power_dbw / 10.0))
    noise = rng.normal(0.0, sigma, size=d.x.shape)
    return replace(d, x=d.x + noise)


def take_rows(d, idx):
    idx = np.asarray(idx, dtype=int)
    return replace(
        d,
        x=d.x[idx],
        y=d.y[idx],
        x_priv=None if d.x_priv is None else d.x_priv[idx],
    )


def drop_privileged(d):
    return replace(d, x_priv=None)


# ============================================================
# 4) Folds and hold-out splits
# ============================================================

def make_folds(n_rows, k, seed=0):
    """Deterministic shuffled k-fold assignment."""
    if not 2 <= k <= n_rows:
        raise DataError(f"k must lie in [2, {n_rows}], got {k}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_rows)
    assignments = np.empty(n_rows, dtype=int)
    assignments[perm] = np.arange(n_rows) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def make_holdout(n_rows, fraction=0.3, seed=0):
    """Shuffled (train_idx, val_idx) split with at least one row on each side."""
    if n_rows < 2:
        raise DataError("hold-out split needs at least 2 rows")
    if not 0.0 < fraction < 1.0:
        raise DataError(f"hold-out fraction must lie in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_rows)
    n_val = min(max(1, int(round(fraction * n_rows))), n_rows - 1)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


# ============================================================
# 5) Synthetic LUPI benchmark
# ============================================================

def make_synthetic_lupi(n_rows=200, n_signal=4, n_classes=3, noise_std=1.0,
                        task="multiclass", seed=0):
    """
    Synthetic data where the privileged features are the clean signal.

    s ~ N(0, I) of width n_signal is the clean signal;
    x = s + N(0, noise_std^2) are the normal features;
    x_priv = s.
    Labels are argmax(s @ B) for a fixed random B (multiclass, one-hot),
    sign(s @ b) for binary (+/-1), and s @ beta + sin(s_0) for regression.
    """
    rng = np.random.default_rng(seed)
    s = rng.normal(size=(n_rows, n_signal))
    x = s + rng.normal(0.0, noise_std, size=s.shape)

    if task == "multiclass":
        B = rng.normal(size=(n_signal, n_classes))
        labels = np.argmax(s @ B, axis=1)
        y, classes = one_hot(labels, classes=list(range(n_classes)))
    elif task == "binary":
        b = rng.normal(size=n_signal)
        score = s @ b
        y = np.where(score >= 0, 1.0, -1.0).reshape(-1, 1)
        classes = [-1, 1]
    elif task == "regression":
        beta = rng.normal(size=n_signal)
        y = (s @ beta + np.sin(s[:, 0])).reshape(-1, 1)
        classes = None
    else:
        raise DataError(f"unknown task {task!r}")

    return Dataset(x=x, x_priv=s, y=y, task=task, class_labels=classes)
