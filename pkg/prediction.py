# prediction.py

from dataclasses import dataclass, field

import numpy as np

from errors import DataError


@dataclass(frozen=True)
class Prediction:
    """
    raw     : (T, m) output-function values
    decided : (T,) labels in {-1, +1} (binary), class indices (multiclass)
              or (T, m) values (regression)
    """
    raw: np.ndarray = field(repr=False)
    decided: np.ndarray = field(repr=False)
    task: str


def _as_matrix(raw):
    raw = np.asarray(raw, dtype=float)
    return raw.reshape(-1, 1) if raw.ndim == 1 else raw


def decide_binary(raw):
    """sign(f); zero maps to +1."""
    raw = _as_matrix(raw)
    if raw.shape[1] != 1:
        raise DataError(f"sign rule needs a single output column, got {raw.shape[1]}")
    return np.where(raw[:, 0] >= 0.0, 1, -1)


def decide_multiclass(raw):
    """One-vs-all: argmax over output nodes, ties to the lowest index."""
    raw = _as_matrix(raw)
    if raw.shape[1] < 2:
        raise DataError(f"one-vs-all rule needs >= 2 output columns, got {raw.shape[1]}")
    # np.argmax returns the first maximal index
    return np.argmax(raw, axis=1)


def predict_labels(raw, task):
    raw = _as_matrix(raw)
    if task == "binary":
        if raw.shape[1] == 2:
            # m = 2 one-vs-all path, column 1 is the positive class
            decided = np.where(decide_multiclass(raw) == 1, 1, -1)
        else:
            decided = decide_binary(raw)
    elif task == "multiclass":
        decided = decide_multiclass(raw)
    elif task == "regression":
        decided = raw
    else:
        raise DataError(f"unknown task {task!r}")
    return Prediction(raw=raw, decided=decided, task=task)


def true_labels(y, task):
    """Decoded ground truth in the same encoding as Prediction.decided."""
    y = _as_matrix(y)
    if task == "binary":
        if y.shape[1] == 2:
            return np.where(np.argmax(y, axis=1) == 1, 1, -1)
        return np.where(y[:, 0] >= 0.0, 1, -1)
    if task == "multiclass":
        return np.argmax(y, axis=1)
    return y


def metrics(pred, truth):
    """
    Accuracy (percent) for classification, RMSE for regression.

    `truth` is a Dataset holding the evaluated rows.
    """
    if pred.task != truth.task:
        raise DataError(f"prediction task {pred.task!r} does not match data task {truth.task!r}")
    if pred.raw.shape[0] != truth.n_rows:
        raise DataError(f"{pred.raw.shape[0]} predictions for {truth.n_rows} rows")

    if pred.task == "regression":
        err = pred.decided - truth.y
        return {"rmse": float(np.sqrt(np.mean(err ** 2)))}

    correct = pred.decided == true_labels(truth.y, truth.task)
    return {"accuracy": float(100.0 * np.mean(correct))}
