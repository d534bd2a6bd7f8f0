# model_io.py

"""
Model persistence.

Models are written as JSON records. Floats go through repr(), which
round-trips IEEE doubles exactly, so save -> load is bit-exact and the
same model always produces the same bytes.
"""

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from enhancement import EnhancementLayer
from errors import ConfigError, DataError
from krvfl import KernelSpec, KrvflPlusModel
from rvfl import RvflModel, RvflPlusModel

FORMAT_VERSION = 1


def _array_record(a):
    a = np.asarray(a, dtype=float)
    return {"shape": list(a.shape), "data": a.reshape(-1).tolist()}


def _array_from(record):
    a = np.array(record["data"], dtype=float).reshape(record["shape"])
    a.setflags(write=False)
    return a


def layer_record(layer):
    if layer is None:
        return None
    return {
        "a": _array_record(layer.a),
        "b": _array_record(layer.b),
        "activation": layer.activation,
        "u": layer.u,
        "seed": layer.seed,
    }


def layer_from(record):
    if record is None:
        return None
    return EnhancementLayer(a=_array_from(record["a"]), b=_array_from(record["b"]),
                            activation=record["activation"], u=float(record["u"]),
                            seed=int(record["seed"]))


def _kernel_record(spec):
    if spec.mercer == "explicit":
        raise ConfigError("kernels with an explicit feature map cannot be persisted")
    return {"mercer": spec.mercer, "tau": spec.tau, "degree": spec.degree,
            "coef": spec.coef, "includes_linear": spec.includes_linear}


def model_record(model):
    if isinstance(model, RvflPlusModel):
        return {
            "kind": "rvfl-plus",
            "w": _array_record(model.w),
            "w_corr": _array_record(model.w_corr),
            "layer": layer_record(model.layer),
            "layer_priv": layer_record(model.layer_priv),
            "C": model.C,
            "gamma": model.gamma,
        }
    if isinstance(model, RvflModel):
        return {
            "kind": f"rvfl-{model.variant}",
            "w": _array_record(model.w),
            "layer": layer_record(model.layer),
            "C": model.C,
        }
    if isinstance(model, KrvflPlusModel):
        return {
            "kind": "krvfl-plus",
            "w_kernel": _array_record(model.w_kernel),
            "x_train": _array_record(model.x_train),
            "spec": _kernel_record(model.spec),
            "spec_priv": _kernel_record(model.spec_priv),
            "C": model.C,
            "gamma": model.gamma,
        }
    raise ConfigError(f"cannot persist object of type {type(model).__name__}")


def model_from(record):
    kind = record.get("kind")
    if kind == "rvfl-plus":
        return RvflPlusModel(w=_array_from(record["w"]), w_corr=_array_from(record["w_corr"]),
                             layer=layer_from(record["layer"]),
                             layer_priv=layer_from(record["layer_priv"]),
                             C=record["C"], gamma=record["gamma"])
    if kind in ("rvfl-pinv", "rvfl-ridge"):
        return RvflModel(w=_array_from(record["w"]), layer=layer_from(record["layer"]),
                         variant=kind.split("-", 1)[1], C=record["C"])
    if kind == "krvfl-plus":
        return KrvflPlusModel(w_kernel=_array_from(record["w_kernel"]),
                              x_train=_array_from(record["x_train"]),
                              spec=KernelSpec(**record["spec"]),
                              spec_priv=KernelSpec(**record["spec_priv"]),
                              C=record["C"], gamma=record["gamma"])
    raise DataError(f"unknown model kind {kind!r}")


def write_atomic(path, text):
    """Write text to path through a temporary file in the same directory."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(path, model, metadata=None):
    """
    Persist a trained model plus free-form metadata (pre-processing
    scales, task, class labels, run config).
    """
    payload = {
        "format": FORMAT_VERSION,
        "model": model_record(model),
        "metadata": metadata or {},
    }
    write_atomic(path, json.dumps(payload, sort_keys=True))


def load_model(path):
    """Returns (model, metadata)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"model file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"corrupt model file {path}: {exc}") from exc
    if payload.get("format") != FORMAT_VERSION:
        raise DataError(f"unsupported model format {payload.get('format')!r}")
    return model_from(payload["model"]), payload.get("metadata", {})
