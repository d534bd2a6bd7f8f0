# krvfl.py

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from config import TAU
from errors import ConfigError, DataError
from rvfl import check_finite, check_positive, solve_spd

logger = logging.getLogger(__name__)

MERCER_KINDS = ("gaussian", "polynomial", "explicit", "none")


# ============================================================
# 1) Kernels
# ============================================================

@dataclass(frozen=True)
class KernelSpec:
    """
    Linear-plus-Mercer kernel K(u, v) = [linear] <u, v> + K2(u, v).

    mercer : "gaussian"    K2 = exp(-||u - v||^2 / tau)
             "polynomial"  K2 = (<u, v> + coef)^degree
             "explicit"    K2 = phi(u) phi(v)^T for a finite feature map
             "none"        no Mercer part
    """
    mercer: str = "gaussian"
    tau: float = TAU
    degree: int = 2
    coef: float = 1.0
    includes_linear: bool = True
    feature_map: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.mercer not in MERCER_KINDS:
            raise ConfigError(f"unknown kernel {self.mercer!r}; expected one of {MERCER_KINDS}")
        if self.mercer == "gaussian" and not (np.isfinite(self.tau) and self.tau > 0):
            raise ConfigError(f"Gaussian kernel needs tau > 0, got {self.tau}")
        if self.mercer == "polynomial" and int(self.degree) < 1:
            raise ConfigError(f"polynomial degree must be >= 1, got {self.degree}")
        if self.mercer == "explicit" and not callable(self.feature_map):
            raise ConfigError("explicit kernel needs a callable feature_map")


def mercer_part(x_a, x_b, spec):
    if spec.mercer == "gaussian":
        return np.exp(-cdist(x_a, x_b, "sqeuclidean") / spec.tau)
    if spec.mercer == "polynomial":
        return (x_a @ x_b.T + spec.coef) ** int(spec.degree)
    if spec.mercer == "explicit":
        return spec.feature_map(x_a) @ spec.feature_map(x_b).T
    return np.zeros((x_a.shape[0], x_b.shape[0]))


def gram_matrix(x_a, x_b, spec):
    """
    Kernel matrix with entries K(x_a[i], x_b[j]), shape (A, B).

    When x_a and x_b are the same array the result is symmetrized
    explicitly.
    """
    same = x_b is None or x_b is x_a
    x_a = np.asarray(x_a, dtype=float)
    x_b = x_a if same else np.asarray(x_b, dtype=float)
    if x_a.ndim != 2 or x_b.ndim != 2 or x_a.shape[1] != x_b.shape[1]:
        raise DataError(
            f"kernel inputs need matching feature counts, got {x_a.shape} and {x_b.shape}"
        )
    if x_a.shape[0] == 0 or x_b.shape[0] == 0:
        return np.zeros((x_a.shape[0], x_b.shape[0]))

    K = mercer_part(x_a, x_b, spec)
    if spec.includes_linear:
        K = K + x_a @ x_b.T
    if same:
        K = 0.5 * (K + K.T)
    return K


# ============================================================
# 2) KRVFL+
# ============================================================

@dataclass(frozen=True)
class KrvflPlusModel:
    """
    Kernel RVFL+. Test-time output is K(z, x_train) w_kernel, so the
    training inputs are retained verbatim (model size O(N (n + m))).
    """
    w_kernel: np.ndarray = field(repr=False)
    x_train: np.ndarray = field(repr=False)
    spec: KernelSpec = KernelSpec()
    spec_priv: KernelSpec = KernelSpec()
    C: float = 1.0
    gamma: float = 5000.0


def train_krvfl_plus(x, x_priv, y, spec=None, spec_priv=None, C=1.0,
                     gamma=5000.0, flip_sign=False):
    """
    w_kernel = (Omega + Omega_t / gamma + I / C)^-1 (Y + (C / gamma) Omega_t 1)

    Omega and Omega_t are the linear-plus-Mercer Gram matrices of the
    normal and privileged features; 1 is the all-ones N x m matrix.
    """
    spec = spec or KernelSpec()
    spec_priv = spec_priv or spec
    x = np.asarray(x, dtype=float)
    x_priv = np.asarray(x_priv, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    if not (x.shape[0] == x_priv.shape[0] == y.shape[0]):
        raise DataError(
            f"row counts differ: x {x.shape[0]}, x_priv {x_priv.shape[0]}, y {y.shape[0]}"
        )
    check_finite(x=x, x_priv=x_priv, y=y)
    check_positive(C=C, gamma=gamma)

    N, m = y.shape
    omega = gram_matrix(x, x, spec)
    omega_priv = gram_matrix(x_priv, x_priv, spec_priv)

    A = omega + omega_priv / gamma + np.eye(N) / C
    shift = (C / gamma) * (omega_priv @ np.ones((N, m)))
    rhs = y - shift if flip_sign else y + shift

    w_kernel, cond = solve_spd(A, rhs)
    logger.debug("KRVFL+ solve: N=%d, m=%d, cond~%.2e", N, m, cond)

    x_train = x.copy()
    x_train.setflags(write=False)
    return KrvflPlusModel(w_kernel=w_kernel, x_train=x_train, spec=spec,
                          spec_priv=spec_priv, C=float(C), gamma=float(gamma))


def predict_krvfl_plus(model, z):
    """f(z) = K(z, x_train) w_kernel. Takes normal features only."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z.reshape(1, -1)
    n = model.x_train.shape[1]
    if z.shape[1] != n:
        raise DataError(f"model expects {n} feature columns, got {z.shape[1]}")
    if z.shape[0] == 0:
        return np.zeros((0, model.w_kernel.shape[1]))
    return gram_matrix(z, model.x_train, model.spec) @ model.w_kernel
