# rvfl.py

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from config import COND_WARN
from enhancement import apply, init_layer
from errors import ConfigError, DataError, NumericalError
from qp_oracle import kkt_residual

logger = logging.getLogger(__name__)


# ============================================================
# 1) Models
# ============================================================

@dataclass(frozen=True)
class RvflModel:
    """Plain RVFL: output weights w of shape (n + P, m)."""
    w: np.ndarray = field(repr=False)
    layer: object = None
    variant: str = "ridge"
    C: float = None


@dataclass(frozen=True)
class RvflPlusModel:
    """
    RVFL+ trained with privileged information.

    Only `w` and `layer` are used at test time; `w_corr` (the correcting
    function weights) and `layer_priv` are kept for diagnostics.
    """
    w: np.ndarray = field(repr=False)
    w_corr: np.ndarray = field(repr=False)
    layer: object = None
    layer_priv: object = None
    C: float = 1.0
    gamma: float = 1.0


@dataclass(frozen=True)
class TrainDiagnostics:
    kkt_residual: float
    train_loss: float
    lam: np.ndarray = field(repr=False)
    condition: float = float("nan")


# ============================================================
# 2) Linear algebra helpers
# ============================================================

def check_finite(**arrays):
    for name, a in arrays.items():
        if not np.all(np.isfinite(a)):
            raise NumericalError(f"{name} contains non-finite values")


def check_positive(**values):
    for name, v in values.items():
        if not (np.isfinite(v) and v > 0):
            raise ConfigError(f"{name} must be a finite positive real, got {v}")


def solve_spd(A, B):
    """
    Solve A X = B for symmetric positive definite A.

    Cholesky first; a pivoted LU factorization is used if Cholesky
    reports failure. Returns (X, condition estimate).
    """
    try:
        factor = linalg.cho_factor(A, lower=True, check_finite=False)
        X = linalg.cho_solve(factor, B, check_finite=False)
        diag = np.abs(np.diag(factor[0]))
        cond = (diag.max() / diag.min()) ** 2 if diag.min() > 0 else np.inf
    except linalg.LinAlgError:
        logger.warning("Cholesky failed on a %dx%d system, falling back to LU",
                       A.shape[0], A.shape[1])
        lu, piv = linalg.lu_factor(A, check_finite=False)
        X = linalg.lu_solve((lu, piv), B, check_finite=False)
        cond = np.linalg.cond(A)

    if cond > COND_WARN:
        logger.warning("ill-conditioned system (cond ~ %.3e > %.0e)", cond, COND_WARN)
    if not np.all(np.isfinite(X)):
        raise NumericalError("linear solve produced non-finite values")
    return X, float(cond)


def _as_matrix(y):
    y = np.asarray(y, dtype=float)
    return y.reshape(-1, 1) if y.ndim == 1 else y


def _check_rows(h, y, name="h"):
    if h.shape[0] != y.shape[0]:
        raise DataError(f"{name} has {h.shape[0]} rows but y has {y.shape[0]}")


# ============================================================
# 3) Plain RVFL
# ============================================================

def train_rvfl_pinv(h, y, layer=None):
    """Minimum-norm least squares: w = pinv(H) Y."""
    h = np.asarray(h, dtype=float)
    y = _as_matrix(y)
    _check_rows(h, y)
    check_finite(h=h, y=y)

    w = linalg.pinv(h, check_finite=False) @ y
    return RvflModel(w=w, layer=layer, variant="pinv")


def train_rvfl_ridge(h, y, C, layer=None):
    """
    Ridge solution w = (H^T H + I/C)^-1 H^T Y.

    The dual form H^T (H H^T + I/C)^-1 Y is used when N < n + P; both are
    the minimizer of 1/2 ||w||^2 + C/2 ||Y - H w||^2.
    """
    h = np.asarray(h, dtype=float)
    y = _as_matrix(y)
    _check_rows(h, y)
    check_finite(h=h, y=y)
    check_positive(C=C)

    N, D = h.shape
    if N >= D:
        w, _ = solve_spd(h.T @ h + np.eye(D) / C, h.T @ y)
    else:
        alpha, _ = solve_spd(h @ h.T + np.eye(N) / C, y)
        w = h.T @ alpha

    return RvflModel(w=w, layer=layer, variant="ridge", C=float(C))


def rvfl_output(model, h):
    """Output function f = H w on an already enhanced matrix."""
    return np.asarray(h, dtype=float) @ model.w


def predict_rvfl(model, x):
    """Test-time output h(z) w. Takes normal features only."""
    if model.layer is None:
        raise ConfigError("model has no enhancement layer; use rvfl_output on H")
    return apply(model.layer, x) @ model.w


# ============================================================
# 4) RVFL+ (privileged information)
# ============================================================

def train_rvfl_plus(h, h_priv, y, C, gamma, layer=None, layer_priv=None,
                    flip_sign=False):
    """
    Closed-form RVFL+ training.

    Solves
        (H H^T + (1/gamma) Ht Ht^T + I/C) lambda = Y + (C/gamma) Ht Ht^T 1
    with 1 the all-ones N x m matrix, then
        w      = H^T lambda
        w_corr = (1/gamma) (Ht^T lambda - C Ht^T 1)

    Parameters
    ----------
    h, h_priv : (N, n + P), (N, d + P) enhanced outputs of the normal and
        privileged features.
    y : (N, m) targets.
    C, gamma : positive regularization coefficients.
    flip_sign : use Y - (C/gamma) Ht Ht^T 1 on the right-hand side instead.
        Debug switch only: that sign does not satisfy the stationarity
        conditions and is caught by the KKT oracle.

    Returns
    -------
    (RvflPlusModel, TrainDiagnostics)
    """
    h = np.asarray(h, dtype=float)
    h_priv = np.asarray(h_priv, dtype=float)
    y = _as_matrix(y)
    _check_rows(h, y)
    _check_rows(h_priv, y, name="h_priv")
    check_finite(h=h, h_priv=h_priv, y=y)
    check_positive(C=C, gamma=gamma)

    N, m = y.shape
    ones = np.ones((N, m))
    k_priv = h_priv @ h_priv.T

    A = h @ h.T + k_priv / gamma + np.eye(N) / C
    shift = (C / gamma) * (k_priv @ ones)
    rhs = y - shift if flip_sign else y + shift

    lam, cond = solve_spd(A, rhs)
    w = h.T @ lam
    w_corr = (h_priv.T @ lam - C * (h_priv.T @ ones)) / gamma

    logger.debug("RVFL+ solve: N=%d, D=%d, Dt=%d, m=%d, cond~%.2e",
                 N, h.shape[1], h_priv.shape[1], m, cond)

    residual = kkt_residual(h, h_priv, y, C, gamma, w, w_corr, lam)
    fitted = h @ w
    diag = TrainDiagnostics(
        kkt_residual=residual,
        train_loss=float(np.mean((fitted - y) ** 2)),
        lam=lam,
        condition=cond,
    )
    model = RvflPlusModel(w=w, w_corr=w_corr, layer=layer, layer_priv=layer_priv,
                          C=float(C), gamma=float(gamma))
    return model, diag


# ============================================================
# 5) End-to-end fitting (layers + solve)
# ============================================================

def fit_rvfl(x, y, variant="ridge", C=1.0, P=1000, activation="sigmoid",
             u=1.0, seed=0):
    layer = init_layer(np.asarray(x).shape[1], P, activation, u, seed)
    h = apply(layer, x)
    if variant == "pinv":
        return train_rvfl_pinv(h, y, layer=layer)
    if variant == "ridge":
        return train_rvfl_ridge(h, y, C, layer=layer)
    raise ConfigError(f"unknown RVFL variant {variant!r}")


def fit_rvfl_plus(x, x_priv, y, C=1.0, gamma=1000.0, P=1000,
                  activation="sigmoid", u=1.0, seed=0, P_priv=None,
                  activation_priv=None, u_priv=None):
    """
    Draw the normal and privileged layers (seeds `seed` and `seed + 1`),
    enhance both feature sets and solve for the RVFL+ weights.

    The privileged layer copies P, activation and u unless P_priv,
    activation_priv or u_priv is given; it is never used at test time.
    """
    x = np.asarray(x, dtype=float)
    x_priv = np.asarray(x_priv, dtype=float)
    layer = init_layer(x.shape[1], P, activation, u, seed)
    layer_priv = init_layer(
        x_priv.shape[1],
        P if P_priv is None else P_priv,
        activation if activation_priv is None else activation_priv,
        u if u_priv is None else u_priv,
        seed + 1,
    )
    return train_rvfl_plus(apply(layer, x), apply(layer_priv, x_priv), y, C, gamma,
                           layer=layer, layer_priv=layer_priv)
