# qp_oracle.py

"""
Ground-truth solver for the RVFL+ primal problem.

The oracle never uses the eliminated closed form. It assembles the full
saddle-point (KKT) system of

    min  1/2 ||w||^2 + gamma/2 ||w_corr||^2 + C * sum(Ht w_corr) + C/2 ||xi||^2
    s.t. H w + Ht w_corr + xi = Y

in the stacked unknowns (w, w_corr, lambda) and solves it with a generic
pivoted LU factorization. Stationarity in xi gives xi = lambda / C, which
is eliminated into the multiplier block as -I/C. As C -> inf the problem is
exactly the equality-constrained primal without slack.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from errors import DataError, NumericalError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KktSystem:
    lhs: np.ndarray
    rhs: np.ndarray
    blocks: dict          # name -> (slice, (rows, cols)) of each unknown block


def _vec(a):
    return np.asarray(a, dtype=float).reshape(-1, order="F")


def _unvec(v, shape):
    return v.reshape(shape, order="F")


def assemble_kkt(h, h_priv, y, C, gamma):
    """
    Build the symmetric saddle-point system.

    Column-stacked vec() is used, so vec(A X) = (I_m kron A) vec(X).

        [ I        0          -I(x)H^T  ] [w     ]   [ 0               ]
        [ 0        gamma I    -I(x)Ht^T ] [w_corr] = [ -C vec(Ht^T 1)  ]
        [ -I(x)H   -I(x)Ht    -I/C      ] [lambda]   [ -vec(Y)         ]
    """
    h = np.asarray(h, dtype=float)
    h_priv = np.asarray(h_priv, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    N, m = y.shape
    if h.shape[0] != N or h_priv.shape[0] != N:
        raise DataError("h, h_priv and y must share the row count")

    D = h.shape[1]
    Dt = h_priv.shape[1]
    Im = np.eye(m)
    nw, nc, nl = D * m, Dt * m, N * m

    HT = np.kron(Im, h.T)
    HtT = np.kron(Im, h_priv.T)

    lhs = np.zeros((nw + nc + nl, nw + nc + nl))
    sw = slice(0, nw)
    sc = slice(nw, nw + nc)
    sl = slice(nw + nc, nw + nc + nl)

    lhs[sw, sw] = np.eye(nw)
    lhs[sc, sc] = gamma * np.eye(nc)
    lhs[sw, sl] = -HT
    lhs[sc, sl] = -HtT
    lhs[sl, sw] = -HT.T
    lhs[sl, sc] = -HtT.T
    lhs[sl, sl] = -np.eye(nl) / C

    rhs = np.zeros(nw + nc + nl)
    rhs[sc] = -C * _vec(h_priv.T @ np.ones((N, m)))
    rhs[sl] = -_vec(y)

    blocks = {"w": (sw, (D, m)), "w_corr": (sc, (Dt, m)), "lambda": (sl, (N, m))}
    return KktSystem(lhs=lhs, rhs=rhs, blocks=blocks)


def solve_primal_kkt(h, h_priv, y, C, gamma):
    """
    Solve the saddle-point system directly.

    Returns (w, w_corr, lambda).
    """
    system = assemble_kkt(h, h_priv, y, C, gamma)
    size = system.lhs.shape[0]
    if size > 6000:
        logger.warning("KKT system of size %d; the oracle is meant for small instances", size)

    lu, piv = linalg.lu_factor(system.lhs, check_finite=False)
    if np.any(np.diag(lu) == 0.0):
        raise NumericalError("singular KKT matrix")
    sol = linalg.lu_solve((lu, piv), system.rhs, check_finite=False)
    if not np.all(np.isfinite(sol)):
        raise NumericalError("KKT solve produced non-finite values")

    out = []
    for name in ("w", "w_corr", "lambda"):
        sl, shape = system.blocks[name]
        out.append(_unvec(sol[sl], shape))
    return tuple(out)


def kkt_residual(h, h_priv, y, C, gamma, w, w_corr, lam):
    """
    Largest scale-relative residual of the three first-order conditions:

        stationarity in w       : w - H^T lambda = 0
        stationarity in w_corr  : gamma w_corr - Ht^T lambda + C Ht^T 1 = 0
        (relaxed) feasibility   : H w + Ht w_corr + lambda / C - Y = 0
    """
    h = np.asarray(h, dtype=float)
    h_priv = np.asarray(h_priv, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    ones = np.ones_like(y)
    norm = np.linalg.norm

    ht_lam = h.T @ lam
    r_w = norm(w - ht_lam) / max(1.0, norm(w), norm(ht_lam))

    a = gamma * w_corr
    b = h_priv.T @ lam
    c = C * (h_priv.T @ ones)
    r_c = norm(a - b + c) / max(1.0, norm(a), norm(b), norm(c))

    hw = h @ w
    hc = h_priv @ w_corr
    slack = lam / C
    r_f = norm(hw + hc + slack - y) / max(1.0, norm(hw), norm(hc), norm(slack), norm(y))

    return float(max(r_w, r_c, r_f))


def primal_objective(h, h_priv, y, C, gamma, w, w_corr):
    """Objective value with the slack xi = Y - H w - Ht w_corr substituted."""
    h = np.asarray(h, dtype=float)
    h_priv = np.asarray(h_priv, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    corr = h_priv @ w_corr
    xi = y - h @ w - corr
    return float(
        0.5 * np.sum(w ** 2)
        + 0.5 * gamma * np.sum(w_corr ** 2)
        + C * np.sum(corr)
        + 0.5 * C * np.sum(xi ** 2)
    )


def feasible_perturbations(w, w_corr, n_points, scale=1e-2, seed=0):
    """
    Random points around (w, w_corr).

    Every (w, w_corr) pair is feasible once the slack absorbs the
    constraint residual, so the projection onto the constraint set is the
    slack update done inside `primal_objective`.
    """
    rng = np.random.default_rng(seed)
    for _ in range(n_points):
        yield (w + scale * rng.normal(size=w.shape),
               w_corr + scale * rng.normal(size=w_corr.shape))
