# checks.py
import time

import numpy as np

from bound import BoundInputs, bound_terms, empirical_absolute_loss, measure_zb
from data_loader import make_synthetic_lupi, take_rows
from enhancement import apply, get_activation, init_layer
from krvfl import KernelSpec, predict_krvfl_plus, train_krvfl_plus
from prediction import metrics, predict_labels
from qp_oracle import kkt_residual, solve_primal_kkt
from rvfl import (
    fit_rvfl, fit_rvfl_plus, predict_rvfl, train_rvfl_pinv, train_rvfl_plus, train_rvfl_ridge,
)


def _rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))


def _log_uniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def _random_instance(rng):
    """Small RVFL+ problem: N in [2, 20], n, d in [1, 4], P in [0, 5], m in [1, 3]."""
    N = int(rng.integers(2, 21))
    n, d = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    P = int(rng.integers(0, 6))
    m = int(rng.integers(1, 4))
    seed = int(rng.integers(2 ** 31))

    x = rng.normal(size=(N, n))
    x_priv = rng.normal(size=(N, d))
    y = rng.normal(size=(N, m))
    h = apply(init_layer(n, P, "sigmoid", 1.0, seed), x)
    h_priv = apply(init_layer(d, P, "sigmoid", 1.0, seed + 1), x_priv)
    C = _log_uniform(rng, 0.1, 100.0)
    gamma = _log_uniform(rng, 0.1, 100.0)
    return h, h_priv, y, C, gamma


# ============================================================
# 1) Closed form vs KKT oracle
# ============================================================

def oracle_equivalence_check(n_instances=100, seed=0, tol=1e-8, flip_sign=False):
    """
    Compare the RVFL+ closed form against the independent KKT solve on
    randomized small instances.

    n_instances : number of random problems
    tol         : max allowed relative error in w, w_corr, lambda and KKT residual
    flip_sign   : train the closed form with the flipped right-hand side
    """
    rng = np.random.default_rng(seed)
    start = time.perf_counter()

    max_err = 0.0
    max_residual = 0.0
    worst = None
    for i in range(n_instances):
        h, h_priv, y, C, gamma = _random_instance(rng)
        model, diag = train_rvfl_plus(h, h_priv, y, C, gamma, flip_sign=flip_sign)
        w_o, wc_o, lam_o = solve_primal_kkt(h, h_priv, y, C, gamma)

        err = max(_rel_err(model.w, w_o), _rel_err(model.w_corr, wc_o),
                  _rel_err(diag.lam, lam_o))
        residual = kkt_residual(h, h_priv, y, C, gamma, model.w, model.w_corr, diag.lam)
        if err > max_err:
            max_err, worst = err, i
        max_residual = max(max_residual, residual)

    return {
        "n_instances": n_instances,
        "max_rel_error": max_err,
        "max_kkt_residual": max_residual,
        "worst_instance": worst,
        "tol": tol,
        "flip_sign": flip_sign,
        "elapsed_s": time.perf_counter() - start,
        "passed": bool(max_err <= tol and max_residual <= tol),
    }


# ============================================================
# 2) Explicit-feature kernel vs random features
# ============================================================

def kernel_feature_check(n_instances=20, seed=0, tol=1e-8):
    """
    With the Mercer part set to phi(u) phi(v)^T, phi being the nonlinear
    half of an enhancement layer, KRVFL+ and RVFL+ must predict the same.
    """
    rng = np.random.default_rng(seed)
    max_err = 0.0
    for _ in range(n_instances):
        N, T = int(rng.integers(5, 30)), int(rng.integers(1, 10))
        n, d, P = int(rng.integers(1, 5)), int(rng.integers(1, 5)), int(rng.integers(1, 8))
        m = int(rng.integers(1, 4))
        layer_seed = int(rng.integers(2 ** 31))

        x = rng.normal(size=(N, n))
        x_priv = rng.normal(size=(N, d))
        y = rng.normal(size=(N, m))
        z = rng.normal(size=(T, n))
        C = _log_uniform(rng, 0.1, 100.0)
        gamma = _log_uniform(rng, 0.1, 100.0)

        layer = init_layer(n, P, "sigmoid", 1.0, layer_seed)
        layer_priv = init_layer(d, P, "sigmoid", 1.0, layer_seed + 1)
        rvfl_model, _ = train_rvfl_plus(apply(layer, x), apply(layer_priv, x_priv), y,
                                        C, gamma, layer=layer)

        spec = KernelSpec(mercer="explicit", feature_map=_nodes_of(layer))
        spec_priv = KernelSpec(mercer="explicit", feature_map=_nodes_of(layer_priv))
        k_model = train_krvfl_plus(x, x_priv, y, spec, spec_priv, C=C, gamma=gamma)

        max_err = max(max_err, _rel_err(predict_krvfl_plus(k_model, z),
                                        predict_rvfl(rvfl_model, z)))

    return {"n_instances": n_instances, "max_rel_error": max_err, "tol": tol,
            "passed": bool(max_err <= tol)}


def _nodes_of(layer):
    G = get_activation(layer.activation)
    return lambda v: G(np.asarray(v, dtype=float) @ layer.a + layer.b)


# ============================================================
# 3) Reduction limits
# ============================================================

def reduction_limits_check(seed=0, C=2.0, gamma=3.0):
    """
    (a) zero privileged features   -> RVFL+ equals dual ridge (1e-8)
    (b) gamma = 1e12               -> RVFL+ close to (a)      (1e-6)
    (c) C = 1e12 on a tall full-rank H -> ridge close to pinv (1e-6)
    """
    rng = np.random.default_rng(seed)
    N, n, d, P, m = 30, 3, 2, 5, 2
    x = rng.normal(size=(N, n))
    x_priv = rng.normal(size=(N, d))
    y = rng.normal(size=(N, m))
    h = apply(init_layer(n, P, "sigmoid", 1.0, seed), x)
    h_priv = apply(init_layer(d, P, "sigmoid", 1.0, seed + 1), x_priv)

    w_dual = h.T @ np.linalg.solve(h @ h.T + np.eye(N) / C, y)
    zeroed, _ = train_rvfl_plus(h, np.zeros_like(h_priv), y, C, gamma)
    err_a = _rel_err(zeroed.w, w_dual)

    suppressed, _ = train_rvfl_plus(h, h_priv, y, C, 1e12)
    err_b = _rel_err(suppressed.w, zeroed.w)

    err_c = _rel_err(train_rvfl_ridge(h, y, 1e12).w, train_rvfl_pinv(h, y).w)

    return {
        "zero_privileged_error": err_a,
        "large_gamma_error": err_b,
        "large_C_error": err_c,
        "passed": bool(err_a <= 1e-8 and err_b <= 1e-6 and err_c <= 1e-6),
    }


# ============================================================
# 4) LUPI benefit on synthetic data (paired seeds)
# ============================================================

def lupi_benefit_check(n_seeds=20, n_train=100, n_test=400, n_signal=4, n_classes=3,
                       noise_std=0.5, P=76, u=2 ** 2.5, C=1e4, gamma=100.0,
                       P_priv=1000, activation_priv="sine", u_priv=32.0,
                       min_wins=15, master_seed=0):
    """
    RVFL (ridge) vs RVFL+ with identical C, normal layer and data per seed.

    With n + P = 0.8 n_train and C = 1e4 the ridge RVFL is close to an
    ordinary least-squares fit and overfits the noisy features. The
    privileged layer is a wide high-frequency sine map of the clean
    signal, so its Gram is near (P_priv / 2) I plus the signal's linear
    kernel; divided by gamma it adds a well-conditioned ridge of about
    P_priv / (2 gamma) that the normal model lacks.
    """
    start = time.perf_counter()
    rows = []
    for i in range(n_seeds):
        seed = master_seed + i
        data = make_synthetic_lupi(n_train + n_test, n_signal, n_classes, noise_std,
                                   task="multiclass", seed=seed)
        train = take_rows(data, np.arange(n_train))
        test = take_rows(data, np.arange(n_train, n_train + n_test))

        base = fit_rvfl(train.x, train.y, "ridge", C=C, P=P, u=u, seed=seed)
        plus, _ = fit_rvfl_plus(train.x, train.x_priv, train.y, C=C, gamma=gamma,
                                P=P, u=u, seed=seed, P_priv=P_priv,
                                activation_priv=activation_priv, u_priv=u_priv)

        acc_base = metrics(predict_labels(predict_rvfl(base, test.x), test.task), test)["accuracy"]
        acc_plus = metrics(predict_labels(predict_rvfl(plus, test.x), test.task), test)["accuracy"]
        rows.append((seed, acc_base, acc_plus))

    diffs = np.array([r[2] - r[1] for r in rows])
    wins = int(np.sum(diffs > 0))
    return {
        "seeds": [r[0] for r in rows],
        "rvfl_accuracy": [r[1] for r in rows],
        "rvfl_plus_accuracy": [r[2] for r in rows],
        "mean_rvfl": float(np.mean([r[1] for r in rows])),
        "mean_rvfl_plus": float(np.mean([r[2] for r in rows])),
        "mean_diff": float(np.mean(diffs)),
        "wins": wins,
        "elapsed_s": time.perf_counter() - start,
        "passed": bool(np.mean(diffs) > 0 and wins >= min_wins),
    }


# ============================================================
# 5) Generalization bound coverage
# ============================================================

def bound_coverage_check(n_runs=100, n_train=100, n_test=1000, n_signal=4,
                         noise_std=0.5, P=20, u=1.0, C=0.1, gamma=1000.0,
                         delta=0.05, K=1.0, min_covered=95, master_seed=0):
    """
    Monte-Carlo coverage of the bound on a binary task: train RVFL+,
    measure (Z, B) and the absolute training loss, and check the bound
    against the held-out absolute loss.
    """
    start = time.perf_counter()
    covered = 0
    gaps = []
    for i in range(n_runs):
        seed = master_seed + i
        data = make_synthetic_lupi(n_train + n_test, n_signal, 2, noise_std,
                                   task="binary", seed=seed)
        train = take_rows(data, np.arange(n_train))
        test = take_rows(data, np.arange(n_train, n_train + n_test))

        model, _ = fit_rvfl_plus(train.x, train.x_priv, train.y, C=C, gamma=gamma,
                                 P=P, u=u, seed=seed)
        h = apply(model.layer, train.x)
        Z, B = measure_zb(model, h)
        train_loss = float(empirical_absolute_loss(h @ model.w, train.y)[0])
        terms = bound_terms(BoundInputs(K=K, Z=Z, B=B, M=n_train, delta=delta,
                                        empirical_loss=train_loss))
        test_loss = float(empirical_absolute_loss(predict_rvfl(model, test.x), test.y)[0])

        gaps.append(terms["bound"] - test_loss)
        covered += int(test_loss <= terms["bound"])

    by_m = [bound_terms(BoundInputs(M=M, delta=delta))["bound"] for M in (100, 1000, 10000)]
    monotone = all(a > b for a, b in zip(by_m, by_m[1:]))

    return {
        "n_runs": n_runs,
        "covered": covered,
        "min_gap": float(np.min(gaps)),
        "bound_by_M": by_m,
        "monotone_in_M": monotone,
        "elapsed_s": time.perf_counter() - start,
        "passed": bool(covered >= min_covered and monotone),
    }
