# bound.py

"""
Rademacher-complexity generalization bound for RVFL-type models.

For the class {x -> h(x) w : ||h||_2 <= Z, ||w||_2 <= B} and a K-Lipschitz
loss bounded by c = K Z B, with probability at least 1 - delta over M
training samples

    L(f) <= L_hat(f) + 2 K Z B sqrt(1/M) + K Z B sqrt(ln(1/delta) / (2M))

The boundedness of the loss is an assumption (it does not hold for the
square loss on unbounded outputs); `bound_terms` flags it in its output.
"""

from dataclasses import dataclass

import numpy as np

from errors import ConfigError


@dataclass(frozen=True)
class BoundInputs:
    K: float = 1.0
    Z: float = 1.0
    B: float = 1.0
    M: int = 1
    delta: float = 0.05
    empirical_loss: float = 0.0

    def __post_init__(self):
        _check_nonneg(K=self.K, Z=self.Z, B=self.B, empirical_loss=self.empirical_loss)
        if int(self.M) != self.M or self.M < 1:
            raise ConfigError(f"M must be a positive integer, got {self.M}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")


def _check_nonneg(**values):
    for name, v in values.items():
        if not (np.isfinite(v) and v >= 0):
            raise ConfigError(f"{name} must be a finite non-negative real, got {v}")


def rademacher_term(Z, B, M):
    """Complexity bound Z B sqrt(1/M)."""
    _check_nonneg(Z=Z, B=B)
    if M < 1:
        raise ConfigError(f"M must be >= 1, got {M}")
    return float(Z * B * np.sqrt(1.0 / M))


def bound_terms(inputs):
    """Every term of the bound separately, plus the total."""
    KZB = inputs.K * inputs.Z * inputs.B
    complexity = 2.0 * inputs.K * rademacher_term(inputs.Z, inputs.B, inputs.M)
    confidence = KZB * np.sqrt(np.log(1.0 / inputs.delta) / (2.0 * inputs.M))
    return {
        "empirical_loss": float(inputs.empirical_loss),
        "complexity": float(complexity),
        "confidence": float(confidence),
        "bound": float(inputs.empirical_loss + complexity + confidence),
        "loss_bound_c": float(KZB),
        "assumes_bounded_loss": True,
    }


def generalization_bound(inputs):
    return bound_terms(inputs)["bound"]


def measure_zb(model, h):
    """
    Z = largest row 2-norm of the training enhanced output H,
    B = Frobenius norm of w (the 2-norm when m = 1).
    """
    h = np.asarray(h, dtype=float)
    Z = float(np.max(np.linalg.norm(h, axis=1))) if h.shape[0] else 0.0
    B = float(np.linalg.norm(model.w))
    return Z, B


def empirical_absolute_loss(raw, y):
    """Mean absolute loss per output column (1-Lipschitz)."""
    raw = np.asarray(raw, dtype=float)
    y = np.asarray(y, dtype=float)
    if raw.ndim == 1:
        raw = raw.reshape(-1, 1)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    return np.mean(np.abs(raw - y), axis=0)


def per_output_bounds(model, h, y, K=1.0, delta=0.05):
    """
    Multi-output extension: one bound per output column using that
    column's weight norm and training loss, plus the max over columns.
    The single-output case reduces to the usual bound.
    """
    h = np.asarray(h, dtype=float)
    Z, _ = measure_zb(model, h)
    losses = empirical_absolute_loss(h @ model.w, y)
    col_norms = np.linalg.norm(model.w, axis=0)

    rows = []
    for j, (B_j, loss_j) in enumerate(zip(col_norms, losses)):
        terms = bound_terms(BoundInputs(K=K, Z=Z, B=float(B_j), M=h.shape[0],
                                        delta=delta, empirical_loss=float(loss_j)))
        terms["output"] = j
        terms["B"] = float(B_j)
        terms["Z"] = Z
        rows.append(terms)

    return {"per_output": rows, "max_bound": max(r["bound"] for r in rows)}
