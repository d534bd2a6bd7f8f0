# enhancement.py

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from errors import ConfigError, DataError

logger = logging.getLogger(__name__)


# ============================================================
# 1) Activation functions
# ============================================================

def _hardlim(t):
    # closed at zero: hardlim(0) = 1
    return (t >= 0.0).astype(float)


def _tribas(t):
    return np.clip(1.0 - np.abs(t), 0.0, 1.0)


def _radbas(t):
    return np.exp(-np.square(t))


ACTIVATIONS = {
    "sigmoid": expit,
    "sine": np.sin,
    "hardlim": _hardlim,
    "tribas": _tribas,
    "radbas": _radbas,
}


def get_activation(kind):
    try:
        return ACTIVATIONS[str(kind).lower()]
    except KeyError:
        raise ConfigError(
            f"unknown activation {kind!r}; expected one of {sorted(ACTIVATIONS)}"
        )


def activation_eval(kind, t):
    """Scalar evaluation of an activation function."""
    return float(get_activation(kind)(np.asarray(t, dtype=float)))


# ============================================================
# 2) Random enhancement layer
# ============================================================

@dataclass(frozen=True)
class EnhancementLayer:
    """
    Frozen random affine map followed by an activation.

    a : (n, P) weights drawn from U[-u, u]
    b : (P,) biases drawn from U[0, u]
    """
    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    activation: str
    u: float
    seed: int

    @property
    def n_inputs(self):
        return self.a.shape[0]

    @property
    def n_nodes(self):
        return self.a.shape[1]

    @property
    def width(self):
        """Columns of the enhanced output: direct link plus nodes."""
        return self.n_inputs + self.n_nodes


def init_layer(n, P, activation="sigmoid", u=1.0, seed=0):
    """
    Draw a random enhancement layer.

    P = 0 is accepted and yields a pure direct-link layer (H = x); it is
    used by the small oracle instances.
    """
    if int(n) < 1:
        raise ConfigError(f"input width n must be >= 1, got {n}")
    if int(P) < 0:
        raise ConfigError(f"node count P must be >= 0, got {P}")
    if not (np.isfinite(u) and u > 0):
        raise ConfigError(f"scale u must be a positive real, got {u}")
    get_activation(activation)

    rng = np.random.default_rng(seed)
    a = rng.uniform(-u, u, size=(int(n), int(P)))
    b = rng.uniform(0.0, u, size=int(P))
    a.setflags(write=False)
    b.setflags(write=False)
    logger.debug("enhancement layer: n=%d P=%d %s u=%g seed=%d", n, P, activation, u, seed)

    return EnhancementLayer(a=a, b=b, activation=str(activation).lower(),
                            u=float(u), seed=int(seed))


def apply(layer, x):
    """
    Enhanced output H = [x | G(x a + 1 b^T)], shape (N, n + P).

    The first n columns are x itself (the direct link).
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        # a length-N vector feeds a one-input layer as a column
        x = x.reshape(-1, 1) if layer.n_inputs == 1 else x.reshape(1, -1)
    if x.shape[1] != layer.n_inputs:
        raise DataError(
            f"layer expects {layer.n_inputs} input columns, got {x.shape[1]}"
        )

    G = get_activation(layer.activation)
    h2 = G(x @ layer.a + layer.b)
    return np.hstack([x, h2])
