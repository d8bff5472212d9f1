"""Adam optimizer over a flat parameter vector."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import NumericError, ShapeError


@dataclass
class AdamState:
    """First/second moment accumulators plus hyperparameters; ``t`` counts
    completed steps."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(n_params: int, lr=2e-4, beta1=0.5, beta2=0.999, eps=1e-8,
              dtype=np.float32) -> AdamState:
    return AdamState(
        m=np.zeros(n_params, dtype=dtype),
        v=np.zeros(n_params, dtype=dtype),
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> AdamState:
    """One Adam update with bias correction, applied to ``params`` in place.

    Update: m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2;
    params -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
    """
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ShapeError("adam: parameter/gradient/state shapes differ")
    if not np.isfinite(grads).all():
        raise NumericError("adam: non-finite gradient")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    state.m *= b1
    state.m += (1.0 - b1) * grads
    state.v *= b2
    state.v += (1.0 - b2) * np.square(grads)
    mhat = state.m / (1.0 - b1 ** state.t)
    vhat = state.v / (1.0 - b2 ** state.t)
    params -= state.lr * mhat / (np.sqrt(vhat) + state.eps)
    return state
